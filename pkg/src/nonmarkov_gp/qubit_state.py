"""Reduced qubit state, its eigen-decomposition, and a master-equation propagator.

Basis ordering is (|+>, |->): excited state first. A state is stored as the
excited population ``p_ee`` and the upper off-diagonal element ``coherence``;
the trace is 1 by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .amplitude import SystemParams, amplitude_analytic, decay_rate
from .errors import InvalidInputError

POSITIVITY_SLACK = 1e-12
# h * max|Gamma| above which the fixed-step propagator is flagged
STIFFNESS_LIMIT = 0.5
# determinant below this is rounding noise on a pure state
_PURE_DET = 1e-15


@dataclass(frozen=True)
class QubitDensityMatrix:
    p_ee: float
    coherence: complex

    def __post_init__(self):
        p, q = float(self.p_ee), complex(self.coherence)
        if not (math.isfinite(p) and math.isfinite(q.real) and math.isfinite(q.imag)):
            raise InvalidInputError("density matrix entries must be finite")
        if not -POSITIVITY_SLACK <= p <= 1.0 + POSITIVITY_SLACK:
            raise InvalidInputError(f"excited population {p!r} outside [0, 1]")
        if abs(q) ** 2 > p * (1.0 - p) + POSITIVITY_SLACK:
            raise InvalidInputError("coherence violates positivity |rho_+-|^2 <= p (1 - p)")
        object.__setattr__(self, "p_ee", p)
        object.__setattr__(self, "coherence", q)

    def matrix(self) -> np.ndarray:
        q = self.coherence
        return np.array([[self.p_ee, q], [q.conjugate(), 1.0 - self.p_ee]], dtype=complex)

    @property
    def trace(self) -> float:
        return 1.0

    def positivity_margin(self) -> float:
        """det(rho) = p(1-p) - |q|^2; negative means the state is unphysical."""
        return self.p_ee * (1.0 - self.p_ee) - abs(self.coherence) ** 2


@dataclass(frozen=True)
class EigenDecomposition:
    eps_plus: float
    eps_minus: float
    cos_theta: float
    phase: float

    @property
    def eigenvector(self) -> np.ndarray:
        """Normalized eigenvector of eps_plus, ground component real and >= 0."""
        sin_theta = math.sqrt(max(0.0, 1.0 - self.cos_theta**2))
        return np.array([np.exp(1j * self.phase) * self.cos_theta, sin_theta])


def density_matrix(theta0: float, c: complex) -> QubitDensityMatrix:
    """State at a time where the survival amplitude equals ``c``."""
    if not 0.0 <= theta0 <= math.pi:
        raise InvalidInputError(f"theta0 must lie in [0, pi], got {theta0!r}")
    c = complex(c)
    if abs(c) > 1.0 + 1e-9:
        raise InvalidInputError(f"|c| = {abs(c)!r} exceeds 1")
    p, q = density_arrays(theta0, np.asarray(c))
    return QubitDensityMatrix(float(p), complex(q))


def density_arrays(theta0: float, c):
    """Vectorized form of :func:`density_matrix` returning ``(p_ee, coherence)`` arrays."""
    c = np.asarray(c, dtype=complex)
    return math.cos(theta0 / 2.0) ** 2 * np.abs(c) ** 2, 0.5 * math.sin(theta0) * c


def eigen_arrays(p, q):
    """Eigenvalues and cos(Theta) of the upper eigenvector for arrays of states.

    Returns ``(eps_plus, eps_minus, cos_theta)``. cos(Theta) is taken as 0 when
    both the coherence and p - eps_minus vanish (ground state, or a diagonal
    state with the excited level below half occupation).
    """
    p = np.asarray(p, dtype=float)
    q2 = np.abs(q) ** 2
    eps_plus = 0.5 * (1.0 + np.sqrt(4.0 * q2 + (2.0 * p - 1.0) ** 2))
    det = p * (1.0 - p) - q2
    det = np.where(det < _PURE_DET, 0.0, det)
    eps_minus = det / eps_plus
    # p - eps_minus, computed without cancellation on either side of p = 1/2
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(p >= 0.5, p - eps_minus, q2 / (eps_plus - p))
        norm = np.sqrt(gap * gap + q2)
        cos_theta = np.where(norm > 0, gap / norm, 0.0)
    return eps_plus, eps_minus, cos_theta


def eigen_decompose(rho: QubitDensityMatrix, previous_phase: float = 0.0) -> EigenDecomposition:
    """Spectral data of ``rho``.

    ``phase`` is arg(coherence); when the coherence vanishes the caller's
    ``previous_phase`` is carried over (0 by default).
    """
    ep, em, ct = eigen_arrays(rho.p_ee, rho.coherence)
    q = rho.coherence
    phase = math.atan2(q.imag, q.real) if q != 0 else previous_phase
    return EigenDecomposition(float(ep), float(em), float(ct), phase)


def continued_phase(q) -> np.ndarray:
    """arg(q) along a trajectory, holding the last defined value where q = 0."""
    q = np.asarray(q, dtype=complex)
    phase = np.angle(q)
    defined = q != 0
    if not defined.all():
        idx = np.where(defined, np.arange(q.size), 0)
        np.maximum.accumulate(idx, out=idx)
        phase = np.where(defined[idx], phase[idx], 0.0)
    return phase


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """States on a uniform time grid; iterates as QubitDensityMatrix objects.

    ``warnings`` holds diagnostics raised while the trajectory was produced.
    """

    t_grid: np.ndarray
    p_ee: np.ndarray
    coherence: np.ndarray
    warnings: tuple = field(default_factory=tuple)

    def __len__(self):
        return self.t_grid.size

    def __getitem__(self, k):
        return QubitDensityMatrix(float(self.p_ee[k]), complex(self.coherence[k]))

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]


def closed_form_states(params: SystemParams, t_grid) -> StateTrajectory:
    """rho(t) from the analytic amplitude on ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    p, q = density_arrays(params.theta0, amplitude_analytic(params, t))
    return StateTrajectory(t, p, q)


def _gamma(params: SystemParams, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = decay_rate(params, t[pos])
    return out


def propagate_master_equation(params: SystemParams, t_max: float, steps: int) -> StateTrajectory:
    """Fourth-order Runge-Kutta integration of the time-local master equation.

    Only (p_ee, coherence) are evolved:
        p'  = -2 Gamma(t) p
        q'  = -(i Delta(t) + Gamma(t)) q
    with Gamma, Delta taken from the closed-form Lorentzian solution. Gamma is
    singular at zeros of c(t) (strong coupling, narrow bath). When the step
    does not resolve it (h * max|Gamma| > STIFFNESS_LIMIT), a warning is
    raised and attached to the result, and the steps are taken anyway.
    """
    if not t_max > 0:
        raise InvalidInputError(f"t_max must be positive, got {t_max!r}")
    if int(steps) != steps or steps < 1:
        raise InvalidInputError("steps must be a positive integer")
    steps = int(steps)
    h = t_max / steps
    nodes = np.linspace(0.0, t_max, 2 * steps + 1)  # grid points and midpoints
    gam = _gamma(params, nodes)
    delta = params.omega0

    notes = []
    # RK4 on p' = -2 Gamma p stays physical only while h |Gamma| is small; Gamma
    # diverges at zeros of c(t), where no fixed step resolves it
    with np.errstate(invalid="ignore"):
        stiff = h * np.max(np.abs(gam)) if np.all(np.isfinite(gam)) else math.inf
    near_zero = np.abs(amplitude_analytic(params, nodes)) < 1e-6
    if stiff > STIFFNESS_LIMIT or near_zero.any():
        k = int(np.argmax(np.abs(np.nan_to_num(gam, nan=np.inf))))
        notes.append(
            f"decay rate is singular or unresolved near t = {nodes[k]:.6g} "
            f"(h*max|Gamma| = {stiff:.3g}); the propagated state is unreliable"
        )
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)

    p = np.empty(steps + 1)
    q = np.empty(steps + 1, dtype=complex)
    p[0], q[0] = density_arrays(params.theta0, 1.0 + 0j)
    for n in range(steps):
        g0, gm, g1 = gam[2 * n], gam[2 * n + 1], gam[2 * n + 2]
        # p and q decouple; both are linear, so RK4 reduces to scalar multipliers
        kp1 = -2.0 * g0
        kp2 = -2.0 * gm * (1.0 + 0.5 * h * kp1)
        kp3 = -2.0 * gm * (1.0 + 0.5 * h * kp2)
        kp4 = -2.0 * g1 * (1.0 + h * kp3)
        p[n + 1] = p[n] * (1.0 + h * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4) / 6.0)
        a0, am, a1 = -(1j * delta + g0), -(1j * delta + gm), -(1j * delta + g1)
        kq1 = a0
        kq2 = am * (1.0 + 0.5 * h * kq1)
        kq3 = am * (1.0 + 0.5 * h * kq2)
        kq4 = a1 * (1.0 + h * kq3)
        q[n + 1] = q[n] * (1.0 + h * (kq1 + 2.0 * kq2 + 2.0 * kq3 + kq4) / 6.0)

    t = np.linspace(0.0, t_max, steps + 1)
    return StateTrajectory(t, p, q, tuple(notes))
