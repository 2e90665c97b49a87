"""Geometric phase of the damped qubit over one bare period T = 2 pi / omega0.

Four evaluators are provided:

* :func:`gp_exact` integrates omega0 cos^2(Theta(t)) over the period, where
  Theta parametrizes the dominant eigenvector of rho(t).
* :func:`gp_kinematic` evaluates the general mixed-state kinematic formula
  directly from a sampled density-matrix trajectory. It is an independent
  check on ``gp_exact``; the two agree modulo 2 pi whenever c(t) stays away
  from zero.
* :func:`gp_perturbative` is the weak-coupling expansion to order W^2.
* :func:`gp_markovian_limit` is that expansion at large spectral width.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .amplitude import SystemParams, amplitude_analytic, markovian_decay
from .errors import DegenerateTrajectoryError, InvalidInputError, UnsupportedInputError
from .numerics import AmplitudeTrajectory, QuadratureSettings, integrate_uniform
from .qubit_state import (
    QubitDensityMatrix,
    StateTrajectory,
    closed_form_states,
    continued_phase,
    density_arrays,
    eigen_arrays,
)

TWO_PI = 2.0 * math.pi
Z_MAX = 4.0 * math.pi**3 / 3.0
Z_SERIES_SWITCH = 1e-2
_Z_SERIES_TERMS = 14

EVALUATORS = ("exact", "kinematic", "perturbative", "markovian", "unitary")


class QuadratureEstimate(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class PhaseResult:
    """All phase evaluations for one parameter point.

    Fields that were not requested, or are undefined for the parameters
    (Markovian limit at lambda = 0), are ``None``.
    """

    phi_unitary: float
    phi_exact: Optional[float] = None
    phi_kinematic: Optional[float] = None
    phi_perturbative: Optional[float] = None
    phi_markovian: Optional[float] = None
    correction: Optional[float] = None
    quadrature_error_estimate: Optional[float] = None


def gp_unitary(theta0: float) -> float:
    """Phase of the isolated atom, pi (1 + cos theta0)."""
    if not 0.0 <= theta0 <= math.pi:
        raise InvalidInputError(f"theta0 must lie in [0, pi], got {theta0!r}")
    return math.pi * (1.0 + math.cos(theta0))


def _cos2_theta(theta0, c):
    p, q = density_arrays(theta0, c)
    _, _, ct = eigen_arrays(p, q)
    return ct * ct


def gp_exact(
    params: SystemParams,
    settings: QuadratureSettings | None = None,
    trajectory: AmplitudeTrajectory | None = None,
) -> QuadratureEstimate:
    """Integral of omega0 cos^2(Theta) over one period, with an error estimate.

    Without ``trajectory`` the closed-form amplitude is sampled with
    ``settings.samples_per_period`` Simpson intervals, and the error estimate
    is the change on a grid twice as fine. A supplied trajectory (e.g. from
    the Volterra solver) must span exactly one period with an odd number of
    samples; its estimate compares against the every-other-sample grid.
    """
    settings = settings or QuadratureSettings()
    T = params.period
    w0 = params.omega0

    if trajectory is None:
        n = settings.samples_per_period
        t = np.linspace(0.0, T, n + 1)
        t_fine = np.linspace(0.0, T, 2 * n + 1)
        coarse = integrate_uniform(_cos2_theta(params.theta0, amplitude_analytic(params, t)), T / n)
        fine = integrate_uniform(_cos2_theta(params.theta0, amplitude_analytic(params, t_fine)), T / (2 * n))
        value, err = w0 * coarse, w0 * abs(fine - coarse)
    else:
        if not math.isclose(trajectory.t_max, T, rel_tol=1e-9):
            raise InvalidInputError(f"trajectory spans [0, {trajectory.t_max}] but one period is {T}")
        y = _cos2_theta(params.theta0, trajectory.c_values)
        value = w0 * integrate_uniform(y, trajectory.step)
        if (y.size - 1) % 4 == 0:
            err = abs(value - w0 * integrate_uniform(y[::2], 2.0 * trajectory.step))
        else:
            err = math.nan

    if err > settings.refinement_tolerance * max(abs(value), 1.0):
        warnings.warn(
            f"geometric phase quadrature error estimate {err:.3g} exceeds tolerance "
            f"(W={params.W}, lambda={params.lam}, theta0={params.theta0})",
            RuntimeWarning,
            stacklevel=2,
        )
    return QuadratureEstimate(value, err)


def _as_arrays(rho_trajectory):
    if isinstance(rho_trajectory, StateTrajectory):
        return np.asarray(rho_trajectory.p_ee, float), np.asarray(rho_trajectory.coherence, complex)
    states: Sequence[QubitDensityMatrix] = list(rho_trajectory)
    p = np.array([s.p_ee for s in states], dtype=float)
    q = np.array([s.coherence for s in states], dtype=complex)
    return p, q


def gp_kinematic(rho_trajectory) -> float:
    """Kinematic mixed-state phase of a density-matrix trajectory over [0, T].

    ``rho_trajectory`` is a :class:`StateTrajectory` or a sequence of
    :class:`QubitDensityMatrix` on a uniform grid
    covering one period. The initial state must be pure, so only the upper
    eigenbranch carries weight. The connection term is a midpoint finite
    difference of eigenvectors made continuous along the grid, and the
    result is reduced to [0, 2 pi).
    """
    p, q = _as_arrays(rho_trajectory)
    if p.size < 3:
        raise InvalidInputError("trajectory needs at least 3 samples")
    eps_plus, eps_minus, cos_t = eigen_arrays(p, q)
    if eps_minus[0] > 1e-9:
        raise UnsupportedInputError(f"initial state is mixed (eps_minus = {eps_minus[0]:.3g})")
    split = eps_plus - eps_minus
    if np.any(split[1:-1] < 1e-12):
        k = int(np.argmax(split[1:-1] < 1e-12)) + 1
        raise DegenerateTrajectoryError(f"eigenvalues coincide at sample {k}")

    sin_t = np.sqrt(np.clip(1.0 - cos_t * cos_t, 0.0, None))
    vec = np.stack([np.exp(1j * continued_phase(q)) * cos_t, sin_t.astype(complex)], axis=1)
    # sign-align each eigenvector with its predecessor
    flips = np.real(np.sum(vec[:-1].conj() * vec[1:], axis=1)) < 0
    sign = np.concatenate([[1.0], np.where(np.cumsum(flips) % 2, -1.0, 1.0)])
    vec = vec * sign[:, None]

    mid = 0.5 * (vec[:-1] + vec[1:])
    connection = np.sum(mid.conj() * (vec[1:] - vec[:-1]))
    overlap = np.vdot(vec[0], vec[-1])
    weight = math.sqrt(max(eps_plus[0] * eps_plus[-1], 0.0))
    total = weight * overlap * np.exp(-connection)
    if total == 0:
        warnings.warn("kinematic phase undefined: vanishing interference amplitude", RuntimeWarning, stacklevel=2)
        return 0.0
    return float(np.angle(total)) % TWO_PI


def kinematic_from_params(params: SystemParams, settings: QuadratureSettings | None = None) -> float:
    """:func:`gp_kinematic` on the closed-form trajectory sampled over one period."""
    settings = settings or QuadratureSettings()
    t = np.linspace(0.0, params.period, settings.points)
    return gp_kinematic(closed_form_states(params, t))


def _z_direct(x):
    y = TWO_PI * x
    return (-np.expm1(-y) - y * (1.0 - 0.5 * y)) / x**3


def _z_series(x):
    # x^-3 sum_{k>=3} (-1)^(k+1) (2 pi x)^k / k!, Horner in x from the top term
    coeffs = [(-1) ** (k + 1) * TWO_PI**k / math.factorial(k) for k in range(3, 3 + _Z_SERIES_TERMS)]
    acc = np.zeros_like(x)
    for a in reversed(coeffs):
        acc = acc * x + a
    return acc


def z_function(x):
    """Width dependence of the weak-coupling correction, x^-3 [1 - e^(-2 pi x) - 2 pi x (1 - pi x)].

    Equals 4 pi^3 / 3 at x = 0 and decays like 2 pi^2 / x for large x.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise InvalidInputError("z_function needs x >= 0")
    small = arr < Z_SERIES_SWITCH
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, _z_series(np.where(small, arr, 0.0)), _z_direct(np.where(small, 1.0, arr)))
    return float(out) if out.ndim == 0 else out


def _angular_factor(theta0):
    return math.sin(theta0) ** 2 * (1.0 + 0.5 * math.cos(theta0))


def gp_perturbative(params: SystemParams) -> float:
    """Phase to order W^2. Only meaningful while (W/omega0)^2 z(lambda/omega0) << 1."""
    ratio = params.W / params.omega0
    return gp_unitary(params.theta0) - ratio**2 * _angular_factor(params.theta0) * z_function(
        params.lam / params.omega0
    )


def gp_markovian_limit(params: SystemParams) -> float:
    """Large-width phase, with the decay constant Gamma0 = 2 W^2 / lambda."""
    g0 = markovian_decay(params)
    return gp_unitary(params.theta0) - math.pi**2 * g0 / params.omega0 * _angular_factor(params.theta0)


def evaluate_phases(
    params: SystemParams,
    settings: QuadratureSettings | None = None,
    evaluators: Sequence[str] = EVALUATORS,
) -> PhaseResult:
    """Run the requested evaluators for one parameter point."""
    unknown = set(evaluators) - set(EVALUATORS)
    if unknown:
        raise InvalidInputError(f"unknown evaluator(s): {', '.join(sorted(unknown))}")
    settings = settings or QuadratureSettings()
    out = {"phi_unitary": gp_unitary(params.theta0)}
    if "exact" in evaluators:
        est = gp_exact(params, settings)
        out["phi_exact"] = est.value
        out["quadrature_error_estimate"] = est.error
        out["correction"] = out["phi_unitary"] - est.value
    if "kinematic" in evaluators:
        out["phi_kinematic"] = kinematic_from_params(params, settings)
    if "perturbative" in evaluators:
        out["phi_perturbative"] = gp_perturbative(params)
    if "markovian" in evaluators and params.lam > 0:
        out["phi_markovian"] = gp_markovian_limit(params)
    return PhaseResult(**out)
