"""Closed-form survival amplitude for the Lorentzian bath and the coefficients
of the equivalent time-local master equation.

Convention: c(t) = exp(-(lambda/2 + i omega0) t) [cosh(Omega t/2) + (lambda/Omega) sinh(Omega t/2)]
with Omega = sqrt(lambda^2 - 4 W^2). The whole atomic phase exp(-i omega0 t)
multiplies the bracket, which is what makes the Lamb shift equal to omega0.
The modulus |c(t)| does not depend on this choice.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedVariantError
from .numerics import AmplitudeTrajectory

# below this |Omega t| the bracket is evaluated from its Taylor series
CONFLUENT_SWITCH = 1e-4


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs in absolute angular-frequency units.

    ``lam == 0`` selects the ideal-cavity (single-mode) limit.
    """

    W: float
    lam: float
    theta0: float
    omega0: float = 1.0

    def __post_init__(self):
        for name in ("W", "lam", "theta0", "omega0"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        if not self.omega0 > 0:
            raise InvalidInputError(f"omega0 must be positive, got {self.omega0!r}")
        if self.W < 0:
            raise InvalidInputError(f"W must be >= 0, got {self.W!r}")
        if self.lam < 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.lam!r}")
        if not 0.0 <= self.theta0 <= math.pi:
            raise InvalidInputError(f"theta0 must lie in [0, pi], got {self.theta0!r}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega0

    @property
    def Omega(self) -> complex:
        return omega_big(self)

    @property
    def gamma0(self) -> float:
        return markovian_decay(self)

    @property
    def tau_c(self) -> float:
        return math.inf if self.lam == 0 else 1.0 / self.lam

    @property
    def tau_D(self) -> float:
        """Markovian dissipation time 1/Gamma0 = lambda / (2 W^2)."""
        g0 = markovian_decay(self)
        return math.inf if g0 == 0 else 1.0 / g0

    def spectral_density(self):
        from .spectral import IdealCavity, Lorentzian

        if self.lam == 0:
            return IdealCavity(self.W, self.omega0)
        return Lorentzian(self.W, self.lam, self.omega0)


def omega_big(params: SystemParams) -> complex:
    """Principal root of lambda^2 - 4 W^2; positive-imaginary below the confluent point."""
    return cmath.sqrt(complex(params.lam**2 - 4.0 * params.W**2, 0.0))


def _check_times(t, strict=False):
    t = np.asarray(t, dtype=float)
    if strict:
        if np.any(~(t > 0)):
            raise InvalidInputError("time must be > 0")
    elif np.any(~(t >= 0)):
        raise InvalidInputError("time must be >= 0")
    return t


def _unwrap(out):
    return out.item() if np.ndim(out) == 0 else out


def amplitude_analytic(params: SystemParams, t):
    """Survival amplitude c(t); ``t`` may be a scalar or an array."""
    t = _check_times(t)
    lam, w0 = params.lam, params.omega0
    Om = omega_big(params)
    x = Om * t

    with np.errstate(all="ignore"):
        # overflow-free form: every exponent has non-positive real part
        base = np.exp(0.5 * (Om - lam) * t - 1j * w0 * t)
        em1 = np.expm1(-x)
        ratio = lam / Om if Om != 0 else 0.0
        bracket = base * (1.0 + 0.5 * em1 - 0.5 * ratio * em1)

    small = np.abs(x) < CONFLUENT_SWITCH
    if np.any(small):
        xs = np.where(small, x, 0.0)
        ts = np.where(small, t, 0.0)
        x2 = xs * xs
        ch = 1.0 + x2 / 8.0 + x2 * x2 / 384.0
        sh = 0.5 * lam * ts * (1.0 + x2 / 24.0 + x2 * x2 / 1920.0)
        series = np.exp(-(0.5 * lam + 1j * w0) * ts) * (ch + sh)
        bracket = np.where(small, series, bracket)
    return _unwrap(np.asarray(bracket, dtype=complex))


def amplitude_trajectory(params: SystemParams, t_max: float, samples: int) -> AmplitudeTrajectory:
    if not t_max > 0:
        raise InvalidInputError(f"t_max must be positive, got {t_max!r}")
    if samples < 3:
        raise InvalidInputError("need at least 3 samples")
    t = np.linspace(0.0, t_max, int(samples))
    c = np.atleast_1d(amplitude_analytic(params, t))
    c[0] = 1.0
    return AmplitudeTrajectory(t, c)


def decay_rate(params: SystemParams, t):
    """Time-dependent decay rate Gamma(t) = 2W^2 / (lambda + Omega coth(Omega t / 2)).

    Goes to 0 as t -> 0+. In the oscillatory regime it turns negative and
    diverges at the zeros of c(t); those values are returned as computed.
    """
    t = _check_times(t, strict=True)
    lam = params.lam
    Om = omega_big(params)
    x = Om * t
    with np.errstate(all="ignore"):
        em1 = np.expm1(-x)
        om_coth = -Om * (2.0 + em1) / em1
        small = np.abs(x) < CONFLUENT_SWITCH
        if np.any(small):
            x2 = np.where(small, x * x, 0.0)
            series = (2.0 / t) * (1.0 + x2 / 12.0 - x2 * x2 / 720.0)
            om_coth = np.where(small, series, om_coth)
        gamma = 2.0 * params.W**2 / (lam + om_coth)
    return _unwrap(np.real(gamma))


def lamb_shift(params: SystemParams, t):
    """Frequency shift Delta(t); identically omega0 for the resonant Lorentzian.

    At isolated zeros of c(t) the ratio c'/c is singular; the constant value is
    still returned there.
    """
    t = np.asarray(t, dtype=float)
    return _unwrap(np.full(t.shape, params.omega0))


def markovian_decay(params: SystemParams) -> float:
    """Large-width decay constant Gamma0 = 2 W^2 / lambda.

    This is the decay rate of the excited population |c|^2 at large lambda,
    i.e. twice the long-time limit of :func:`decay_rate` (the dissipator
    carries a factor 2). Its inverse is the dissipation time tau_D.
    """
    if params.lam == 0:
        raise UnsupportedVariantError("the ideal cavity (lambda = 0) has no Markovian decay constant")
    return 2.0 * params.W**2 / params.lam
