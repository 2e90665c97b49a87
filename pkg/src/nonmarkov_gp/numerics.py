"""Quadrature on uniform grids and a product-integration Volterra solver.

The Volterra solver targets the single-excitation amplitude equation

    dc/dt + i*omega0*c(t) + int_0^t f(t - tau) c(tau) dtau = 0,   c(0) = 1,

for an arbitrary memory kernel ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError, NumericalDomainError


@dataclass(frozen=True)
class QuadratureSettings:
    """Resolution of the time grid used for phase integrals.

    ``samples_per_period`` counts Simpson subintervals across one period,
    so the grid holds ``samples_per_period + 1`` points.
    """

    samples_per_period: int = 4096
    refinement_tolerance: float = 1e-6

    def __post_init__(self):
        n = self.samples_per_period
        if int(n) != n or n < 16 or n % 2:
            raise InvalidInputError(
                f"samples_per_period must be an even integer >= 16, got {n!r}"
            )
        if not self.refinement_tolerance > 0:
            raise InvalidInputError("refinement_tolerance must be positive")

    @property
    def points(self) -> int:
        return self.samples_per_period + 1


@dataclass(frozen=True)
class VolterraSettings:
    steps: int = 4096
    scheme: str = "trapezoidal-product"

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 64:
            raise InvalidInputError(f"Volterra steps must be an integer >= 64, got {self.steps!r}")
        if self.scheme != "trapezoidal-product":
            raise InvalidInputError(f"unknown Volterra scheme {self.scheme!r}")


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    """Complex survival amplitude c(t) sampled on a uniform grid starting at t = 0."""

    t_grid: np.ndarray
    c_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        c = np.asarray(self.c_values, dtype=complex)
        if t.ndim != 1 or t.shape != c.shape or t.size < 2:
            raise InvalidInputError("t_grid and c_values must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0:
            raise InvalidInputError("trajectory must start at t = 0")
        t.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "c_values", c)

    @property
    def step(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def __len__(self):
        return self.t_grid.size


def integrate_uniform(values, step: float) -> float:
    """Composite Simpson rule over uniformly spaced real samples.

    The sample count must be odd so that every Simpson panel is complete.
    """
    y = np.asarray(values, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise InvalidInputError("need at least 3 samples for Simpson integration")
    if y.size % 2 == 0:
        raise InvalidInputError(f"Simpson integration needs an odd sample count, got {y.size}")
    total = y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()
    return float(total * step / 3.0)


def solve_volterra(
    kernel: Callable[[np.ndarray], np.ndarray],
    omega0: float,
    t_max: float,
    settings: VolterraSettings | None = None,
) -> AmplitudeTrajectory:
    """Integrate the amplitude equation with trapezoidal product integration.

    The fast rotation is removed first: with d(t) = exp(i*omega0*t) c(t) and
    g(s) = f(s) exp(i*omega0*s) the equation becomes
    d'(t) = -int_0^t g(t - tau) d(tau) dtau. Both the time derivative and the
    memory integral use the trapezoidal rule; the newest point enters the
    update linearly and is solved for in closed form. Global error is O(h^2).

    ``kernel`` must accept an array of lags s >= 0 and return complex values.
    """
    settings = settings or VolterraSettings()
    if not t_max > 0:
        raise InvalidInputError(f"t_max must be positive, got {t_max!r}")
    n_steps = settings.steps
    h = t_max / n_steps
    t = np.linspace(0.0, t_max, n_steps + 1)

    f = np.asarray(kernel(t), dtype=complex)
    if f.shape != t.shape:
        f = np.broadcast_to(f, t.shape).astype(complex)
    bad = ~np.isfinite(f)
    if bad.any():
        t_bad = float(t[np.argmax(bad)])
        raise NumericalDomainError(f"kernel is not finite at s = {t_bad:.6g}", time=t_bad)
    g = f * np.exp(1j * omega0 * t)

    d = np.empty(n_steps + 1, dtype=complex)
    d[0] = 1.0
    memory = 0.0 + 0.0j  # trapezoidal memory integral at the current step
    denom = 1.0 + 0.25 * h * h * g[0]
    for n in range(n_steps):
        # memory integral at step n+1, minus the unknown endpoint term
        partial = h * (0.5 * g[n + 1] * d[0] + np.dot(g[n:0:-1], d[1 : n + 1]))
        d[n + 1] = (d[n] - 0.5 * h * (memory + partial)) / denom
        memory = partial + 0.5 * h * g[0] * d[n + 1]

    if not np.all(np.isfinite(d)):
        t_bad = float(t[np.argmax(~np.isfinite(d))])
        raise NumericalDomainError(f"Volterra solution diverged at t = {t_bad:.6g}", time=t_bad)
    c = d * np.exp(-1j * omega0 * t)
    c[0] = 1.0
    return AmplitudeTrajectory(t, c)
