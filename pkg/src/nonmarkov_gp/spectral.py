"""Spectral densities J(omega) and their bath correlation kernels f(s).

Kernels are given in the lab frame, f(s) = int J(omega) exp(-i omega s) domega.
For a Lorentzian centred on the atomic frequency this is
W^2 exp(-(lambda + i omega0) s); the modulus W^2 exp(-lambda s) is the
rotating-frame form often quoted for this bath.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import InvalidInputError, UnsupportedVariantError


@dataclass(frozen=True)
class Lorentzian:
    W: float
    lam: float
    omega0: float = 1.0

    def __post_init__(self):
        if not self.W >= 0:
            raise InvalidInputError(f"coupling W must be >= 0, got {self.W!r}")
        if not self.lam > 0:
            raise InvalidInputError(
                f"Lorentzian width must be > 0, got {self.lam!r} (use IdealCavity for the zero-width limit)"
            )


@dataclass(frozen=True)
class IdealCavity:
    """Zero-width limit: J(omega) = W^2 delta(omega - omega0), a single resonant mode."""

    W: float
    omega0: float = 1.0

    def __post_init__(self):
        if not self.W >= 0:
            raise InvalidInputError(f"coupling W must be >= 0, got {self.W!r}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """J sampled on a strictly increasing frequency grid.

    The Fourier transform only sees the tabulated support, so the grid has to
    extend far enough that the neglected tails carry negligible weight.
    """

    omega: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        w = np.array(self.omega, dtype=float)
        j = np.array(self.J, dtype=float)
        if w.ndim != 1 or w.shape != j.shape or w.size < 2:
            raise InvalidInputError("tabulated density needs two equal-length 1-d columns")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(j)):
            raise InvalidInputError("tabulated density contains non-finite values")
        if np.any(np.diff(w) <= 0):
            raise InvalidInputError("tabulated frequency grid must be strictly increasing")
        if np.any(j < 0):
            raise InvalidInputError("tabulated spectral weights must be non-negative")
        w.flags.writeable = False
        j.flags.writeable = False
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "J", j)

    @property
    def total_weight(self) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.trapezoid(self.J, self.omega))


SpectralDensity = Union[Lorentzian, IdealCavity, Tabulated]


@dataclass(frozen=True)
class CorrelationKernel:
    """Complex kernel f(s) for lags s >= 0; callable on scalars or arrays."""

    func: Callable[[np.ndarray], np.ndarray]
    total_weight: float

    def __call__(self, s):
        out = self.func(np.asarray(s, dtype=float))
        return complex(out) if np.ndim(out) == 0 else out


def evaluate_J(sd: SpectralDensity, omega):
    """Spectral weight at ``omega`` (scalar or array)."""
    if isinstance(sd, Lorentzian):
        w = np.asarray(omega, dtype=float)
        out = sd.W**2 * sd.lam / (np.pi * ((sd.omega0 - w) ** 2 + sd.lam**2))
    elif isinstance(sd, Tabulated):
        out = np.interp(omega, sd.omega, sd.J, left=0.0, right=0.0)
    elif isinstance(sd, IdealCavity):
        raise UnsupportedVariantError("ideal-cavity density is a delta distribution; it has no pointwise value")
    else:
        raise UnsupportedVariantError(f"unknown spectral density {type(sd).__name__}")
    return float(out) if np.ndim(out) == 0 else out


def _tabulated_transform(sd: Tabulated, chunk_elems: int = 4_000_000):
    w, j = sd.omega, sd.J

    def f(s):
        s = np.atleast_1d(s)
        flat = s.ravel()
        out = np.empty(flat.size, dtype=complex)
        rows = max(1, chunk_elems // w.size)
        # overflow shows up as a non-finite kernel, which the solver reports
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(0, flat.size, rows):
                phase = np.exp(-1j * np.outer(flat[k : k + rows], w))
                out[k : k + rows] = np.trapezoid(j * phase, w, axis=1)
        return out.reshape(s.shape)

    return f


def correlation_kernel(sd: SpectralDensity) -> CorrelationKernel:
    if isinstance(sd, Lorentzian):
        W2, rate = sd.W**2, sd.lam + 1j * sd.omega0
        return CorrelationKernel(lambda s: W2 * np.exp(-rate * s), W2)
    if isinstance(sd, IdealCavity):
        W2, w0 = sd.W**2, sd.omega0
        return CorrelationKernel(lambda s: W2 * np.exp(-1j * w0 * s), W2)
    if isinstance(sd, Tabulated):
        f = _tabulated_transform(sd)
        return CorrelationKernel(lambda s: f(s) if np.ndim(s) else f(s)[0], sd.total_weight)
    raise UnsupportedVariantError(f"unknown spectral density {type(sd).__name__}")


def correlation_time(sd: SpectralDensity) -> float:
    """Bath memory time 1/lambda of a Lorentzian."""
    if not isinstance(sd, Lorentzian):
        raise UnsupportedVariantError("correlation time is defined for the Lorentzian density only")
    return 1.0 / sd.lam


def load_tabulated(path, omega0: float = 1.0) -> Tabulated:
    """Read a two-column (frequency, J) text file; '#' starts a comment.

    Both columns carry units of frequency and are read as multiples of
    ``omega0``; the default keeps them as written.
    """
    path = Path(path)
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if data.shape[1] != 2:
        raise InvalidInputError(f"{path}: expected 2 columns, found {data.shape[1]}")
    return Tabulated(data[:, 0] * omega0, data[:, 1] * omega0)
