"""Geometric phase of a two-level atom damped by a zero-temperature Lorentzian bath."""

from .amplitude import (
    SystemParams,
    amplitude_analytic,
    amplitude_trajectory,
    decay_rate,
    lamb_shift,
    markovian_decay,
    omega_big,
)
from .errors import (
    ConfigurationError,
    DegenerateTrajectoryError,
    InvalidInputError,
    NumericalDomainError,
    UnsupportedInputError,
    UnsupportedVariantError,
)
from .geometric_phase import (
    PhaseResult,
    evaluate_phases,
    gp_exact,
    gp_kinematic,
    gp_markovian_limit,
    gp_perturbative,
    gp_unitary,
    z_function,
)
from .numerics import AmplitudeTrajectory, QuadratureSettings, VolterraSettings, integrate_uniform, solve_volterra
from .qubit_state import (
    EigenDecomposition,
    QubitDensityMatrix,
    StateTrajectory,
    density_matrix,
    eigen_decompose,
    propagate_master_equation,
)
from .spectral import (
    IdealCavity,
    Lorentzian,
    Tabulated,
    correlation_kernel,
    correlation_time,
    evaluate_J,
)

__version__ = "0.1.0"
