"""Thin-film approximations of the one-phase Muskat problem in Wiener spaces.

The package is organised bottom-up:

- spectral: band-limited periodic fields, Wiener norms, dealiased products
- wiener: product/power/interpolation constants and inequality reports
- strip: Poisson solver on the flattened strip and the remainder potential
- regime: dimensionless parameters, hypotheses and smallness thresholds
- evolution: right-hand sides of every law and ETDRK2 stepping
- diagnostics: energy ledgers, error norms and convergence studies
- cli: JSON-configured command-line runs writing CSV, JSON and figures
"""

from .diagnostics import (
    EnergyLedger,
    ErrorReport,
    SlopeFit,
    convergence_study,
    decomposition_residual,
    energy_report,
    error_norms,
    illposed_growth,
    remainder_scaling_study,
)
from .errors import (
    BlowUpError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    InvariantError,
    MuskatError,
    ParameterError,
    ShapeError,
    StudyError,
    ValidationError,
)
from .evolution import ModelSpec, Trajectory, integrate, linear_symbol, rhs, step
from .regime import Bond, Law, RegimeParams, RemainderVariant
from .spectral import (
    GridSpec,
    SpectralField,
    WienerIndex,
    derivative,
    multiply,
    to_physical,
    to_spectral,
    wiener_norm,
)
from .strip import (
    StripField,
    ZGrid,
    assemble_diffeo,
    build_sources,
    remainder_flux,
    remainder_potential,
    solve_poisson_strip,
)
from .wiener import InequalityReport, compose_G, curvature, inequality_report

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
