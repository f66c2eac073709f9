"""Forward and inverse spectral solver for second-order integro-differential
operators on [0, pi] with a Volterra memory kernel."""

from .errors import (
    ConfigError,
    DivergenceError,
    EnumerationIncompleteError,
    IdespecError,
    LadderMismatchError,
    MarchOverflowError,
    WeylPoleError,
)
from .inverse import (
    CoefficientFit,
    MomentProbeCase,
    ProbeReport,
    ReconstructionReport,
    SectorRay,
    TaylorPotential,
    default_ladder,
    extract_coefficient,
    moment_probe,
    reconstruct,
    weyl_gap,
)
from .operators import (
    OperatorConfig,
    PolyKernel,
    PolyPotential,
    SampledPotential,
    SeparableKernel,
    SpectralPoint,
    ZeroKernel,
)
from .solver import (
    SolutionTrace,
    integrate_adjoint,
    integrate_forward,
    residual_norm,
    solve_basis,
    solve_phi,
    solve_phi_star,
    weyl_value,
)
from .spectral import (
    Spectrum,
    WeylFunction,
    char_delta,
    delta_from_spectrum,
    eigenvalues,
    fit_omega,
    sector_asymptotics_check,
    verify_adjoint,
    weyl_eval,
)
from .verify import run_verification

__version__ = "0.1.0"
