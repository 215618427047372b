"""Stationary ballistic transport in 1-D with the fourth-order non-parabolic
Schroedinger equation (SE4) and the effective-mass baseline (SE2)."""
from .dispersion import (
    Direction,
    Model,
    RegionRoots,
    RootClass,
    WaveNumberSet,
    companion_wavenumber,
    contact_wave_numbers,
    injection_energy,
    kane_energy,
    parabolic_energy,
    plane_wave_current,
    quartic_energy,
    region_roots,
    transmitted_pair,
)
from .errors import (
    Ballistic1DError,
    ContractError,
    DegenerateEquationError,
    DomainError,
    DynamicRangeError,
    InconsistentInjectionError,
    IntegrationError,
    InvalidParameterError,
    InvalidProfileError,
    OutOfBandError,
    SingularSystemError,
    StiffnessError,
    UnsupportedProfileError,
)
from .oracle import piecewise_constant_basis, solve_piecewise_constant
from .potential import (
    Custom,
    DoubleBarrier,
    PotentialProfile,
    Rtd,
    Segment,
    SingleBarrier,
    Step,
    build_profile,
    rtd_family,
    step_family,
)
from .propagator import FundamentalBasis, SolverOpts, integrate_basis
from .scattering import (
    ScatteringSolution,
    SweepResult,
    iv_sweep,
    probability_current,
    residual_check,
    solve_scattering,
)
from .units import MaterialParams, derive_material

__version__ = "0.1.0"
