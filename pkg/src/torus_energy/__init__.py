"""Energies, subharmonicity checks and minimizers for kernels on flat tori."""

__version__ = "0.1.0"

from .errors import (
    DivergedError,
    InvalidInputError,
    OutOfRangeError,
    PreconditionError,
    SingularGradientError,
    TorusEnergyError,
    UndefinedEnergyError,
    UndefinedRatioError,
)
from .geometry import Space, distance, torus_distance, wrap, wrapped_offset
from .kernels import (
    Kernel,
    Profile,
    ProductProfileKernel,
    RadialTableKernel,
    RieszKernel,
    kernel_eval,
    kernel_from_dict,
    named_profile,
    profile_from_dict,
    riesz,
    tabulated_profile,
    truncate,
    with_shift,
)
from .measures import (
    DiscreteMeasure,
    GridMeasure,
    ball,
    complement,
    grid_from_function,
    jordan_split,
    measure_from_dict,
    pushforward_proj,
    restrict,
    uniform_measure,
)
from .energy import (
    EnergyReport,
    GRatio,
    capacity_estimate,
    energy,
    energy_discrete,
    energy_grid,
    energy_signed,
    g_ratio,
    mutual_energy,
    potential,
)
from .subharmonic import (
    check_profile_conditions,
    function_submean_check,
    max_principle_check,
    potential_submean_check,
    scan_entire_subharmonicity,
    submean_check,
)
from .minimize import (
    MinimizeConfig,
    MinimizeResult,
    configuration_energy,
    energy_gradient,
    minimize_best_of,
    minimize_points,
    pair_gradient,
    regime_classifier,
    separability_gap,
    uniformity_metrics,
)
from .fourier import (
    FourierReport,
    cosine_coefficient,
    harmonic_coefficients,
    kernel_harmonic_coefficient,
    nonnegativity_scan,
    parseval_energy,
)
