"""Rank-one cutting-and-stacking constructions and exact weak-limit experiments."""

from .errors import *  # noqa: F401,F403
from .lab import (
    Correlation,
    CorrelationEngine,
    CorrelationQuery,
    CorrelationTable,
    TensorQuery,
    TriangularKernel,
    WeakLimitFit,
    correlation,
    correlation_profile,
    cyclicity_probe,
    fit_weak_limit,
    kernel_smoothed_prediction,
    mixing_profile,
    single_level_pairs,
    tensor_correlation,
    triangular_kernel,
)
from .recipes import (
    NsParams,
    NabParams,
    OrnsteinParams,
    build_ns_schedule,
    build_nab_schedule,
    build_ornstein_schedule,
    build_staircase_schedule,
    ns_spacers,
    nab_spacers,
    ornstein_spacers,
    staircase_spacers,
)
from .tower import (
    LevelSet,
    Occurrences,
    PositionSet,
    SpacerSchedule,
    Stage,
    append_stage,
    empty_schedule,
    level_measure,
    occurrences,
    positions,
    spacer_mass_report,
)

__version__ = "0.1.0"
