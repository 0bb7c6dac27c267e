"""Shrinking-target experiments for matrix transformations of tori.

Orbit engines (exact digit streams for integer bases, dyadic interval
arithmetic otherwise), Parry/Yrrap invariant measures, quantitative
hit-counting experiments, closed-form Hausdorff-dimension calculators,
and constructive Markov subsystems, with a reproducible experiment CLI.
"""

__version__ = "0.1.0"

from .errors import (
    AmbiguityBudgetExceeded,
    BudgetTooLarge,
    ConfigInvalid,
    DegenerateF,
    Indeterminate,
    InfiniteCoordinate,
    OutOfTable,
    PrecisionExhausted,
    RateNotVanishing,
    SingularMatrix,
    SlopeTooSmall,
    TolUnreachable,
    UnboundedU,
)
from .orbits import (
    DiagonalTorusSystem,
    DigitStream,
    IntegerMatrixSystem,
    UnitRealInterval,
    beta_step,
    eigenvalue_moduli,
    iterate,
    required_precision,
)
from .cylinders import (
    BetaAutomaton,
    Cylinder,
    count_cylinders,
    cylinders_of_order,
    full_cylinder_gap,
    full_cylinder_stats,
    is_full_cylinder,
    preimage_intervals,
)
from .measures import (
    GOLDEN_RATIO,
    ParryYrrapMeasure,
    ProductMeasure,
    SupportSet,
    bound_constant,
    density,
    measure_interval,
    product_measure_rectangle,
    support,
)
from .targets import (
    AccumulationSet,
    Containment,
    RateFunction,
    Shape,
    TargetSpec,
    accumulation_set,
    ball,
    contains,
    hyperboloid,
    hyperboloid_volume,
    lebesgue_volume,
    nu_hyperboloid_volume,
    phi_sum,
    phi_values,
    rectangle,
)
from .counting import (
    CheckpointRow,
    CorrelationSeries,
    CountingResult,
    CountingSummary,
    VarianceReport,
    correlation_estimate,
    correlation_series,
    count_hits,
    fit_exponential,
    monte_carlo_counting,
    paley_zygmund_bound,
    variance_check,
    window_hits,
)
from .dimension import (
    DimensionReport,
    MtpInput,
    ReductionFactor,
    ReductionOutcome,
    conjectured_dim_hat,
    conjectured_theta_hat,
    cover_cost_sequence,
    degenerate_reduction,
    dim_ball,
    dim_mult,
    dim_onedim,
    dim_rect,
    markov_bounds,
    mtp_dimension,
    theta_rect,
    unbounded_bounds,
)
from .markov import (
    MarkovSubsystem,
    PiecewiseLinearMap,
    beta_map,
    build_markov,
    entropy_and_dim,
    eventually_onto_search,
    is_primitive,
    normalize_partition,
    perron_bounds,
    power_map,
    verify_markov,
    word_count,
)
from .cli import ExperimentConfig, RunManifest, run, validate
