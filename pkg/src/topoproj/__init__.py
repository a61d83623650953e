"""topoproj: structure-aware random projection with persistence certification.

Projects Euclidean point clouds to a dimension prescribed by the Gaussian
width of their normalized difference set (dense Gaussian or fast
subsampled-Hadamard operators), computes Vietoris-Rips / Cech persistence
diagrams before and after, and certifies numerically that the diagrams are
within the multiplicative interleaving budget implied by the measured
distortion.
"""

__version__ = "0.1.0"

from .core import (
    ContractViolation,
    DegenerateInput,
    DistanceMatrix,
    DuplicatePoint,
    DimensionMismatch,
    EmptySet,
    NonMonotoneFiltration,
    NotPowerOfTwo,
    ParamOutOfRange,
    ParseError,
    PointCloud,
    SizeBlowup,
    Tolerance,
    TooLarge,
    TopoprojError,
    WeightsNotConvex,
    max_pairwise_distortion,
    pairwise_distances,
    substream,
)
from .geometry import (
    Ball,
    RadiusDistortion,
    WeightedBall,
    WeightedPoints,
    hull_membership_residual,
    miniball,
    miniball_weighted,
    radius_distortion,
    variance_identity_residual,
)
from .harness import (
    ExperimentReport,
    GeneratorSpec,
    emit_cloud,
    emit_report,
    generate,
    ingest_csv,
    run_pipeline,
    run_success_probability,
    run_timing,
)
from .persistence import (
    FilteredComplex,
    PersistenceDiagram,
    PersistencePair,
    PersistencePairs,
    Simplex,
    bottleneck,
    cech_filtration,
    diagrams,
    diagrams_from_csv,
    diagrams_to_csv,
    interleaving_check,
    log_bottleneck,
    reduce_boundary,
    reduce_boundary_naive,
    vr_filtration,
)
from .transforms import (
    ProjectionOperator,
    SorsParams,
    apply_op,
    em_constant,
    fwht_in_place,
    make_gaussian_op,
    make_sors_op,
    project_cloud,
    target_dim_gaussian,
    target_dim_sors,
)
from .width import (
    DirectionSet,
    DoublingEstimate,
    SpreadStats,
    WidthEstimate,
    check_width_doubling,
    doubling_dimension,
    gaussian_width_mc,
    normalized_differences,
    spread,
    width_bound_discrete,
    width_bound_sparse,
    width_bound_sphere,
)
