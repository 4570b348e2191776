"""Positive definite kernels against finite boundary measure spaces.

Factorize kernels through Parseval frames and atomic measures, drive the
isometry/co-isometry transform pair, realize Gaussian boundary processes,
and run the Clark-measure analytic machinery on the disk.
"""

from .errors import (
    BAtOne,
    BaseMismatch,
    CauchyZero,
    CheckFailure,
    ConfigError,
    DimensionMismatch,
    DomainViolation,
    IndexOutOfRange,
    InvalidMeasure,
    KernelBoundaryError,
    LabelMismatch,
    NotAFactorization,
    NotHermitian,
    NotPsd,
    ShapeMismatch,
    SingularCovariance,
    UnknownLabel,
    ZeroExpectation,
)
from .measures import CircleMeasure, DiscreteMeasure
from .kernels import (
    FiniteKernel,
    KernelSpec,
    PointSet,
    PsdReport,
    assemble_gram,
    check_positive_definite,
    polydisk_szego_eval,
    szego_eval,
)
from .rkhs import (
    ParsevalFrame,
    RkhsElement,
    evaluate,
    frame_expand,
    frame_synthesize,
    norm_squared,
    parseval_factorize,
    rkhs_inner,
    tightness_test,
    verify_parseval,
)
from .factorization import (
    BoundaryFactorization,
    MeasureMorphism,
    apply_V,
    apply_W,
    check_isometry,
    check_morphism,
    from_parseval_frame,
    is_factorization,
    l2_inner,
    l2_norm_squared,
    minimality_test,
    projection_spectrum,
    pullback,
    pullback_isometry_residual,
    range_projection,
    schwarz_bound_check,
    verify_factorization,
)
from .gaussian import (
    GaussianRealization,
    SampleBatch,
    consistency_check,
    empirical_covariance,
    log_density,
    realize,
    sample,
)
from .clark import (
    InnerFunctionB,
    RenormContext,
    b_eval,
    build_kb_factorization,
    build_szego_factorization,
    cauchy_transform,
    density_criterion,
    expectation_vector,
    herglotz_poisson_check,
    inner_modulus_check,
    kb_eval,
    kb_feature,
    normalized_transform_V,
    polydisk_density_test,
    renormalize,
)

__version__ = "0.1.0"
