"""Spiked conjugate kernels induced by one large gradient step.

Closed forms for the isotropic and rank-one-warped ReLU kernels, the
training pipeline that produces the spike, spectral predictions for the
warped kernel's eigenstructure, and desk-scale experiment drivers.
"""

from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateLink,
    DimensionMismatch,
    DomainError,
    GapCollapse,
    InsufficientData,
    NonPositiveDefinite,
    QuadratureFailure,
    SingularSystem,
    SpikedKernelError,
    ZeroFeature,
    ZeroSpike,
    ZeroVector,
)
from .link_functions import LinkFunction, from_name, table_link
from .rng import SeededStream, standard_normal
from .spiked_covariance import (
    LearningConfig,
    SpikedCovariance,
    coefficients_from_config,
    inverse,
    log_det,
    make_spiked,
    matvec,
    sample_weights,
    sqrt,
)

__version__ = "0.1.0"
