"""Exception types shared across the package."""


class SpikedKernelError(Exception):
    """Base class for all library errors."""


class NonPositiveDefinite(SpikedKernelError):
    """Covariance coefficients would break positive definiteness."""


class ZeroSpike(SpikedKernelError):
    """A zero spike direction was given alongside a nonzero spike weight."""


class DimensionMismatch(SpikedKernelError):
    """Operands have incompatible shapes."""


class DegenerateLink(SpikedKernelError):
    """The link's mean Gaussian derivative vanishes; unsupported regime."""


class QuadratureFailure(SpikedKernelError):
    """Quadrature nodes produced non-finite values."""


class ZeroVector(SpikedKernelError):
    """A zero-norm vector was given where a direction is required."""


class ZeroFeature(SpikedKernelError):
    """A zero feature vector cannot be normalized for alignment."""


class InsufficientData(SpikedKernelError):
    """Too few samples or grid points for the requested computation."""


class DomainError(SpikedKernelError):
    """Argument lies outside the convergence domain."""


class SingularSystem(SpikedKernelError):
    """Unregularized linear system is singular."""


class GapCollapse(SpikedKernelError):
    """Predicted spectral gap closed; the two-mode reduction is invalid."""


class ConvergenceFailure(SpikedKernelError):
    """An eigensolver or iterative routine failed to converge."""


class ConfigError(SpikedKernelError):
    """Invalid experiment configuration."""
