"""Exception types shared across the package."""


class FormatError(ValueError):
    """A tensor/mask/image file violates its on-disk format."""


class ShapeMismatchError(ValueError):
    """Two array arguments that must share a shape do not."""


class NumericalError(RuntimeError):
    """Inference reached a numerically degenerate state (e.g. a posterior
    covariance that stays non positive definite after jitter escalation)."""
