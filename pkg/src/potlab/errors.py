"""Exception types shared across the package."""


class PotlabError(Exception):
    pass


class MeanNotZeroError(PotlabError):
    """A zero-mean precondition failed for a singular multiplier or kernel."""


class EpsilonTooSmallForBoxError(PotlabError):
    """Regularization Gaussian does not decay enough inside the box."""


class QOutOfRangeError(PotlabError):
    """Weighted-norm exponent outside [1, n/(n-1)) without probe mode."""


class RadiusOutOfRangeError(PotlabError):
    """Sphere radius outside (0, L/2)."""


class SupportOverflowError(PotlabError):
    """Recipe support extends past the |x| <= L/4 padding region."""


class SphereMeanNonzeroError(PotlabError):
    """Integrand has nonzero sphere mean where a zero mean is required."""


class NotDivergenceFreeError(PotlabError):
    """Vector field failed the spectral divergence-free gate."""


class LadderTooShortError(PotlabError):
    """Parameter ladder has fewer entries than the sweep requires."""


class DimensionError(PotlabError):
    """Operation not defined for this space dimension."""


class ConfigError(PotlabError):
    """Malformed run configuration."""
