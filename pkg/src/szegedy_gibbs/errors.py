"""Exception types raised across the package."""


class SzegedyGibbsError(Exception):
    """Base class for all package errors."""


class NetworkFormatError(SzegedyGibbsError, ValueError):
    """A network description is malformed.

    ``field`` names the offending location, e.g. ``nodes[1].cpt[3]``.
    """

    def __init__(self, message, field=None):
        self.field = field
        self.reason = message
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ZeroConditioningEvent(SzegedyGibbsError, ValueError):
    """A conditional probability was requested on an event of probability zero."""

    def __init__(self, message, node=None, configuration=None):
        self.node = node
        self.configuration = configuration
        super().__init__(message)


class SingularPi(SzegedyGibbsError, ValueError):
    """The stationary distribution has a zero entry where a positive one is required."""


class DegenerateTopEigenvalue(SzegedyGibbsError, ValueError):
    """More than one eigenvalue lies on the unit circle (reducible or periodic chain)."""


class DegeneratePhase(SzegedyGibbsError, ValueError):
    """A non-stationary eigenvalue has modulus so close to one that its walk phase vanishes."""


class BudgetExceeded(SzegedyGibbsError, ValueError):
    """The requested simulation needs more qubits than the configured budget."""


class UnsupportedCardinality(SzegedyGibbsError, ValueError):
    """Gate emission does not support this node cardinality."""


class DimensionMismatch(SzegedyGibbsError, ValueError):
    """An array does not have the shape the register layout requires."""


class LengthMismatch(SzegedyGibbsError, ValueError):
    """Two distributions over different numbers of outcomes were compared."""
