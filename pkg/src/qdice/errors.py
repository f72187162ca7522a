"""Exception types shared across the toolkit."""


class QdiceError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(QdiceError, ValueError):
    """Register shapes of two states (or a state and a target) disagree."""


class ParameterError(QdiceError, ValueError):
    """A protocol or solver parameter is outside its valid domain."""


class DegenerateParameterError(ParameterError):
    """p + eta = 0: the protocol rotation is undefined."""


class BracketError(QdiceError, ValueError):
    """A root-finding bracket does not enclose a sign change."""
