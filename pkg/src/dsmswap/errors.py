"""Exception hierarchy."""


class DSMSwapError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(DSMSwapError, ValueError):
    pass


class SizeError(DSMSwapError, ValueError):
    pass


class TopologyError(DSMSwapError, ValueError):
    pass


class ParseError(DSMSwapError, ValueError):
    """Malformed circuit/topology input. ``context`` names the offending field."""

    def __init__(self, message, context=None):
        self.context = context
        if context is not None:
            message = f"{context}: {message}"
        super().__init__(message)


class NumericError(DSMSwapError, ArithmeticError):
    pass


class ContractError(DSMSwapError, ValueError):
    pass


class RoutingError(DSMSwapError, RuntimeError):
    def __init__(self, message, layer=None):
        self.layer = layer
        super().__init__(message)


class MetricsError(DSMSwapError, ValueError):
    pass
