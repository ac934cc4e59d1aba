"""Exception hierarchy shared by all modules."""


class ShockLayerError(Exception):
    """Base class for every error raised by this package."""


class WeakShock(ShockLayerError, ValueError):
    """M sin(beta) < 1: the queried shock point is weaker than a Mach wave."""


class OutOfDomain(ShockLayerError, ValueError):
    pass


class InvalidShape(ShockLayerError, ValueError):
    """Shock angle not monotone, or some other property the method relies on is broken."""


class NegativeRadicand(ShockLayerError, ArithmeticError):
    pass


class NonConvergence(ShockLayerError, RuntimeError):
    pass


class DegenerateInput(ShockLayerError, ValueError):
    pass


class ParseError(ShockLayerError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ShockLayerError, ValueError):
    pass


class OutOfHull(ShockLayerError, ValueError):
    pass


class NoOverlap(ShockLayerError, ValueError):
    pass
