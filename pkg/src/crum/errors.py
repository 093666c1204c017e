"""Exception types shared across the package."""


class CrumError(Exception):
    """Base class for all package errors."""


class StripError(CrumError, ValueError):
    """Evaluation point left the guaranteed analyticity band of a function."""

    def __init__(self, point, halfwidth, label=""):
        self.point = complex(point)
        self.halfwidth = halfwidth
        name = f" of {label!r}" if label else ""
        super().__init__(
            f"point {self.point} outside analyticity strip{name} "
            f"(|Im x| <= {halfwidth:g})"
        )


class DomainError(CrumError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(CrumError, ZeroDivisionError):
    """Evaluation at (or numerically too close to) a pole."""


class CapabilityError(CrumError, NotImplementedError):
    """Requested order/feature beyond what the object supports."""


class AccuracyError(CrumError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target.

    Carries the best available estimate in ``best`` when one exists.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ParameterError(CrumError, ValueError):
    """Family parameters violate a documented constraint."""


class ChainBreakError(CrumError, RuntimeError):
    """A chain level cannot be built (e.g. its seed function has a node)."""


class BranchError(CrumError, ArithmeticError):
    """Square-root branch tracking detected an unresolvable crossing."""
