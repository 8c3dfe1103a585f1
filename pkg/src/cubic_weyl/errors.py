"""Exception hierarchy shared by the library and the CLI."""


class CubicWeylError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(CubicWeylError, ValueError):
    pass


class ResourceError(CubicWeylError):
    """A request exceeds a configured precision or memory budget."""


class NoApproximationError(InvalidInputError):
    pass


class InfeasibleSplitError(CubicWeylError):
    pass


class FactorizationError(CubicWeylError):
    """A cofactor could not be split within the iteration budget."""

    def __init__(self, cofactor, message=None):
        self.cofactor = cofactor
        super().__init__(message or f"could not factor cofactor {cofactor}")


class ConsistencyError(CubicWeylError, ArithmeticError):
    """An exact identity failed; this indicates a bug, not bad input."""
