"""Exception hierarchy shared by the solvers and the CLI."""


class MultiCoverError(Exception):
    """Base class for every error raised by this package."""


class InputError(MultiCoverError, ValueError):
    """Malformed instance, solution or parameter."""


class InfeasibleError(MultiCoverError):
    """The instance (or a residual of it) cannot be covered.

    ``witness`` names a point whose demand exceeds its available coverage,
    and ``shortfall`` how many covering ranges are missing.
    """

    def __init__(self, message, witness=None, shortfall=None):
        super().__init__(message)
        self.witness = witness
        self.shortfall = shortfall


class SolverError(MultiCoverError):
    """Numerical failure inside an LP solver; ``log`` holds the iteration trace."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = list(log or [])


class RetryBudgetExceeded(MultiCoverError):
    """A randomized routine did not succeed within its attempt budget."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CuttingError(MultiCoverError):
    """Cutting construction gave up on a cell."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InternalCheckError(MultiCoverError, AssertionError):
    """A machine-checked invariant of a pipeline failed (a bug, not bad input)."""
