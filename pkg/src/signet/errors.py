"""Exception types shared across the package."""


class SignetError(Exception):
    """Base class for all errors raised by this package."""


class GraphConstructionError(SignetError, ValueError):
    """Invalid graph input: self loop, duplicate pair, bad weight."""


class ScheduleError(SignetError, ValueError):
    """Invalid switching schedule. ``interval`` is the offending entry, if known."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class PreconditionError(SignetError):
    """A convergence statement's hypotheses could not be verified on record."""


class NotConvergedError(SignetError):
    """An iterative estimate did not settle. ``spread`` carries the residual."""

    def __init__(self, message, spread):
        super().__init__(message)
        self.spread = spread


class InternalConsistencyError(SignetError):
    """A structural identity the implementation guarantees was violated."""


class ScenarioFormatError(SignetError, ValueError):
    """Scenario file rejected; ``context`` names the field or entry at fault."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context


class GenerationError(SignetError):
    """Random scenario policy unsatisfiable; ``diagnostics`` explains why."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
