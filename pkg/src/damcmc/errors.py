"""Exception hierarchy shared across the package."""


class DAMCMCError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(DAMCMCError, ValueError):
    pass


class ConvergenceError(DAMCMCError):
    """A series or iterative evaluation failed to reach its tolerance."""


class NotSPDError(DAMCMCError, ValueError):
    pass


class SandwichStepError(DAMCMCError):
    """The group-element draw of a sandwich step exhausted its attempt cap."""


class ChainError(DAMCMCError):
    """A kernel failed mid-run. ``partial_trace`` holds the draws made so far."""

    def __init__(self, message, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class ReducibilityError(DAMCMCError):
    pass


class ProtocolError(DAMCMCError):
    """ADDA message-ordering or progress violation. ``state`` is a dump for debugging."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConfigError(DAMCMCError, ValueError):
    pass


class InvarianceError(DAMCMCError, ValueError):
    """A middle kernel fails to leave the augmentation marginal invariant."""


class PreconditionError(DAMCMCError, ValueError):
    """Inputs violate the hypotheses an oracle check relies on."""


class OracleCheckError(DAMCMCError, AssertionError):
    """A numerical check of a proven identity or inequality failed."""
