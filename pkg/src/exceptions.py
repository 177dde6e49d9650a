from typing import Optional


class CapExceededError(ValueError):
    """An exhaustive routine was asked to run above its configured cap."""


class SetFileError(ValueError):
    """A set, family or trace file could not be parsed."""


class CertificateError(ValueError):
    """A stored certificate does not re-verify against the families it names."""


class TraceReplayError(ValueError):
    """Replaying a trace produced different numbers from the ones recorded."""


class InternalConsistencyError(RuntimeError):
    """Two independent computation paths disagreed."""


class TheoremFalsificationError(RuntimeError):
    """
    A disjunction that the argument guarantees resolved to neither branch, or an
    inequality the argument proves failed on exact numbers.

    The offending state is kept so the CLI can dump it before exiting with code 2.
    """

    def __init__(self, message: str, state: Optional[dict] = None):
        super().__init__(message)
        self.state = state or {}
