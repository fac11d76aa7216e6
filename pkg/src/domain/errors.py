"""Exception hierarchy shared by the domain, adapters and CLI."""


class LabError(Exception):
    """Base class for every error raised on purpose by this package."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of the operation."""


class SequenceSpecError(LabError, ValueError):
    """A sequence expression is malformed or evaluates to an invalid value."""


class PrecisionHorizonError(LabError):
    """Floating-point digits were requested beyond the reliability horizon."""

    def __init__(self, requested: int, horizon: int):
        self.requested = requested
        self.horizon = horizon
        super().__init__(
            f"requested {requested} digits but only {horizon} are reliable "
            f"at this precision"
        )


class PreconditionRefused(LabError):
    """An experiment refuses to run because its hypotheses are not met."""


class SelfCheckFailed(LabError):
    """A numeric self-check fell outside its tolerance."""
