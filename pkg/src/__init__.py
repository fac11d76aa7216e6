"""cf-limits-lab: limit laws for continued-fraction digits."""

from src.config import CONFIG, AppConfig, __version__
from src.domain.errors import (
    DomainError,
    LabError,
    PrecisionHorizonError,
    PreconditionRefused,
    SelfCheckFailed,
    SequenceSpecError,
)

__all__ = [
    "CONFIG",
    "AppConfig",
    "__version__",
    "LabError",
    "DomainError",
    "SequenceSpecError",
    "PrecisionHorizonError",
    "PreconditionRefused",
    "SelfCheckFailed",
]
