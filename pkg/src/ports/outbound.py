"""Outbound ports: interfaces the domain and CLI use for side effects."""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, runtime_checkable


@dataclass
class WrittenFile:
    """Result of a store operation."""

    path: str
    meta_path: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)


@runtime_checkable
class TrajectoryRunnerPort(Protocol):
    """Runs one job per item and returns results in item order."""

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]: ...


@runtime_checkable
class ResultStorePort(Protocol):
    """Interface for persisting experiment results."""

    def write_json(self, name: str, payload: Dict[str, Any], meta: Optional[Dict[str, Any]] = None) -> WrittenFile: ...

    def write_csv(
        self,
        name: str,
        header: Sequence[str],
        rows: Sequence[Sequence[Any]],
        meta: Optional[Dict[str, Any]] = None,
    ) -> WrittenFile: ...

    def write_bytes(self, name: str, data: bytes, meta: Optional[Dict[str, Any]] = None) -> WrittenFile: ...


@runtime_checkable
class RunLedgerPort(Protocol):
    """Append-only record of CLI runs."""

    def record(self, entry: Dict[str, Any]) -> Dict[str, Any]: ...

    def load(self) -> List[Dict[str, Any]]: ...
