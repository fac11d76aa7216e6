"""Port interfaces (Hexagonal Architecture).

Inbound models live in src.ports.inbound; they import the domain, so
they are not re-exported here.
"""

from src.ports.outbound import ResultStorePort, RunLedgerPort, TrajectoryRunnerPort, WrittenFile

__all__ = [
    "ResultStorePort",
    "RunLedgerPort",
    "TrajectoryRunnerPort",
    "WrittenFile",
]
