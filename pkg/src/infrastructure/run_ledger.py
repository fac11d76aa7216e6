"""Run ledger: one record per CLI run, kept in runs.json."""

import json
import sys
import uuid
from collections import Counter
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List


def _log(msg: str):
    print(msg, file=sys.stderr)


class RunLedger:
    """JSON-backed run history implementing RunLedgerPort.

    Past max_runs the oldest half is folded into runs-summary.txt and dropped.
    """

    def __init__(self, output_dir: str = "results", max_runs: int = 200):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.max_runs = max_runs
        self.runs_file = self.output_dir / "runs.json"
        self.summary_file = self.output_dir / "runs-summary.txt"

    def load(self) -> List[Dict[str, Any]]:
        if not self.runs_file.exists():
            return []
        try:
            raw = json.loads(self.runs_file.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            _log(f"Failed to load run ledger: {e}")
            return []
        return raw if isinstance(raw, list) else []

    def _save(self, runs: List[Dict[str, Any]]):
        try:
            self.runs_file.write_text(json.dumps(runs, indent=2, sort_keys=True), encoding="utf-8")
        except OSError as e:
            _log(f"Failed to save run ledger: {e}")

    def load_summary(self) -> str:
        if not self.summary_file.exists():
            return "No earlier runs."
        return self.summary_file.read_text(encoding="utf-8")

    def record(self, entry: Dict[str, Any]) -> Dict[str, Any]:
        runs = self.load()
        record = {
            "id": str(uuid.uuid4())[:8],
            "timestamp": datetime.now().isoformat(),
            **entry,
        }
        runs.append(record)

        if len(runs) > self.max_runs:
            cut = self.max_runs // 2
            old, runs = runs[:cut], runs[cut:]
            self.summary_file.write_text(summarize(old), encoding="utf-8")
            _log(f"Folded {len(old)} old runs into {self.summary_file.name}")

        self._save(runs)
        return record


def summarize(runs: List[Dict[str, Any]]) -> str:
    if not runs:
        return "No earlier runs."
    commands = Counter(r.get("command", "unknown") for r in runs)
    first = runs[0].get("timestamp", "unknown")
    last = runs[-1].get("timestamp", "unknown")
    return (
        f"Summary of {len(runs)} runs ({first} to {last}):\n"
        f"- Command breakdown: {dict(sorted(commands.items()))}\n"
        f"- Most common command: {commands.most_common(1)[0][0]}\n"
    )
