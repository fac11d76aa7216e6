"""File-based result writer: implements ResultStorePort.

Primary files hold only values that depend on the run configuration, so
a rerun with the same manifest is byte-identical. Anything that changes
between runs (timestamp, host, duration) goes to `<name>.meta.json`.
"""

import csv
import dataclasses
import io
import json
import math
import os
import platform
import sys
import tempfile
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from src.config import CSV_SCHEMA_TAG
from src.ports.outbound import WrittenFile


def _log(msg: str):
    print(msg, file=sys.stderr)


def plain(value: Any) -> Any:
    """Reduce a result object to JSON-native types.

    Non-finite floats become None. Fractions are written as "p/q" so
    exact values survive the round trip.
    """
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if hasattr(value, "to_dict"):
        return plain(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return plain(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


def _cell(value: Any) -> str:
    value = plain(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_json(payload: Any) -> str:
    return json.dumps(plain(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(CSV_SCHEMA_TAG + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


class ResultStore:
    """Writes result files atomically under one output directory."""

    def __init__(self, output_dir: str = "results"):
        self._output_dir = Path(output_dir)
        self._output_dir.mkdir(parents=True, exist_ok=True)
        self._started = datetime.now(timezone.utc)

    @property
    def output_dir(self) -> Path:
        return self._output_dir

    def _path(self, name: str) -> Path:
        path = self._output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _atomic_write(self, path: Path, data: bytes) -> None:
        fd, tmp_path = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp_path, str(path))
        except BaseException:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
            raise

    def _write_meta(self, path: Path, meta: Optional[Dict[str, Any]]) -> Path:
        now = datetime.now(timezone.utc)
        record = {
            "file": path.name,
            "written_at": now.isoformat(),
            "host": platform.node(),
            "python": platform.python_version(),
            "duration_s": round((now - self._started).total_seconds(), 3),
            **(meta or {}),
        }
        meta_path = path.with_name(path.name + ".meta.json")
        self._atomic_write(meta_path, render_json(record).encode("utf-8"))
        return meta_path

    def _finish(self, path: Path, data: bytes, meta: Optional[Dict[str, Any]]) -> WrittenFile:
        self._atomic_write(path, data)
        meta_path = self._write_meta(path, meta)
        _log(f"Wrote {path} ({len(data)} bytes)")
        return WrittenFile(path=str(path), meta_path=str(meta_path))

    def write_json(self, name: str, payload: Any, meta: Optional[Dict[str, Any]] = None) -> WrittenFile:
        return self._finish(self._path(name), render_json(payload).encode("utf-8"), meta)

    def write_csv(
        self,
        name: str,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        meta: Optional[Dict[str, Any]] = None,
    ) -> WrittenFile:
        return self._finish(self._path(name), render_csv(header, rows).encode("utf-8"), meta)

    def write_bytes(self, name: str, data: bytes, meta: Optional[Dict[str, Any]] = None) -> WrittenFile:
        return self._finish(self._path(name), bytes(data), meta)

