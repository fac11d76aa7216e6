"""Inbound port: experiment manifests entering the system.

A manifest is a JSON file validated by ExperimentConfig; CLI flags
override individual fields. The event family follows the schema

    {"kind": "closed_band", "c": "2*floor(sqrt(n*log(n)))",
     "d": "floor(sqrt(n*log(n)))", "n0": 2}

or names a preset: {"preset": "sqrt-nlogn-equal"}.
"""

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.domain.events import EventFamily, make_family
from src.domain.zero_one import preset_family

Command = Literal["digits", "measure", "sample", "zero-one", "clt", "mixing"]


class EventFamilySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    kind: Optional[Literal["threshold", "equal", "closed_band", "open_band"]] = None
    b: Optional[str] = None
    c: Optional[str] = None
    d: Optional[str] = None
    n0: int = Field(1, ge=1)
    name: str = ""

    @field_validator("b", "c", "d", mode="before")
    @classmethod
    def _numbers_as_text(cls, v: Union[str, int, float, None]):
        if v is None or isinstance(v, str):
            return v
        return repr(v) if isinstance(v, float) else str(v)

    @model_validator(mode="after")
    def _preset_or_kind(self):
        if self.preset is None and self.kind is None:
            raise ValueError("event family needs either 'preset' or 'kind'")
        return self

    def to_family(self) -> EventFamily:
        if self.preset is not None:
            return preset_family(self.preset)
        return make_family(self.kind, b=self.b, c=self.c, d=self.d, n0=self.n0, name=self.name)


class ExperimentConfig(BaseModel):
    """Everything that determines a run's primary output."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    seed: Optional[int] = Field(None, ge=0, lt=2**64)
    workers: Optional[int] = Field(None, ge=1)
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    # digits
    frac: Optional[str] = None
    real: Optional[str] = None
    precision_bits: Optional[int] = Field(None, ge=53)

    # measure / zero-one / clt
    family: Optional[EventFamilySpec] = None
    n_from: int = Field(1, ge=1)
    n_to: Optional[int] = Field(None, ge=1)
    horizon: int = Field(10_000, ge=1)
    horizons: List[int] = Field(default_factory=lambda: [1_000, 10_000])
    method: Literal["partial_sum", "integral_test"] = "integral_test"
    epsilon: Optional[float] = Field(None, gt=0)

    # sampling
    n: int = Field(25, ge=1)
    trials: int = Field(1, ge=1)
    mode: Optional[Literal["exact", "gamma_a", "mixture", "float", "luroth"]] = None
    a: Optional[float] = Field(None, ge=0, le=1)
    burn_in: int = Field(0, ge=0)
    stream_format: Literal["text", "binary"] = "text"
    limsup: bool = False
    samples_csv: bool = False
    case: Optional[Literal["A", "B", "C", "D"]] = None
    band_var: Optional[Literal["r", "y", "u"]] = None

    # mixing
    grid_a: int = Field(2001, ge=1000)
    grid_x: int = Field(2001, ge=1000)
    K: int = Field(20, ge=2)
    lags: List[int] = Field(default_factory=lambda: [1])
    profile_points: int = Field(101, ge=2)

    @field_validator("horizons", "lags")
    @classmethod
    def _positive_sorted(cls, v: List[int]) -> List[int]:
        if not v or any(x < 1 for x in v):
            raise ValueError("must be a non-empty list of positive integers")
        return sorted(set(v))

    def with_overrides(self, **updates) -> "ExperimentConfig":
        """Return a re-validated copy with every non-None update applied."""
        data = self.model_dump()
        data.update({k: v for k, v in updates.items() if v is not None})
        return ExperimentConfig.model_validate(data)

    def digest(self) -> str:
        blob = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def load_experiment(path: str) -> ExperimentConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return ExperimentConfig.model_validate(raw)
