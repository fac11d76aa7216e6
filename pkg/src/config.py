"""Configuration and shared defaults."""

__version__ = "0.3.1"

import os
import sys
from dataclasses import dataclass, field

from dotenv import load_dotenv

load_dotenv()

_stderr_print = lambda *a, **kw: print(*a, **kw, file=sys.stderr)

# Schema tag written at the top of every CSV file
CSV_SCHEMA_TAG = "# cf-limits-lab v1"


def _env_int(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        _stderr_print(f"Invalid {name}={raw!r}, falling back to {default}")
        return default
    if value < minimum:
        _stderr_print(f"{name}={value} below minimum {minimum}, falling back to {default}")
        return default
    return value


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        _stderr_print(f"Invalid {name}={raw!r}, falling back to {default}")
        return default
    if not value > 0:
        _stderr_print(f"{name} must be positive, falling back to {default}")
        return default
    return value


CONFIG = {
    "output_dir": os.getenv("CF_LAB_OUTPUT_DIR", "results").strip() or "results",
    "workers": _env_int("CF_LAB_WORKERS", 1, minimum=1),
    "seed": _env_int("CF_LAB_SEED", 20240521),
    # Longest trajectory the big-integer chain accepts in one request
    "exact_cap": _env_int("CF_LAB_EXACT_CAP", 200_000, minimum=1),
    "epsilon": _env_float("CF_LAB_EPSILON", 0.01),
    # mpmath working precision for float-mode digits: base + per_digit * n bits
    "float_base_bits": 64,
    "float_bits_per_digit": 5,
}


# ── Typed config ────────────────────────────────────────────


@dataclass
class SamplerConfig:
    exact_cap: int = 200_000
    float_base_bits: int = 64
    float_bits_per_digit: int = 5

    def float_precision(self, n: int) -> int:
        """mpmath precision (bits) used to extract n digits in float mode."""
        return self.float_base_bits + self.float_bits_per_digit * n


@dataclass
class RunConfig:
    output_dir: str = "results"
    workers: int = 1
    seed: int = 20240521
    epsilon: float = 0.01


@dataclass
class AppConfig:
    """Typed configuration built from the environment."""

    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @classmethod
    def from_env(cls) -> "AppConfig":
        """Create AppConfig from environment variables."""
        return cls(
            sampler=SamplerConfig(
                exact_cap=CONFIG["exact_cap"],
                float_base_bits=CONFIG["float_base_bits"],
                float_bits_per_digit=CONFIG["float_bits_per_digit"],
            ),
            run=RunConfig(
                output_dir=CONFIG["output_dir"],
                workers=CONFIG["workers"],
                seed=CONFIG["seed"],
                epsilon=CONFIG["epsilon"],
            ),
        )
