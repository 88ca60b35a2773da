"""Run configuration: flat ``key = value`` files, environment overrides, defaults."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

ENV_MEMORY_BUDGET = "SHIFTCONV_MEMORY_BUDGET"
ENV_WORKERS = "SHIFTCONV_WORKERS"

DEFAULT_MEMORY_BUDGET = 4 * 1024**3


def parse_bytes(text: str) -> int:
    text = text.strip().lower()
    units = {"k": 1024, "m": 1024**2, "g": 1024**3}
    if text and text[-1] in units:
        return int(float(text[:-1]) * units[text[-1]])
    return int(float(text))


def default_memory_budget() -> int:
    """Memory budget in bytes, honouring ``SHIFTCONV_MEMORY_BUDGET``."""
    raw = os.environ.get(ENV_MEMORY_BUDGET)
    return parse_bytes(raw) if raw else DEFAULT_MEMORY_BUDGET


def default_workers() -> int:
    raw = os.environ.get(ENV_WORKERS)
    return max(1, int(raw)) if raw else 1


@dataclass
class RunConfig:
    memory_budget: int = field(default_factory=default_memory_budget)
    workers: int = field(default_factory=default_workers)
    output_format: str = "csv"
    # per-module tolerances
    theta_tol: float = 1e-12
    eisenstein_tol: float = 1e-8
    decomposition_tol: float = 1e-3
    special_tol: float = 1e-10
    kloosterman_c_max: int = 10**6
    # default X grid for `sums run`: log10 bounds and density
    grid_start: float = 1e5
    grid_stop: float = 1e7
    grid_per_decade: int = 16

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.output_format!r}")
        for f in dataclasses.fields(self):
            if f.name.endswith("_tol") and not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")

    @classmethod
    def from_file(cls, path, **overrides) -> RunConfig:
        """Read a flat ``key = value`` file; ``overrides`` (e.g. CLI flags) win."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(types[key], raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _coerce(type_name, raw: str):
    if type_name in ("int", int):
        return parse_bytes(raw)
    if type_name in ("float", float):
        return float(raw)
    return raw
