"""JSON ingestion and CSV result tables.

Input objects (``schema_version`` 1)::

    space   = {"weights": [...]}
    measure = {"density": [...]}
    family  = {"type": "exponential" | "balanced_linear",
               "statistics": [[...], ...],
               "domain": {"lo": [...], "hi": [...]}}

Tables are written as CSV with ``#``-prefixed metadata lines, a header row
and doubles printed with 17 significant digits.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IGeoError
from .measures import FiniteMeasure, SampleSpace
from .submanifolds import ParametricFamily, balanced_linear_build, expfam_build

SCHEMA_VERSION = 1


class ConfigError(IGeoError, ValueError):
    """Malformed or missing configuration entries."""


def _require(obj, key, ctx):
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError(f"{ctx}: missing required key {key!r}")
    return obj[key]


def _vector(value, ctx) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{ctx}: expected a list of numbers") from exc
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{ctx}: expected a non-empty list of finite numbers")
    return arr


def check_schema_version(config: dict) -> None:
    version = config.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}")


def load_space(obj) -> SampleSpace:
    return SampleSpace(_vector(_require(obj, "weights", "space"), "space.weights"))


def load_measure(obj, space: SampleSpace) -> FiniteMeasure:
    return FiniteMeasure(space, _vector(_require(obj, "density", "measure"), "measure.density"))


def load_family(obj, space: SampleSpace) -> ParametricFamily:
    kind = _require(obj, "type", "family")
    stats = _require(obj, "statistics", "family")
    try:
        eta = np.atleast_2d(np.asarray(stats, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ConfigError("family.statistics must be a list of numeric lists") from exc
    lo = hi = None
    if "domain" in obj:
        lo = _vector(_require(obj["domain"], "lo", "family.domain"), "family.domain.lo")
        hi = _vector(_require(obj["domain"], "hi", "family.domain.hi"), "family.domain.hi")
    if kind == "exponential":
        return expfam_build(space, eta, lo, hi)
    if kind == "balanced_linear":
        return balanced_linear_build(space, eta, lo, hi)
    raise ConfigError(f"unknown family type {kind!r}")


def read_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    check_schema_version(config)
    return config


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name):
        idx = self.columns.index(name)
        return [r[idx] for r in self.rows]

    def to_csv(self) -> str:
        lines = []
        for key in sorted(self.metadata):
            text = json.dumps(self.metadata[key], sort_keys=True, separators=(",", ":"))
            lines.append(f"# {key}: {text}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_number(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def read_csv_metadata(text: str) -> dict:
    """Parse the ``# key: value`` block of a table written by :meth:`ResultTable.to_csv`."""
    meta = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        meta[key] = json.loads(value)
    return meta
