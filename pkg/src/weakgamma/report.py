"""Bound reports with their inputs, intermediate quantities and comparisons."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any


def _enc(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    if hasattr(x, "item") and callable(x.item):
        return _enc(x.item())
    return x


def _dec(x: Any) -> Any:
    if x in ("inf", "-inf", "nan"):
        return float(x)
    if isinstance(x, dict):
        return {k: _dec(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_dec(v) for v in x]
    return x


def fmt(x: Any) -> str:
    """Twelve significant digits for floats, plain text otherwise."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


@dataclass
class BoundReport:
    """A Poincaré-constant bound together with everything needed to audit it.

    ``value`` may be ``inf``; ``reason`` then names the failed hypothesis.
    ``error`` is the propagated quadrature or Monte Carlo error on ``value``.
    """

    name: str
    value: float
    inputs: dict = field(default_factory=dict)
    intermediates: dict = field(default_factory=dict)
    comparisons: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    reason: str = ""
    error: float = 0.0

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    @property
    def digest(self) -> str:
        blob = json.dumps(_enc(self.inputs), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def dominates(self, cp: float) -> bool:
        """Whether ``value - error >= cp`` (always true for an infinite bound)."""
        return (not self.finite) or self.value - abs(self.error) >= cp

    def to_json(self) -> dict:
        return _enc({"name": self.name, "value": float(self.value), "inputs": self.inputs,
                     "intermediates": self.intermediates, "comparisons": self.comparisons,
                     "flags": list(self.flags), "reason": self.reason,
                     "error": float(self.error), "digest": self.digest})

    @classmethod
    def from_json(cls, obj: dict) -> "BoundReport":
        d = _dec(dict(obj))
        d.pop("digest", None)
        return cls(**d)

    CSV_COLUMNS = ("name", "value", "error", "reason", "flags", "comparisons", "digest")

    def csv_row(self) -> list[str]:
        comps = ";".join(f"{k}={fmt(v)}" for k, v in sorted(self.comparisons.items())
                         if not isinstance(v, (dict, list)))
        return [self.name, fmt(float(self.value)), fmt(float(self.error)), self.reason,
                "|".join(self.flags), comps, self.digest]
