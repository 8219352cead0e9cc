"""Audit outcome records and canonical JSON serialization.

Reports are written with sorted keys and fixed ``%.17g`` float formatting so
that identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class Certificate:
    """Outcome of a Monte Carlo or deterministic audit."""

    name: str
    seed: int
    samples: int
    worst_residual: float
    extremes: dict
    passed: bool
    tolerance: float
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seed": int(self.seed),
            "samples": int(self.samples),
            "worst_residual": float(self.worst_residual),
            "extremes": self.extremes,
            "pass": bool(self.passed),
            "tolerance": float(self.tolerance),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(
            name=d["name"],
            seed=d["seed"],
            samples=d["samples"],
            worst_residual=d["worst_residual"],
            extremes=d.get("extremes", {}),
            passed=d["pass"],
            tolerance=d["tolerance"],
            meta=d.get("meta", {}),
        )

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: samples={self.samples} "
            f"worst={self.worst_residual:.3e} tol={self.tolerance:.3e}"
        )


def merge_extremes(acc: dict, new: dict) -> dict:
    """Merge min/max/count statistics of two partial audits (in order)."""
    out = dict(acc)
    for key, val in new.items():
        if key not in out:
            out[key] = val
        elif key.startswith("min"):
            out[key] = min(out[key], val)
        elif key.startswith("max"):
            out[key] = max(out[key], val)
        elif key.startswith("count") or key.endswith("count") or key.endswith("skips"):
            out[key] = out[key] + val
        else:
            out[key] = val
    return out


def _canon(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int,)):
        return repr(int(obj))
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float in report: {obj!r}")
        return "%.17g" % obj
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: kv[0])
        return "{" + ",".join(f"{json.dumps(str(k))}:{_canon(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in obj) + "]"
    # numpy scalars / arrays
    import numpy as np

    if isinstance(obj, np.integer):
        return repr(int(obj))
    if isinstance(obj, np.floating):
        return _canon(float(obj))
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    raise TypeError(f"cannot canonicalize {type(obj)!r}")


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, %.17g floats, trailing newline."""
    return _canon(obj) + "\n"


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(obj))
