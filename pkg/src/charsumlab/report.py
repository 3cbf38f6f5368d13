"""Verification records and deterministic JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Any

import numpy as np

SCHEMA = 1


@dataclass
class Check:
    """Two independently computed sides of an identity and their agreement."""

    name: str
    lhs: complex
    rhs: complex
    tol: float
    tracked_err: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(complex(self.lhs) - complex(self.rhs))

    @property
    def passed(self) -> bool:
        return self.abs_err <= self.tol

    def row(self) -> dict:
        lhs, rhs = complex(self.lhs), complex(self.rhs)
        return {
            **self.params,
            "lhs_re": lhs.real,
            "lhs_im": lhs.imag,
            "rhs_re": rhs.real,
            "rhs_im": rhs.imag,
            "abs_err": self.abs_err,
            "tol": self.tol,
            "pass": self.passed,
        }


def _fmt_float(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(format(x, ".12g"))


def normalize(obj: Any) -> Any:
    """Round floats to 12 significant digits, turn complex into [re, im]."""
    if is_dataclass(obj) and not isinstance(obj, type):
        obj = asdict(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        return [_fmt_float(obj.real), _fmt_float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return normalize(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA, **normalize(payload)}, indent=1, sort_keys=True) + "\n"


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return format(complex(v), ".12g")
    v = normalize(v)
    return format(v, ".12g") if isinstance(v, float) else v


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _csv_cell(v) for k, v in r.items()})
    return buf.getvalue()
