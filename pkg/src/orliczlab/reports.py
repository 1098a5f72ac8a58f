"""Verification reports and their deterministic serialization.

A report records one checked inequality: both sides, the margin it was
required to hold with, itemized slack terms, and a three-valued status.
FAIL and INCONCLUSIVE are distinct outcomes and are never merged.

Serialized reports are byte-reproducible: keys are sorted and anything
time-dependent (runtimes, wall-clock stamps) goes to a sidecar file next to
the main report.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

__all__ = ["PASS", "FAIL", "INCONCLUSIVE_STATUS", "VerificationReport", "write_report_file", "jsonable"]

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE_STATUS = "INCONCLUSIVE"


@dataclass
class VerificationReport:
    check_id: str
    statement: str
    lhs: float
    rhs: float
    margin: float
    status: str
    relation: str = ">="
    slack: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    @classmethod
    def from_sides(
        cls,
        check_id: str,
        statement: str,
        lhs: float,
        rhs: float,
        margin: float,
        relation: str = ">=",
        slack: Optional[dict] = None,
        details: Optional[dict] = None,
        inconclusive: bool = False,
    ) -> "VerificationReport":
        if inconclusive:
            status = INCONCLUSIVE_STATUS
        elif relation == ">=":
            status = PASS if lhs >= rhs - margin else FAIL
        elif relation == "<=":
            status = PASS if lhs <= rhs + margin else FAIL
        elif relation == "==":
            status = PASS if abs(lhs - rhs) <= margin else FAIL
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return cls(
            check_id=check_id,
            statement=statement,
            lhs=lhs,
            rhs=rhs,
            margin=margin,
            status=status,
            relation=relation,
            slack=dict(slack or {}),
            details=dict(details or {}),
        )

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "check_id": self.check_id,
            "statement": self.statement,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "relation": self.relation,
            "status": self.status,
            "slack": self.slack,
            "details": self.details,
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        if obj != obj:
            return "nan"
        if obj == float("inf"):
            return "inf"
        if obj == float("-inf"):
            return "-inf"
        return obj
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        try:
            return _jsonable(obj.item())
        except Exception:
            return str(obj)
    return obj


jsonable = _jsonable


def write_report_file(path: str | Path, payload: dict, runtimes: Optional[dict] = None) -> Path:
    """Write a deterministic report plus a timing sidecar.

    The main file carries only reproducible content; the sidecar
    ``<path>.meta.json`` holds the timestamp and any runtimes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    meta = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S"), "runtimes": runtimes or {}}
    sidecar.write_text(json.dumps(_jsonable(meta), sort_keys=True, indent=2) + "\n")
    return path
