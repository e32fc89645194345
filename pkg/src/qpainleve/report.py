"""Structured verification results with deterministic JSON output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath as mp

# Digits used when rendering floating values; fixed so reruns are byte-identical.
FLOAT_DIGITS = 20


def jsonable(value: Any) -> Any:
    """Convert scalars, partitions and containers into plain JSON data."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return mp.nstr(mp.mpf(value), FLOAT_DIGITS)
    if isinstance(value, mp.mpf):
        return mp.nstr(value, FLOAT_DIGITS)
    if isinstance(value, mp.mpc):
        return [mp.nstr(value.real, FLOAT_DIGITS), mp.nstr(value.imag, FLOAT_DIGITS)]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "to_json_data"):
        return value.to_json_data()
    raise TypeError(f"cannot serialise {type(value).__name__}")


@dataclass
class Report:
    """Outcome of one identity check.

    ``witness`` carries whatever makes the verdict reproducible: a residual,
    the offending tuple of a failure, or counts for a sweep.
    """

    identity: str
    params: dict = field(default_factory=dict)
    mode: str = "float"
    passed: bool = True
    witness: Any = None

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "params": jsonable(self.params),
            "mode": self.mode,
            "pass": bool(self.passed),
            "witness": jsonable(self.witness),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def merge(identity: str, reports: list[Report], params: dict | None = None) -> Report:
    """Fold many reports into one; the first failure becomes the witness."""
    failures = [r for r in reports if not r.passed]
    modes = sorted({r.mode for r in reports}) or ["exact"]
    witness: dict = {"checked": len(reports), "failed": len(failures)}
    if failures:
        witness["first_failure"] = failures[0].to_dict()
    residuals = [r.witness.get("residual") for r in reports
                 if isinstance(r.witness, dict) and r.witness.get("residual") is not None]
    if residuals:
        witness["max_residual"] = max(residuals)
    return Report(identity, params or {}, "+".join(modes), not failures, witness)


def dump_reports(reports: list[Report]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=1)
