"""Verification reports shared by the minmax and majorization checks."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_NOT_MET = "hypothesis-not-met"

CSV_HEADER = "theorem,n,parameters,exact,best_sample,margin,pass,seed,trials"


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if x is None:
        return ""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


@dataclass
class VerificationReport:
    """Outcome of one theorem check.

    ``margin`` is signed so that a non-negative value means the claimed
    inequality held on every sampled candidate; ``status`` is ``pass``,
    ``fail`` or ``hypothesis-not-met``.
    """

    theorem: str
    n: int
    parameters: dict[str, Any]
    exact_value: float
    witness: str
    best_sample: float | None
    trials: int
    seed: int | None
    margin: float
    status: str
    tolerances: dict[str, float] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def csv_row(self) -> str:
        params = ";".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        return ",".join([
            self.theorem, str(self.n), f'"{params}"', fmt(self.exact_value),
            fmt(self.best_sample), fmt(self.margin), "true" if self.passed else "false",
            "" if self.seed is None else str(self.seed), str(self.trials),
        ])
