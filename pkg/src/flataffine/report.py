from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

PASS, FAIL, NOT_APPLICABLE = "pass", "fail", "not-applicable"
EXACT_ZERO = "exact-0"

Residual = Union[float, str, None]


@dataclass
class VerificationReport:
    """One named check and its outcome; the unit of CLI output."""

    check: str
    status: str
    residual: Residual
    tolerance: float | None = None
    samples: int | None = None
    seed: int | None = None
    note: str = ""

    def __post_init__(self):
        if self.status not in (PASS, FAIL, NOT_APPLICABLE):
            raise ValueError(f"bad status {self.status!r}")
        if self.samples and self.seed is None:
            raise ValueError(f"{self.check}: sampled check without a seed")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        d = asdict(self)
        r = d["residual"]
        if isinstance(r, float) and not math.isfinite(r):
            d["residual"] = str(r)
        return d


def exact_report(check: str, residual, note: str = "") -> VerificationReport:
    """Pass iff an exact (rational) residual is identically zero."""
    if residual == 0:
        return VerificationReport(check, PASS, EXACT_ZERO, 0.0, note=note)
    return VerificationReport(check, FAIL, float(residual), 0.0, note=note)


def tolerance_report(check: str, residual: float, tol: float, *, samples=None,
                     seed=None, note: str = "") -> VerificationReport:
    ok = math.isfinite(residual) and residual <= tol
    return VerificationReport(check, PASS if ok else FAIL, float(residual), tol,
                              samples, seed, note)
