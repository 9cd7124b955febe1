from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

VERIFIED = "verified"
PRECONDITION_FAILED = "precondition-failed"
REFUTED = "refuted"


def jsonable(x: Any) -> Any:
    """Convert report payloads into JSON-native values.

    Rationals become "a/b" strings, claim sets become canonically sorted lists
    of ``[question, answer]`` pairs and tuples become lists.
    """
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, frozenset):
        return [jsonable(c) for c in sorted(x)]
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else "|".join(map(str, k)): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return x.to_dict()
    return str(x)


@dataclass(frozen=True)
class Precondition:
    label: str
    holds: bool
    witness: Any = None

    def to_dict(self) -> dict:
        return {"label": self.label, "holds": self.holds, "witness": jsonable(self.witness)}


@dataclass(frozen=True)
class Conclusion:
    holds: bool
    lhs: Any = None
    rhs: Any = None
    margin: Any = None

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "lhs": jsonable(self.lhs),
            "rhs": jsonable(self.rhs),
            "margin": jsonable(self.margin),
        }


@dataclass(frozen=True)
class CheckReport:
    name: str
    preconditions: tuple[Precondition, ...] = ()
    conclusion: Conclusion | None = None
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if not all(p.holds for p in self.preconditions):
            return PRECONDITION_FAILED
        if self.conclusion is None or not self.conclusion.holds:
            return REFUTED
        return VERIFIED

    @property
    def ok(self) -> bool:
        return self.verdict == VERIFIED

    def failed(self) -> list[str]:
        return [p.label for p in self.preconditions if not p.holds]

    def holds_except(self, *labels: str) -> bool:
        """True when every precondition outside ``labels`` holds."""
        return all(p.holds for p in self.preconditions if not any(p.label.startswith(l) for l in labels))

    def precondition(self, prefix: str) -> Precondition:
        for p in self.preconditions:
            if p.label.startswith(prefix):
                return p
        raise KeyError(prefix)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "preconditions": [p.to_dict() for p in self.preconditions],
            "conclusion": None if self.conclusion is None else self.conclusion.to_dict(),
            "verdict": self.verdict,
            "details": jsonable(self.details),
        }

    def text(self) -> str:
        lines = [f"{self.name}: {self.verdict}"]
        for p in self.preconditions:
            mark = "ok " if p.holds else "FAIL"
            extra = "" if p.holds or p.witness is None else f"  witness={jsonable(p.witness)}"
            lines.append(f"  [{mark}] {p.label}{extra}")
        if self.conclusion is not None:
            c = self.conclusion
            lines.append(
                f"  conclusion holds={c.holds} lhs={jsonable(c.lhs)} rhs={jsonable(c.rhs)} margin={jsonable(c.margin)}"
            )
        for k, v in self.details.items():
            lines.append(f"  {k}: {jsonable(v)}")
        return "\n".join(lines)


def simple_check(name: str, holds: bool, witness: Any = None, **details) -> CheckReport:
    """A property check with no hypotheses: the conclusion is the property."""
    return CheckReport(name, (), Conclusion(holds, witness, None, None), dict(details))
