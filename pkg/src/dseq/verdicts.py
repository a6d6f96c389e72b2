"""Three-valued verdicts for asymptotic questions answered at finite truncation.

No finite computation decides convergence, so membership and limit questions
never return booleans.  A :class:`Verdict` is Holds / Fails / Inconclusive
with an auditable payload: Fails always carries a concrete witness, Holds for
limit questions carries a :class:`LimitEstimate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .scalars import to_float_scalar


class State(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class LimitEstimate:
    """Estimated ϑ-limit with stabilization metadata."""

    value: object
    epsilon: float
    n0: int
    residual: float

    def to_record(self) -> dict:
        v = to_float_scalar(self.value)
        val = v.real if v.imag == 0 else [v.real, v.imag]
        return {"value": val, "epsilon": self.epsilon, "n0": self.n0, "residual": self.residual}


@dataclass(frozen=True)
class DetectParams:
    """Tolerance and stabilization-window settings for the detection protocols.

    epsilon: tolerance for residuals; window: minimum number of stabilized
    corner depths required beyond the detected stabilization index; n0: index
    from which asymptotic behaviour is assessed (first row/column excluded by
    default, matching the interior projection).
    """

    epsilon: float = 1e-9
    window: int = 3
    n0: int = 1

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.n0 < 0:
            raise ValueError("n0 must be >= 0")

    def to_record(self) -> dict:
        return {"epsilon": self.epsilon, "window": self.window, "n0": self.n0}


@dataclass(frozen=True)
class Verdict:
    state: State
    witness: Optional[dict] = None
    estimate: Optional[LimitEstimate] = None
    reason: str = ""
    question: str = ""

    def __post_init__(self):
        if self.state is State.FAILS and self.witness is None:
            raise ValueError("Fails verdicts must carry a witness")

    @property
    def holds(self) -> bool:
        return self.state is State.HOLDS

    @property
    def fails(self) -> bool:
        return self.state is State.FAILS

    @property
    def decisive(self) -> bool:
        return self.state is not State.INCONCLUSIVE

    def named(self, question: str) -> "Verdict":
        return Verdict(self.state, self.witness, self.estimate, self.reason, question)

    def to_record(self) -> dict:
        rec = {"question": self.question, "state": self.state.value}
        if self.witness is not None:
            rec["witness"] = _jsonable(self.witness)
        if self.estimate is not None:
            rec["estimate"] = self.estimate.to_record()
        if self.reason:
            rec["reason"] = self.reason
        return rec


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    if isinstance(obj, complex):
        return obj.real if obj.imag == 0 else [obj.real, obj.imag]
    try:
        return _jsonable(to_float_scalar(obj))
    except (TypeError, ValueError):
        return repr(obj)


def holds(estimate: Optional[LimitEstimate] = None, reason: str = "", witness=None) -> Verdict:
    return Verdict(State.HOLDS, witness, estimate, reason)


def fails(witness: dict, reason: str = "") -> Verdict:
    return Verdict(State.FAILS, witness, None, reason)


def inconclusive(reason: str) -> Verdict:
    return Verdict(State.INCONCLUSIVE, None, None, reason)


def conjoin(parts: dict, question: str = "") -> Verdict:
    """All-of combinator: Fails dominates, then Inconclusive, else Holds."""
    for name, v in parts.items():
        if v.fails:
            witness = dict(v.witness or {})
            witness.setdefault("component", name)
            return Verdict(State.FAILS, witness, None, v.reason, question)
    pending = [name for name, v in parts.items() if not v.decisive]
    if pending:
        return Verdict(
            State.INCONCLUSIVE, None, None,
            "inconclusive components: " + ", ".join(str(p) for p in pending), question,
        )
    estimate = next((v.estimate for v in parts.values() if v.estimate is not None), None)
    return Verdict(State.HOLDS, None, estimate, "", question)
