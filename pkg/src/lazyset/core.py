"""Vocabulary shared by every module: event kinds, status values, verdicts."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Union

F = "f"
"""Status of a failed Add/Rem operation."""

Chi = Union[int, str]
CHI_VALUES = (0, 1, F)


class Kind(str, enum.Enum):
    ADD = "Add"
    REM = "Rem"
    CNT = "Cnt"

    def __str__(self) -> str:
        return self.value


def parse_chi(token: str) -> Chi:
    if token == F:
        return F
    if token in ("0", "1"):
        return int(token)
    raise ValueError(f"bad status value {token!r}")


def valid_chi(kind: Kind, chi: Chi) -> bool:
    if kind is Kind.CNT:
        return chi in (0, 1)
    return chi in CHI_VALUES


@dataclass
class Verdict:
    """Outcome of a check. Truthy iff the check accepted.

    ``axiom`` names the violated clause, ``index`` the first offending
    position or event id, ``witnesses`` any further events involved.
    """

    ok: bool
    axiom: str | None = None
    index: Any = None
    reason: str = ""
    witnesses: tuple = ()
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def accept(cls, **details: Any) -> "Verdict":
        return cls(True, details=details)

    @classmethod
    def reject(cls, axiom: str | None, index: Any, reason: str, *witnesses: Any) -> "Verdict":
        return cls(False, axiom=axiom, index=index, reason=reason, witnesses=tuple(witnesses))

    def __str__(self) -> str:
        if self.ok:
            return "accept"
        head = f"reject[{self.axiom}]" if self.axiom else "reject"
        return f"{head} at {self.index}: {self.reason}"


class InvariantBroken(AssertionError):
    """An invariant the theory guarantees did not hold; signals a bug."""
