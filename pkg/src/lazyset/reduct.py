"""Projection of full-algorithm histories onto the Simpler algorithm.

``project_state`` keeps the graph (active/next/val) and the x/status
registers, maps the program line through ``pi`` and keeps ``curr`` only
inside Contains (lines 3.3-3.5), where the Simpler machine defines it.
Marks, locks, pred, entry and d are forgotten.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import simpler_machine as sm
from .core import Verdict
from .lazy_machine import LINES, FullAction, FullHistory, FullState

CURR_LINES = ("3.3", "3.4", "3.5")


class ProjectionMismatch(AssertionError):
    pass


def pi(line: str, caller: str | None = None) -> str:
    """Image of a full-algorithm line; locate lines go to 1 or 2 by caller."""
    if line == "0" or line in ("1.6", "2.8"):
        return "0"
    if line.startswith("L"):
        if caller not in ("add", "remove"):
            raise ValueError(f"locate line {line} needs a caller, got {caller!r}")
        return "1" if caller == "add" else "2"
    if line.startswith("1."):
        return "1"
    if line.startswith("2."):
        return "2"
    if line.startswith("3."):
        return line
    raise ValueError(f"unknown line {line!r}")


LINE_MAP = {(line, caller): pi(line, caller) for line in LINES
            for caller in (("add", "remove") if line.startswith("L") else (None,))}


def project_state(S: FullState) -> sm.SimplerState:
    regs = []
    for r in S.regs:
        pc = pi(r.pc, r.caller)
        regs.append(sm.Regs(pc, r.x, r.curr if pc in CURR_LINES else None, r.status))
    return sm.SimplerState(S.val, S.next, S.procs, tuple(regs))


def classify(a: FullAction) -> sm.SimplerAction | None:
    """The Simpler action a full step reduces to, or None for a stutter."""
    if a.is_invocation:
        return sm.SimplerAction(a.proc, sm.INVOKE[a.op], a.op, a.key, id=a.id)
    pair = a.pair
    if pair == ("1.5", "1.6"):
        return sm.SimplerAction(a.proc, "ad", "add", a.key, 0, a.adr, a.id)
    if pair == ("1.4", "0"):
        return sm.SimplerAction(a.proc, "ad", "add", a.key, 1, a.adr, a.id)
    if pair == ("2.7", "2.8"):
        return sm.SimplerAction(a.proc, "rm", "rm", a.key, 1, a.adr, a.id)
    if pair == ("2.4", "0"):
        return sm.SimplerAction(a.proc, "rm", "rm", a.key, 0, None, a.id)
    if pair in (("1.3", "0"), ("2.3", "0")):
        return sm.SimplerAction(a.proc, "fail", a.op, a.key, a.chi, None, a.id)
    if a.line in sm.CONTAINS_LINES:
        return sm.SimplerAction(a.proc, a.line, "cnt", a.key, a.chi, None, a.id)
    return None


@dataclass
class ProjectedHistory:
    states: list[sm.SimplerState]
    steps: list[sm.SimplerAction | None] = field(default_factory=list)
    source: list[FullAction] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def log(self) -> list[str]:
        """Per-step classification: ``stutter`` or the Simpler action kind."""
        out = []
        for i, (a, step) in enumerate(zip(self.source, self.steps)):
            label = "stutter" if step is None else step.kind
            out.append(f"{i} {a.proc} {a.line}>{a.to} {label}")
        return out


def project_history(H: FullHistory) -> ProjectedHistory:
    P = ProjectedHistory([project_state(S) for S in H.states])
    for i, a in enumerate(H.actions):
        step = classify(a)
        if step is None and P.states[i] != P.states[i + 1]:
            raise ProjectionMismatch(f"step {i} ({a}) should stutter but the projected states differ")
        P.steps.append(step)
        P.source.append(a)
    return P


def validate_reduct(P: ProjectedHistory) -> Verdict:
    """Replay each non-stuttering step through the Simpler machine."""
    if not P.states:
        return Verdict.accept()
    if P.states[0] != sm.initial_state(P.states[0].procs):
        return Verdict.reject("reduct", 0, "first projected state is not the Simpler initial state")
    for i, step in enumerate(P.steps):
        S, T = P.states[i], P.states[i + 1]
        if step is None:
            if S != T:
                return Verdict.reject("reduct", i, "stuttering step changes the projected state")
            continue
        try:
            got, done = sm.apply(S, replace(step, chi=None, adr=None) if not step.is_invocation else step)
        except sm.NotEnabled as exc:
            return Verdict.reject("reduct", i, f"{step} is not a Simpler step here: {exc}")
        if got != T:
            return Verdict.reject("reduct", i, f"{step} does not lead to the next projected state")
        if not step.is_invocation and (done.chi, done.adr) != (step.chi, step.adr):
            return Verdict.reject("reduct", i, f"{step} disagrees with the Simpler outcome chi={done.chi} adr={done.adr}")
    return Verdict.accept()


def destutter(P: ProjectedHistory) -> sm.SimplerHistory:
    """Drop stuttering steps, giving a plain Simpler history."""
    H = sm.SimplerHistory([P.states[0]] if P.states else [])
    for i, step in enumerate(P.steps):
        if step is not None:
            H.actions.append(step)
            H.states.append(P.states[i + 1])
    return H
