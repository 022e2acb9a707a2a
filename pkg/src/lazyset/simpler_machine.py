"""Explicit-state interpreter of the Simpler Lazy Set algorithm.

Addresses are ints.  ``HEAD = 0`` and ``TAIL = 1``; every other active
address was allocated by an activation as ``max(active) + 1``, so the active
set is always ``range(len(state.val))`` and addresses are never reused.

AD and RM are single atomic actions; only CONTAINS is micro-stepped
(lines 3.1, 3.3, 3.4, 3.5 -- line 3.2 is the ``repeat`` label and has no
action of its own).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .axiom_checker import Event, ExecutionStructure
from .core import F, Chi, Kind, Verdict

HEAD, TAIL = 0, 1
INF = math.inf

INVOKE = {"add": "invoke_add", "rm": "invoke_rm", "cnt": "invoke_cnt"}
FIRST_LINE = {"add": "1", "rm": "2", "cnt": "3.1"}
CONTAINS_LINES = ("3.1", "3.3", "3.4", "3.5")
PCS = ("0", "1", "2") + CONTAINS_LINES


class EmptyProcs(ValueError):
    pass


class NotEnabled(RuntimeError):
    pass


class IncompleteHistory(ValueError):
    pass


@dataclass(frozen=True)
class Regs:
    pc: str = "0"
    x: int | None = None
    curr: int | None = None
    status: Chi | None = None


@dataclass(frozen=True)
class SimplerState:
    val: tuple
    next: tuple
    procs: tuple[str, ...]
    regs: tuple[Regs, ...]

    @property
    def active(self) -> frozenset[int]:
        return frozenset(range(len(self.val)))

    def reg(self, p: str) -> Regs:
        return self.regs[self.procs.index(p)]

    def with_reg(self, p: str, **changes) -> "SimplerState":
        i = self.procs.index(p)
        regs = self.regs[:i] + (replace(self.regs[i], **changes),) + self.regs[i + 1:]
        return replace(self, regs=regs)


@dataclass(frozen=True)
class SimplerAction:
    proc: str
    kind: str
    op: str
    key: int | None = None
    chi: Chi | None = None
    adr: int | None = None
    id: int | None = None

    @property
    def is_invocation(self) -> bool:
        return self.kind.startswith("invoke_")

    @property
    def names(self) -> tuple[str, ...]:
        return (self.kind,)

    def __str__(self) -> str:
        parts = [self.proc, self.kind, self.op]
        for name in ("key", "chi", "adr"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v}")
        return " ".join(parts)


@dataclass
class SimplerHistory:
    states: list[SimplerState]
    actions: list[SimplerAction] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    def triples(self):
        for i, a in enumerate(self.actions):
            yield self.states[i], a, self.states[i + 1]

    @property
    def activation(self) -> dict[int, int]:
        """address -> index of the AD action with status 0 that activated it."""
        return {a.adr: i for i, a in enumerate(self.actions) if a.kind == "ad" and a.chi == 0}


def initial_state(procs: Sequence[str]) -> SimplerState:
    procs = tuple(procs)
    if not procs:
        raise EmptyProcs("at least one process is required")
    if len(set(procs)) != len(procs):
        raise ValueError("process ids must be distinct")
    return SimplerState((-1, INF), (TAIL, None), procs, tuple(Regs() for _ in procs))


def main_branch(S) -> list[int]:
    path = [HEAD]
    seen = {HEAD}
    a = HEAD
    while a != TAIL:
        a = S.next[a]
        if a is None or a in seen or not 0 <= a < len(S.val):
            break
        seen.add(a)
        path.append(a)
    return path


def is_removed(S, a: int) -> bool:
    return 0 <= a < len(S.val) and a not in main_branch(S)


def path_to_tail(S, a: int) -> list[int]:
    path = [a]
    while a != TAIL:
        a = S.next[a]
        path.append(a)
    return path


def _is_natural(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


def is_normal(S) -> Verdict:
    n = len(S.val)
    if n < 2 or S.val[HEAD] != -1 or S.val[TAIL] != INF:
        return Verdict.reject("normal-1", HEAD, "Head and Tail must be active with values -1 and inf")
    for a in range(2, n):
        if not _is_natural(S.val[a]):
            return Verdict.reject("normal-1", a, f"value {S.val[a]!r} is not a natural number")
    for a in range(n):
        if a == TAIL:
            continue
        b = S.next[a]
        if b is None or not 0 <= b < n:
            return Verdict.reject("normal-2", a, "next of an active address is not active")
        if not S.val[a] < S.val[b]:
            return Verdict.reject("normal-2", a, "values do not increase along next", b)
    for p, r in zip(S.procs, S.regs):
        if r.curr is not None and not 0 <= r.curr < n:
            return Verdict.reject("normal-regs", p, "curr is not an active address")
    return Verdict.accept()


def enabled(S: SimplerState, p: str) -> list[SimplerAction]:
    r = S.reg(p)
    if r.pc == "0":
        return [SimplerAction(p, INVOKE[op], op) for op in ("add", "rm", "cnt")]
    if r.pc == "1":
        return [SimplerAction(p, "ad", "add", r.x), SimplerAction(p, "fail", "add", r.x)]
    if r.pc == "2":
        return [SimplerAction(p, "rm", "rm", r.x), SimplerAction(p, "fail", "rm", r.x)]
    return [SimplerAction(p, r.pc, "cnt", r.x)]


def _locate(S, x: int) -> int:
    """The main-branch address p with val(p) < x <= val(next(p))."""
    a = HEAD
    while S.val[S.next[a]] < x:
        a = S.next[a]
    return a


def apply(S: SimplerState, a: SimplerAction) -> tuple[SimplerState, SimplerAction]:
    """Execute ``a``; return the post-state and ``a`` with chi/adr filled in."""
    r = S.reg(a.proc)
    if a.kind not in {t.kind for t in enabled(S, a.proc)}:
        raise NotEnabled(f"{a.kind} is not enabled for {a.proc} at line {r.pc}")
    if a.is_invocation:
        if not _is_natural(a.key):
            raise NotEnabled(f"invocation needs a natural-number key, got {a.key!r}")
        op = a.kind[len("invoke_"):]
        return S.with_reg(a.proc, pc=FIRST_LINE[op], x=a.key, curr=None, status=None), replace(a, op=op)
    x = r.x
    a = replace(a, key=x)
    if a.kind == "fail":
        return S.with_reg(a.proc, pc="0", status=F), replace(a, chi=F)
    if a.kind == "ad":
        p = _locate(S, x)
        nxt = S.next[p]
        if S.val[nxt] == x:
            return S.with_reg(a.proc, pc="0", status=1), replace(a, chi=1, adr=nxt)
        new = len(S.val)
        nexts = list(S.next)
        nexts[p] = new
        T = replace(S, val=S.val + (x,), next=tuple(nexts) + (nxt,))
        return T.with_reg(a.proc, pc="0", status=0), replace(a, chi=0, adr=new)
    if a.kind == "rm":
        p = _locate(S, x)
        cu = S.next[p]
        if S.val[cu] != x:
            return S.with_reg(a.proc, pc="0", status=0), replace(a, chi=0)
        nexts = list(S.next)
        nexts[p] = S.next[cu]
        T = replace(S, next=tuple(nexts))
        return T.with_reg(a.proc, pc="0", status=1), replace(a, chi=1, adr=cu)
    if a.kind == "3.1":
        return S.with_reg(a.proc, pc="3.3", curr=HEAD), a
    if a.kind == "3.3":
        return S.with_reg(a.proc, pc="3.4", curr=S.next[r.curr]), a
    if a.kind == "3.4":
        return S.with_reg(a.proc, pc="3.5" if S.val[r.curr] >= x else "3.3"), a
    if a.kind == "3.5":
        chi = 1 if S.val[r.curr] == x else 0
        return S.with_reg(a.proc, pc="0", curr=None, status=chi), replace(a, chi=chi)
    raise NotEnabled(f"unknown action kind {a.kind!r}")


def run(scheduler, bound: int, check_normal: bool = True) -> SimplerHistory:
    """Run up to ``bound`` steps under ``scheduler``; deterministic per scheduler."""
    S = initial_state(scheduler.procs)
    H = SimplerHistory([S])
    for step in range(bound):
        options = {p: enabled(S, p) for p in S.procs}
        choice = scheduler.pick(S, options)
        if choice is None:
            break
        S, done = apply(S, choice)
        if check_normal:
            verdict = is_normal(S)
            if not verdict:
                raise AssertionError(f"state {step + 1} is not normal: {verdict}")
        H.actions.append(replace(done, id=step))
        H.states.append(S)
    return H


def contains_spans(H: SimplerHistory, strict: bool = False) -> list[tuple[int, int]]:
    """(index of 3.1, index of 3.5) for every complete Contains execution."""
    open_at: dict[str, int] = {}
    spans = []
    for i, a in enumerate(H.actions):
        if a.kind == "3.1":
            open_at[a.proc] = i
        elif a.kind == "3.5":
            spans.append((open_at.pop(a.proc), i))
    if strict and open_at:
        raise IncompleteHistory(f"Contains by {sorted(open_at)} has begun but not returned")
    return sorted(spans)


def build_structure(H: SimplerHistory, strict: bool = False) -> ExecutionStructure:
    """Turn a history into an ExecutionStructure.

    Event ids and timestamps are action indices in ``H``; a Contains event is
    identified by the index of its 3.1 action.
    """
    activation = H.activation
    events: list[Event] = []
    gamma: dict[int, int] = {}
    for i, a in enumerate(H.actions):
        if a.kind in ("ad", "rm", "fail"):
            kind = Kind.ADD if a.op == "add" else Kind.REM
            events.append(Event(i, kind, a.key, a.chi, i, i, a.proc))
            if a.chi == 1:
                gamma[i] = activation[a.adr]
    for begin, end in contains_spans(H, strict):
        ret = H.actions[end]
        events.append(Event(begin, Kind.CNT, ret.key, ret.chi, begin, end, ret.proc))
        if ret.chi == 1:
            # the node the scan stopped on, read from the pre-state of the return
            gamma[begin] = activation[H.states[end].reg(ret.proc).curr]
    events.sort(key=lambda e: e.id)
    return ExecutionStructure.of(events, gamma)


def pseudo_path(H: SimplerHistory, begin: int) -> list[tuple[int, int]]:
    """Successive values of curr in the Contains execution whose 3.1 is at ``begin``.

    Each entry is ``(address, index of the action that set it)``; the state
    read is the pre-state of that action.
    """
    first = H.actions[begin]
    if first.kind != "3.1":
        raise ValueError(f"action {begin} is not a Contains start")
    p, x = first.proc, first.key
    path = [(HEAD, begin)]
    for i in range(begin + 1, len(H.actions)):
        a = H.actions[i]
        if a.proc != p:
            continue
        if a.kind == "3.3":
            path.append((H.states[i + 1].reg(p).curr, i))
        elif a.kind == "3.5":
            break
    else:
        raise IncompleteHistory(f"Contains starting at {begin} did not return")
    vals = [H.states[i].val[adr] for adr, i in path]
    if any(not u < v for u, v in zip(vals, vals[1:])):
        raise AssertionError(f"pseudo-path values do not increase: {vals}")
    if not (len(vals) >= 2 and vals[-2] < x <= vals[-1]):
        raise AssertionError(f"pseudo-path does not bracket {x}: {vals}")
    return path


def replay(procs: Sequence[str], actions: Iterable[SimplerAction]) -> SimplerHistory:
    """Rebuild a history from recorded actions, checking the recorded chi/adr."""
    S = initial_state(procs)
    H = SimplerHistory([S])
    for n, a in enumerate(actions):
        T, done = apply(S, replace(a, chi=None, adr=None) if not a.is_invocation else a)
        if (a.chi, a.adr) != (None, None) and (done.chi, done.adr) != (a.chi, a.adr):
            raise ValueError(f"action {n} ({a}) disagrees with the machine: got chi={done.chi} adr={done.adr}")
        H.actions.append(replace(done, id=a.id if a.id is not None else n))
        H.states.append(T)
        S = T
    return H
