"""Explicit-state interpreter of the full Lazy Set algorithm.

Program lines are strings.  ADD uses 1.1-1.6, REMOVE 2.1-2.8, CONTAINS
3.1/3.3/3.4/3.5, and the locate procedure L1, L3.1, L3.2, L4, L5 (its
``repeat`` label 2 has no action).  Line 2.5 is split into ``2.5`` (lock
curr) and ``2.5d`` (read ``d := curr.next``) because the lock can block on
its own.

Status is written at the step that decides the outcome: SC failure,
(1.4,0), activation, (2.4,0), physical removal and the Contains return.
The trailing unlock-and-return steps (1.6, 2.8) leave it untouched.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Sequence

from .core import F, Chi, Verdict
from .simpler_machine import HEAD, INF, TAIL, EmptyProcs, NotEnabled, main_branch

LOCATE_LINES = ("L1", "L3.1", "L3.2", "L4", "L5")
ADD_LINES = ("1.1", "1.2", "1.3", "1.4", "1.5", "1.6")
REMOVE_LINES = ("2.1", "2.2", "2.3", "2.4", "2.5", "2.5d", "2.6", "2.7", "2.8")
CONTAINS_LINES = ("3.1", "3.3", "3.4", "3.5")
LINES = ("0",) + ADD_LINES + REMOVE_LINES + CONTAINS_LINES + LOCATE_LINES
FIRST_LINE = {"add": "1.1", "rm": "2.1", "cnt": "3.1"}


class NormalityBroken(AssertionError):
    pass


class Deadlock(RuntimeError):
    pass


@dataclass(frozen=True)
class FullRegs:
    pc: str = "0"
    x: int | None = None
    pred: int = HEAD
    curr: int = TAIL
    entry: int | None = None
    status: Chi | None = None
    caller: str | None = None
    d: int | None = None


@dataclass(frozen=True)
class FullState:
    val: tuple
    next: tuple
    marked: frozenset
    locked: tuple
    procs: tuple[str, ...]
    regs: tuple[FullRegs, ...]

    @property
    def active(self) -> frozenset[int]:
        return frozenset(range(len(self.val)))

    def reg(self, p: str) -> FullRegs:
        return self.regs[self.procs.index(p)]

    def with_reg(self, p: str, **changes) -> "FullState":
        i = self.procs.index(p)
        regs = self.regs[:i] + (replace(self.regs[i], **changes),) + self.regs[i + 1:]
        return replace(self, regs=regs)

    def set_lock(self, a: int, owner: str | None) -> "FullState":
        locked = list(self.locked)
        locked[a] = owner
        return replace(self, locked=tuple(locked))

    def set_next(self, a: int, b: int) -> "FullState":
        nexts = list(self.next)
        nexts[a] = b
        return replace(self, next=tuple(nexts))

    def held_by(self, p: str) -> list[int]:
        return [a for a, owner in enumerate(self.locked) if owner == p]


@dataclass(frozen=True)
class FullAction:
    proc: str
    line: str
    to: str
    kind: str
    op: str
    key: int | None = None
    chi: Chi | None = None
    adr: int | None = None
    id: int | None = None

    @property
    def is_invocation(self) -> bool:
        return self.kind == "invoke"

    @property
    def names(self) -> tuple[str, ...]:
        names = (self.kind, self.line, f"{self.line}>{self.to}")
        return names + (f"invoke_{self.op}",) if self.is_invocation else names

    @property
    def pair(self) -> tuple[str, str]:
        return (self.line, self.to)

    def __str__(self) -> str:
        parts = [self.proc, f"{self.line}>{self.to}", self.kind, self.op]
        for name in ("key", "chi", "adr"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v}")
        return " ".join(parts)


@dataclass
class FullHistory:
    states: list[FullState]
    actions: list[FullAction] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.actions)

    def triples(self):
        for i, a in enumerate(self.actions):
            yield self.states[i], a, self.states[i + 1]


def initial_full_state(procs: Sequence[str]) -> FullState:
    procs = tuple(procs)
    if not procs:
        raise EmptyProcs("at least one process is required")
    if len(set(procs)) != len(procs):
        raise ValueError("process ids must be distinct")
    return FullState((-1, INF), (TAIL, None), frozenset(), (None, None), procs, tuple(FullRegs() for _ in procs))


def _sc(S: FullState, r: FullRegs) -> bool:
    return r.pred not in S.marked and S.next[r.pred] == r.curr


def _step(S: FullState, p: str) -> tuple[FullState, FullAction] | None:
    """The unique non-invocation step of ``p``, or None if it is blocked."""
    r = S.reg(p)
    pc, x = r.pc, r.x
    op = {"1": "add", "2": "rm", "3": "cnt"}.get(pc[0], "add" if r.caller == "add" else "rm")

    def act(to: str, kind: str, T: FullState, **payload) -> tuple[FullState, FullAction]:
        return T.with_reg(p, pc=to), FullAction(p, pc, to, kind, op, x, **payload)

    if pc in ("1.1", "2.1"):
        return act("L1", "locate_call", S.with_reg(p, caller="add" if pc == "1.1" else "remove"))
    if pc == "L1":
        return act("L3.1", "read", S.with_reg(p, curr=HEAD))
    if pc == "L3.1":
        return act("L3.2", "read", S.with_reg(p, pred=r.curr))
    if pc == "L3.2":
        return act("L4", "read", S.with_reg(p, curr=S.next[r.curr]))
    if pc == "L4":
        return act("L5" if S.val[r.curr] >= x else "L3.1", "test", S)
    if pc == "L5":
        return act("1.2" if r.caller == "add" else "2.2", "locate_return", S.with_reg(p, caller=None))
    if pc in ("1.2", "2.2"):
        if S.locked[r.pred] is not None:
            return None
        return act("1.3" if pc == "1.2" else "2.3", "lock", S.set_lock(r.pred, p), adr=r.pred)
    if pc in ("1.3", "2.3"):
        if _sc(S, r):
            return act("1.4" if pc == "1.3" else "2.4", "test", S)
        T = S.set_lock(r.pred, None).with_reg(p, status=F)
        return act("0", "fail_return", T, chi=F)
    if pc == "1.4":
        if S.val[r.curr] == x:
            T = S.set_lock(r.pred, None).with_reg(p, status=1)
            return act("0", "response", T, chi=1, adr=r.curr)
        return act("1.5", "test", S)
    if pc == "1.5":
        a = len(S.val)
        T = replace(S, val=S.val + (x,), next=S.next + (r.curr,), locked=S.locked + (None,))
        T = T.set_next(r.pred, a).with_reg(p, entry=a, status=0)
        return act("1.6", "activation", T, chi=0, adr=a)
    if pc == "1.6":
        return act("0", "response", S.set_lock(r.pred, None), chi=0)
    if pc == "2.4":
        if S.val[r.curr] > x:
            T = S.set_lock(r.pred, None).with_reg(p, status=0)
            return act("0", "response", T, chi=0)
        return act("2.5", "test", S)
    if pc == "2.5":
        if S.locked[r.curr] is not None:
            return None
        return act("2.5d", "lock", S.set_lock(r.curr, p), adr=r.curr)
    if pc == "2.5d":
        return act("2.6", "read", S.with_reg(p, d=S.next[r.curr]))
    if pc == "2.6":
        return act("2.7", "marking", replace(S, marked=S.marked | {r.curr}), adr=r.curr)
    if pc == "2.7":
        if r.d != S.next[r.curr]:
            raise NormalityBroken(f"{p}: d={r.d} but curr.next={S.next[r.curr]} under curr's lock")
        T = S.set_next(r.pred, r.d).with_reg(p, status=1)
        return act("2.8", "physical_removal", T, chi=1, adr=r.curr)
    if pc == "2.8":
        T = S.set_lock(r.curr, None).set_lock(r.pred, None)
        return act("0", "response", T, chi=1, adr=r.curr)
    if pc == "3.1":
        return act("3.3", "read", S.with_reg(p, curr=HEAD))
    if pc == "3.3":
        return act("3.4", "read", S.with_reg(p, curr=S.next[r.curr]))
    if pc == "3.4":
        return act("3.5" if S.val[r.curr] >= x else "3.3", "test", S)
    if pc == "3.5":
        chi = 1 if S.val[r.curr] == x else 0
        return act("0", "response", S.with_reg(p, status=chi), chi=chi)
    raise NotEnabled(f"{p} at unknown line {pc!r}")


def enabled_full(S: FullState, p: str) -> list[FullAction]:
    r = S.reg(p)
    if r.pc == "0":
        return [FullAction(p, "0", FIRST_LINE[op], "invoke", op) for op in ("add", "rm", "cnt")]
    step = _step(S, p)
    return [] if step is None else [step[1]]


def apply_full(S: FullState, a: FullAction, check: bool = False) -> tuple[FullState, FullAction]:
    r = S.reg(a.proc)
    if r.pc != a.line:
        raise NotEnabled(f"{a.proc} is at line {r.pc}, not {a.line}")
    if a.is_invocation:
        if not (isinstance(a.key, int) and a.key >= 0):
            raise NotEnabled(f"invocation needs a natural-number key, got {a.key!r}")
        T = S.with_reg(a.proc, pc=FIRST_LINE[a.op], x=a.key, status=None, caller=None, d=None)
        done = a
    else:
        step = _step(S, a.proc)
        if step is None:
            raise NotEnabled(f"{a.proc} is blocked at line {r.pc}")
        T, done = step
    if done.to == "0" and T.held_by(a.proc):
        raise NormalityBroken(f"{a.proc} returned while holding locks {T.held_by(a.proc)}")
    if check:
        verdict = check_ns(T)
        if not verdict:
            raise NormalityBroken(f"after {done}: {verdict}")
    return T, replace(done, id=a.id)


def _ns1(S: FullState) -> list[tuple[str, object, str]]:
    bad = []
    n = len(S.val)
    if n < 2 or S.val[HEAD] != -1 or S.val[TAIL] != INF:
        bad.append(("NS1a", HEAD, "Head/Tail inactive or with wrong values"))
        return bad
    for a in range(2, n):
        v = S.val[a]
        if not (isinstance(v, int) and v >= 0):
            bad.append(("NS1b", a, f"value {v!r} is not a natural number"))
    if S.next[TAIL] is not None:
        bad.append(("NS1b", TAIL, "Tail has a successor"))
    for a in range(n):
        if a == TAIL:
            continue
        b = S.next[a]
        if b is None or not 0 <= b < n:
            bad.append(("NS1b", a, "next of an active address is not active"))
        elif not S.val[a] < S.val[b]:
            bad.append(("NS1b", a, f"values do not increase along next to {b}"))
    for p, r in zip(S.procs, S.regs):
        for name in ("pred", "curr"):
            v = getattr(r, name)
            if not (isinstance(v, int) and 0 <= v < n):
                bad.append(("NS1c", p, f"{name} is not active"))
    if not bad:
        # every active address reaches Tail without revisiting a node
        done = {TAIL}
        for a in range(n):
            seen = []
            b = a
            while b not in done:
                if b in seen:
                    bad.append(("NS1d", a, "cycle in the next relation"))
                    break
                seen.append(b)
                b = S.next[b]
            done.update(seen)
    return bad


def _ns2(S: FullState, branch: set[int]) -> list[tuple[str, object, str]]:
    bad = []
    n = len(S.val)
    for a in range(n):
        if a not in branch and a not in S.marked:
            bad.append(("NS2", a, "active address is neither on the main branch nor marked"))
    for a in S.marked:
        if not 0 <= a < n:
            bad.append(("NS2", a, "marked address is not active"))
    return bad


def _between(lo, x, hi, strict_hi: bool = False) -> bool:
    return lo < x and (x < hi if strict_hi else x <= hi)


def _ns_proc(S: FullState, p: str, r: FullRegs) -> list[tuple[str, object, str]]:
    bad = []
    pc, x = r.pc, r.x
    vp, vc = S.val[r.pred], S.val[r.curr]

    def need(clause: str, ok: bool, what: str) -> None:
        if not ok:
            bad.append((clause, p, f"at line {pc}: {what}"))

    if pc == "L3.1":
        need("NS3a", vc < x, "val(curr) < x")
    elif pc == "L3.2":
        need("NS3b", r.pred == r.curr and vp < x, "pred = curr and val(pred) < x")
    elif pc == "L4":
        need("NS3c", vp < vc and vp < x, "val(pred) < val(curr) and val(pred) < x")
    elif pc == "L5":
        need("NS3d", _between(vp, x, vc), "val(pred) < x <= val(curr)")
    if pc in ("1.2", "1.3", "1.4"):
        need("NS4a", _between(vp, x, vc), "val(pred) < x <= val(curr)")
    if pc == "1.5":
        need("NS4a", _between(vp, x, vc, strict_hi=True), "val(pred) < x < val(curr)")
    if pc in ("1.3", "1.4", "1.5", "1.6"):
        need("NS4b", S.locked[r.pred] == p, "pred locked to p")
    if pc in ("1.4", "1.5"):
        need("NS4c", r.pred not in S.marked and S.next[r.pred] == r.curr, "pred unmarked and next(pred) = curr")
    if pc in ("2.2", "2.3", "2.4"):
        need("NS5a", _between(vp, x, vc), "val(pred) < x <= val(curr)")
    if pc in ("2.5", "2.5d", "2.6", "2.7", "2.8"):
        need("NS5b", vp < x == vc, "val(pred) < x = val(curr)")
    if pc in ("2.3", "2.4", "2.5", "2.5d", "2.6", "2.7", "2.8"):
        need("NS5c", S.locked[r.pred] == p, "pred locked to p")
    if pc in ("2.5d", "2.6", "2.7", "2.8"):
        need("NS5c", S.locked[r.curr] == p, "curr locked to p")
    if pc in ("2.4", "2.5", "2.5d", "2.6", "2.7", "2.8"):
        need("NS5d", r.pred not in S.marked, "pred unmarked")
    if pc in ("2.4", "2.5", "2.5d", "2.6", "2.7"):
        need("NS5d", S.next[r.pred] == r.curr, "next(pred) = curr")
    if pc == "2.7":
        need("NS5e", r.curr in S.marked, "curr marked")
    return bad


def check_ns(S: FullState) -> Verdict:
    """Evaluate NS1-NS5 clause by clause; a reject lists every violation."""
    bad = _ns1(S)
    if not bad:
        bad += _ns2(S, set(main_branch(S)))
        for p, r in zip(S.procs, S.regs):
            bad += _ns_proc(S, p, r)
    if bad:
        clauses = sorted({c for c, _, _ in bad})
        verdict = Verdict.reject(",".join(clauses), bad[0][1], "; ".join(f"{c}({w}): {m}" for c, w, m in bad))
        verdict.details["violations"] = bad
        return verdict
    return Verdict.accept()


def debug_ns() -> bool:
    return os.environ.get("LAZYSET_DEBUG_NS", "") not in ("", "0")


def run_full(scheduler, bound: int, check: bool | None = None, sample: int = 64) -> FullHistory:
    """Run up to ``bound`` steps.  Blocked processes are skipped.

    NS1-NS5 are asserted on every state when ``check`` is true (default: the
    ``LAZYSET_DEBUG_NS`` environment variable), otherwise every ``sample``-th
    state and the last one.
    """
    if check is None:
        check = debug_ns()
    S = initial_full_state(scheduler.procs)
    H = FullHistory([S])
    for step in range(bound):
        options = {p: enabled_full(S, p) for p in S.procs}
        if not any(options.values()):
            raise Deadlock(f"no process can move at step {step}")
        choice = scheduler.pick(S, options)
        if choice is None:
            break
        S, done = apply_full(S, replace(choice, id=step), check=check or (step + 1) % sample == 0)
        H.actions.append(done)
        H.states.append(S)
    if not check:
        verdict = check_ns(S)
        if not verdict:
            raise NormalityBroken(f"final state: {verdict}")
    return H


def replay_full(procs: Sequence[str], actions, check: bool = False) -> FullHistory:
    """Rebuild a history from recorded actions, checking every recorded field."""
    S = initial_full_state(procs)
    H = FullHistory([S])
    for n, a in enumerate(actions):
        T, done = apply_full(S, a, check=check)
        if done != a:
            raise ValueError(f"action {n} ({a}) disagrees with the machine, which produced ({done})")
        H.actions.append(done)
        H.states.append(T)
        S = T
    return H
