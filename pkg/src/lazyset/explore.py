"""Exhaustive enumeration of Simpler-machine schedules.

Two schedule prefixes are merged when they reach the same machine state with
the same partial structure.  A partial structure is written as the ordered
tuple of its event points, so precedence among events (which only compares
endpoints) is preserved exactly while the timestamps of invocations and
reads, which carry no event, are forgotten.

``explore`` additionally uses three reductions that keep the set of reachable
structures unchanged (``explore_naive`` is the unreduced reference):

* an invocation only writes its own registers, so it is fused with the
  process's next step; an invocation never followed by a step contributes no
  point and is dropped;
* line 3.4 reads only ``val`` (never written after allocation) and its own
  registers, so it is fused with the preceding 3.3;
* process names are interchangeable, so a node and its renaming are merged,
  and registers of idle processes are ignored.

Fused steps are charged their full step count against the depth bound.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from . import simpler_machine as sm
from .axiom_checker import Event, ExecutionStructure
from .core import F, Kind

# Points:  ("op", kind, key, chi, proc, gamma_point)  an Add/Rem action
#          ("begin", proc)                            a Contains 3.1
#          ("end", proc, key, chi, gamma_point)       a Contains return
Points = tuple


@dataclass
class ExploreStats:
    nodes: int = 0
    merged: int = 0
    pruned: int = 0
    structures: int = 0


def _activation_points(points: Points) -> list[int]:
    return [i for i, pt in enumerate(points) if pt[0] == "op" and pt[1] is Kind.ADD and pt[3] == 0]


def _extend(points: Points, S: sm.SimplerState, a: sm.SimplerAction) -> Points:
    if a.kind in ("ad", "rm", "fail"):
        kind = Kind.ADD if a.op == "add" else Kind.REM
        g = _activation_points(points)[a.adr - 2] if a.chi == 1 else None
        return points + (("op", kind, a.key, a.chi, a.proc, g),)
    if a.kind == "3.1":
        return points + (("begin", a.proc),)
    if a.kind == "3.5":
        g = None
        if a.chi == 1:
            # the node the scan stopped on is curr in the pre-state
            g = _activation_points(points)[S.reg(a.proc).curr - 2]
        return points + (("end", a.proc, a.key, a.chi, g),)
    return points


def event_count(points: Points) -> int:
    return sum(1 for pt in points if pt[0] in ("op", "end"))


def structure_of(points: Points) -> ExecutionStructure:
    """Complete events only; a Contains is identified by its begin point."""
    events, gamma = [], {}
    open_at: dict[str, int] = {}
    for i, pt in enumerate(points):
        if pt[0] == "op":
            _, kind, key, chi, proc, g = pt
            events.append(Event(i, kind, key, chi, i, i, proc))
            if g is not None:
                gamma[i] = g
        elif pt[0] == "begin":
            open_at[pt[1]] = i
        else:
            _, proc, key, chi, g = pt
            b = open_at.pop(proc)
            events.append(Event(b, Kind.CNT, key, chi, b, i, proc))
            if g is not None:
                gamma[b] = g
    events.sort(key=lambda e: e.id)
    return ExecutionStructure.of(events, gamma)


def choices(S: sm.SimplerState, keys: Sequence[int]) -> Iterator[sm.SimplerAction]:
    for p in S.procs:
        for t in sm.enabled(S, p):
            if t.is_invocation:
                for k in keys:
                    yield replace(t, key=k)
            else:
                yield t


def explore_naive(procs: int = 2, keys: Sequence[int] = (3, 5), depth: int = 12,
            max_events: int = 7, stats: ExploreStats | None = None) -> Iterator[Points]:
    """Yield every distinct partial structure (as points) with at most ``max_events`` events.

    Reachable within ``depth`` steps from the initial state; nodes whose
    structure already exceeds ``max_events`` are not expanded further since
    events never disappear.
    """
    stats = stats if stats is not None else ExploreStats()
    S0 = sm.initial_state([f"p{i + 1}" for i in range(procs)])
    start = (S0, ())
    seen = {start}
    emitted: set[Points] = {()}
    yield ()
    frontier = deque([start])
    for _ in range(depth):
        nxt = deque()
        for S, points in frontier:
            for a in choices(S, keys):
                T, done = sm.apply(S, a)
                pts = _extend(points, S, done)
                node = (T, pts)
                if node in seen:
                    stats.merged += 1
                    continue
                seen.add(node)
                stats.nodes += 1
                if event_count(pts) > max_events:
                    stats.pruned += 1
                    continue
                nxt.append(node)
                if pts not in emitted:
                    emitted.add(pts)
                    stats.structures += 1
                    yield pts
        frontier = nxt


def structure_key(points: Points) -> Points:
    """``points`` without Contains begins that never returned, procs renamed by first use."""
    closed = set()
    open_at = {}
    for i, pt in enumerate(points):
        if pt[0] == "begin":
            open_at[pt[1]] = i
        elif pt[0] == "end":
            closed.add(open_at.pop(pt[1]))
    kept = [pt for i, pt in enumerate(points) if pt[0] != "begin" or i in closed]
    shift, j = {}, 0
    for i, pt in enumerate(points):
        shift[i] = j
        if pt[0] != "begin" or i in closed:
            j += 1
    names: dict[str, str] = {}
    out = []
    for pt in kept:
        if pt[0] == "op":
            _, kind, key, chi, proc, g = pt
            out.append(("op", kind, key, chi, names.setdefault(proc, f"p{len(names) + 1}"),
                        None if g is None else shift[g]))
        elif pt[0] == "begin":
            out.append(("begin", names.setdefault(pt[1], f"p{len(names) + 1}")))
        else:
            _, proc, key, chi, g = pt
            out.append(("end", names.setdefault(proc, f"p{len(names) + 1}"), key, chi,
                        None if g is None else shift[g]))
    return tuple(out)


# Reduced search over tuple-encoded states.  A state is (val, next, regs)
# with regs[p] = (pc, x, curr); between reduced steps pc is one of "0",
# "3.3", "3.5".  Transitions mirror ``simpler_machine.apply``.

_IDLE = ("0", None, None)


def _locate(val, nxt, x):
    a = sm.HEAD
    while val[nxt[a]] < x:
        a = nxt[a]
    return a


def _steps(state, act, keys, fails):
    """(cost, proc, post-state, post-act, new points) for every reduced step of ``state``."""
    val, nxt, regs = state
    for p, (pc, x, curr) in enumerate(regs):
        if pc == "0":
            for k in keys:
                a = _locate(val, nxt, k)
                b = nxt[a]
                if val[b] == k:
                    yield 2, p, state, act, (("op", Kind.ADD, k, 1, p, act[b - 2]),)
                    n2 = nxt[:a] + (nxt[b],) + nxt[a + 1:]
                    yield 2, p, (val, n2, regs), act, (("op", Kind.REM, k, 1, p, act[b - 2]),)
                else:
                    new = len(val)
                    n2 = nxt[:a] + (new,) + nxt[a + 1:] + (b,)
                    yield 2, p, (val + (k,), n2, regs), act + (None,), (("op", Kind.ADD, k, 0, p, None),)
                    yield 2, p, state, act, (("op", Kind.REM, k, 0, p, None),)
                if fails:
                    yield 2, p, state, act, (("op", Kind.ADD, k, F, p, None),)
                    yield 2, p, state, act, (("op", Kind.REM, k, F, p, None),)
                r2 = regs[:p] + (("3.3", k, sm.HEAD),) + regs[p + 1:]
                yield 2, p, (val, nxt, r2), act, (("begin", p),)
        elif pc == "3.3":
            c = nxt[curr]
            r2 = regs[:p] + (("3.5" if val[c] >= x else "3.3", x, c),) + regs[p + 1:]
            yield 2, p, (val, nxt, r2), act, ()
        else:
            chi = 1 if val[curr] == x else 0
            r2 = regs[:p] + (_IDLE,) + regs[p + 1:]
            yield 1, p, (val, nxt, r2), act, (("end", p, x, chi, act[curr - 2] if chi else None),)


def _canonical(regs, points):
    """Rename processes by first appearance in ``points``, then by registers."""
    order: list[int] = []
    for pt in points:
        q = pt[4] if pt[0] == "op" else pt[1]
        if q not in order:
            order.append(q)
            if len(order) == len(regs):
                break
    if len(order) < len(regs):
        order += sorted((q for q in range(len(regs)) if q not in order), key=lambda q: repr(regs[q]))
    if order == sorted(order):
        return regs, points
    perm = {q: i for i, q in enumerate(order)}
    out = []
    for pt in points:
        if pt[0] == "op":
            out.append(pt[:4] + (perm[pt[4]],) + pt[5:])
        else:
            out.append((pt[0], perm[pt[1]]) + pt[2:])
    return tuple(regs[q] for q in order), tuple(out)


def explore(procs: int = 2, keys: Sequence[int] = (3, 5), depth: int = 12,
            max_events: int = 7, stats: ExploreStats | None = None, fails: bool = True) -> Iterator[Points]:
    """Yield every distinct structure key reachable within ``depth`` steps with at most ``max_events`` events.

    Same reachable set as ``explore_naive`` after ``structure_key``, using the
    reductions described in the module docstring.  With ``fails=False`` the
    nondeterministic failure branch is never taken; since a failure step
    leaves the shared state untouched, this yields exactly the structures
    whose failed events have been erased.
    """
    stats = stats if stats is not None else ExploreStats()
    names = [f"p{i + 1}" for i in range(procs)]
    S0 = sm.initial_state(names)
    start = ((S0.val, S0.next, tuple(_IDLE for _ in names)), (), ())
    seen = {(start[0], ())}
    emitted: set[Points] = {()}
    yield ()
    buckets: dict[int, list] = defaultdict(list)
    buckets[0].append(start)
    for used in range(depth + 1):
        for state, act, points in buckets.pop(used, ()):
            for cost, p, (val, nxt, regs), act2, new in _steps(state, act, keys, fails):
                if used + cost > depth:
                    continue
                pts = points
                for pt in new:
                    if pt[0] == "op" and pt[1] is Kind.ADD and pt[3] == 0:
                        act2 = act2[:-1] + (len(pts),)
                    pts = pts + (pt,)
                regs, pts = _canonical(regs, pts)
                node = ((val, nxt, regs), pts)
                if node in seen:
                    stats.merged += 1
                    continue
                seen.add(node)
                stats.nodes += 1
                if event_count(pts) > max_events:
                    stats.pruned += 1
                    continue
                buckets[used + cost].append(((val, nxt, regs), act2, pts))
                key = structure_key(tuple(_named(pt, names) for pt in pts))
                if key not in emitted:
                    emitted.add(key)
                    stats.structures += 1
                    yield key


def _named(pt, names):
    if pt[0] == "op":
        return pt[:4] + (names[pt[4]],) + pt[5:]
    return (pt[0], names[pt[1]]) + pt[2:]
