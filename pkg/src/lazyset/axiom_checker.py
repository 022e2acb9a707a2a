"""Non-linear Lazy Set axioms A0-A2 and the constructive linearizer.

An :class:`ExecutionStructure` holds Add/Rem events as single actions
(``begin == end``) and Cnt events as intervals of actions.  Precedence is
``X < Y iff end(X) < begin(Y)``.

The axiom checks are indexed per key so that the stress histories (tens of
thousands of events) check in seconds; the quadratic definitions are kept as
the ordering-property probes and in the test-suite oracles.

Linearization topologically sorts ``<`` together with the ``⇒`` relation.
Interval precedence is encoded with one auxiliary node per timestamp
(``X -> time(next after end X) -> ... -> time(begin Y) -> Y``), which keeps
the graph linear in size while preserving reachability exactly.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right, insort
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Iterator

from .core import F, Chi, Kind, Verdict
from .linear_spec import EventRecord, check_functional_mode

LOW, HIGH = "low", "high"


@dataclass(frozen=True)
class Event:
    id: int
    kind: Kind
    key: int
    chi: Chi
    begin: float
    end: float
    proc: Hashable = None
    level: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if not self.level:
            object.__setattr__(self, "level", HIGH if self.kind is Kind.CNT else LOW)

    @property
    def ts(self) -> float:
        return self.begin

    def is_(self, kind: Kind, chi: Chi) -> bool:
        return self.kind is kind and self.chi == chi

    def __str__(self) -> str:
        if self.kind is Kind.CNT:
            span = f"[{self.begin},{self.end}]"
        else:
            span = f"@{self.begin}"
        return f"#{self.id} {self.kind}{self.chi}({self.key}){span}"


@dataclass
class ExecutionStructure:
    events: dict[int, Event] = field(default_factory=dict)
    gamma: dict[int, int] = field(default_factory=dict)

    @classmethod
    def of(cls, events: Iterable[Event], gamma: dict[int, int] | None = None) -> "ExecutionStructure":
        return cls({e.id: e for e in events}, dict(gamma or {}))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events.values())

    @property
    def actions(self) -> list[float]:
        stamps: set[float] = set()
        for e in self:
            stamps.add(e.begin)
            stamps.add(e.end)
        return sorted(stamps)

    def precedes(self, x: int, y: int) -> bool:
        return self.events[x].end < self.events[y].begin

    def copy(self) -> "ExecutionStructure":
        return ExecutionStructure(dict(self.events), dict(self.gamma))

    def with_event(self, event: Event) -> "ExecutionStructure":
        m = self.copy()
        m.events[event.id] = event
        return m

    def update(self, event_id: int, **changes) -> "ExecutionStructure":
        return self.with_event(replace(self.events[event_id], **changes))

    def without_failed(self) -> "ExecutionStructure":
        return ExecutionStructure({i: e for i, e in self.events.items() if e.chi != F}, dict(self.gamma))


class MissingGamma(ValueError):
    def __init__(self, event: Event):
        self.event = event
        super().__init__(f"gamma undefined on Op1 event {event}")


class CycleError(ValueError):
    def __init__(self, cycle: list[tuple[int, str]]):
        self.cycle = cycle
        super().__init__("precedence together with => has a cycle: " + format_cycle(cycle))


def check_a0(M: ExecutionStructure) -> Verdict:
    stamps: Counter = Counter()
    for e in M:
        if not isinstance(e.kind, Kind):
            return Verdict.reject("A0", e.id, "unknown event kind", e)
        if e.chi not in (0, 1, F):
            return Verdict.reject("A0", e.id, f"status {e.chi!r} out of range", e)
        if e.kind is Kind.CNT:
            if e.level != HIGH:
                return Verdict.reject("A0", e.id, "Cnt events must be high-level", e)
            if not e.begin < e.end:
                return Verdict.reject("A0", e.id, "Cnt event needs Begin < End", e)
            stamps[e.begin] += 1
            stamps[e.end] += 1
        else:
            if e.level != LOW:
                return Verdict.reject("A0", e.id, f"{e.kind} events must be actions", e)
            if e.begin != e.end:
                return Verdict.reject("A0", e.id, f"{e.kind} event needs Begin = End", e)
            stamps[e.begin] += 1
    clashes = sorted(t for t, n in stamps.items() if n > 1)
    if clashes:
        t = clashes[0]
        owners = [e.id for e in M if t in (e.begin, e.end)]
        return Verdict.reject("A0", owners[0], f"actions share timestamp {t}; actions must be linearly ordered", *owners[1:])
    return Verdict.accept()


def _rem1_stamps(M: ExecutionStructure) -> dict[int, list[tuple[float, int]]]:
    """gamma target -> sorted (timestamp, id) of Rem1 events pointing at it."""
    by_target: dict[int, list[tuple[float, int]]] = defaultdict(list)
    for e in M:
        if e.is_(Kind.REM, 1) and e.id in M.gamma:
            by_target[M.gamma[e.id]].append((e.ts, e.id))
    for lst in by_target.values():
        lst.sort()
    return by_target


def check_a1(M: ExecutionStructure) -> Verdict:
    """Every Op1 event A has a same-key Add0 gamma(A) < End(A), not removed before A.

    Raises MissingGamma when gamma is undefined on an Op1 event.
    """
    rem1 = _rem1_stamps(M)
    for A in sorted((e for e in M if e.chi == 1), key=lambda e: (e.end, e.id)):
        if A.id not in M.gamma:
            raise MissingGamma(A)
        g = M.events.get(M.gamma[A.id])
        if g is None or not g.is_(Kind.ADD, 0):
            return Verdict.reject("A1", A.id, "gamma(A) is not an Add0 event", M.gamma[A.id])
        if g.key != A.key:
            return Verdict.reject("A1", A.id, "gamma(A) has a different key", g.id)
        if not g.ts < A.end:
            return Verdict.reject("A1", A.id, "gamma(A) < End(A) fails", g.id)
        removals = rem1.get(g.id, [])
        j = bisect_right(removals, (g.ts, float("inf")))
        if j < len(removals) and removals[j][0] < A.begin:
            return Verdict.reject("A1", A.id, "a Rem1 R with gamma(R) = gamma(A) lies between gamma(A) and A", g.id, removals[j][1])
    return Verdict.accept()


def check_a2(M: ExecutionStructure) -> Verdict:
    """An Add0 A preceding a same-key Op0 B is removed by some R < End(B)."""
    inf = float("inf")
    first_rem = {g: lst[0][0] for g, lst in _rem1_stamps(M).items()}
    adds: dict[int, list[Event]] = defaultdict(list)
    for e in M:
        if e.is_(Kind.ADD, 0):
            adds[e.key].append(e)
    # prefix maxima of the first removal time, in Add timestamp order
    prefix: dict[int, tuple[list[float], list[tuple[float, int]]]] = {}
    for key, lst in adds.items():
        lst.sort(key=lambda e: e.ts)
        stamps, best = [], []
        worst = (-inf, -1)
        for a in lst:
            fr = first_rem.get(a.id, inf)
            if fr > worst[0]:
                worst = (fr, a.id)
            stamps.append(a.ts)
            best.append(worst)
        prefix[key] = (stamps, best)
    for B in sorted((e for e in M if e.chi == 0), key=lambda e: (e.end, e.id)):
        if B.key not in prefix:
            continue
        stamps, best = prefix[B.key]
        k = bisect_left(stamps, B.begin)
        if k == 0:
            continue
        fr, a = best[k - 1]
        if not fr < B.end:
            return Verdict.reject("A2", B.id, "Op0 event B follows an Add0 A with no removal R < End(B)", a)
    return Verdict.accept()


def check_axioms(M: ExecutionStructure) -> Verdict:
    """A0, A1, A2 in order; the first failure wins."""
    for check in (check_a0, check_a1, check_a2):
        try:
            verdict = check(M)
        except MissingGamma as exc:
            return Verdict.reject("MissingGamma", exc.event.id, str(exc))
        if not verdict:
            return verdict
    return Verdict.accept()


@dataclass
class ArrowRelation:
    pairs: set[tuple[int, int]] = field(default_factory=set)
    tags: dict[tuple[int, int], str] = field(default_factory=dict)

    def add(self, x: int, y: int, tag: str) -> None:
        self.pairs.add((x, y))
        self.tags[(x, y)] = tag

    def __contains__(self, pair: tuple[int, int]) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))


def _by_key(M: ExecutionStructure, kind: Kind, chi: Chi) -> dict[int, list[Event]]:
    out: dict[int, list[Event]] = defaultdict(list)
    for e in M:
        if e.is_(kind, chi):
            out[e.key].append(e)
    return out


def build_arrow(M: ExecutionStructure) -> ArrowRelation:
    """The full => relation, every pair, by its four defining cases."""
    arrow = ArrowRelation()
    ev = M.events
    rem1 = _by_key(M, Kind.REM, 1)
    add0 = _by_key(M, Kind.ADD, 0)
    for C in M:
        if C.is_(Kind.CNT, 1) and C.id in M.gamma:
            g = M.gamma[C.id]
            arrow.add(g, C.id, "E5")
            for R in M:
                if R.is_(Kind.REM, 1) and M.gamma.get(R.id) == g:
                    arrow.add(C.id, R.id, "E6")
        elif C.is_(Kind.CNT, 0):
            for R in rem1.get(C.key, []):
                g = M.gamma.get(R.id)
                if g in ev and not C.end < R.begin and ev[g].end < C.begin:
                    arrow.add(R.id, C.id, "E7")
            for A in add0.get(C.key, []):
                if not A.end < C.begin:
                    arrow.add(C.id, A.id, "E8")
    return arrow


def reduced_arrow(M: ExecutionStructure) -> ArrowRelation:
    """A subset of => whose union with < has the same transitive closure.

    Among the Add/Rem events related to one Cnt by a single case, all but the
    extreme one are reachable from (or reach) it through precedence, so only
    the extreme pair is kept.
    """
    arrow = ArrowRelation()
    ev = M.events
    rem1_by_gamma = _rem1_stamps(M)
    adds = {k: sorted((a.ts, a.id) for a in lst) for k, lst in _by_key(M, Kind.ADD, 0).items()}
    rems: dict[int, list[tuple[float, float, int]]] = defaultdict(list)
    for R in M:
        if R.is_(Kind.REM, 1) and M.gamma.get(R.id) in ev:
            rems[R.key].append((ev[M.gamma[R.id]].end, R.ts, R.id))
    cnt0: dict[int, list[Event]] = defaultdict(list)
    for C in M:
        if C.is_(Kind.CNT, 1) and C.id in M.gamma:
            g = M.gamma[C.id]
            arrow.add(g, C.id, "E5")
            if rem1_by_gamma.get(g):
                arrow.add(C.id, rem1_by_gamma[g][0][1], "E6")
        elif C.is_(Kind.CNT, 0):
            cnt0[C.key].append(C)
            lst = adds.get(C.key, [])
            j = bisect_right(lst, (C.begin, float("inf")))
            if j < len(lst):
                arrow.add(C.id, lst[j][1], "E8")
    for key, cs in cnt0.items():
        rs = sorted(rems.get(key, []))
        cs.sort(key=lambda c: c.begin)
        live: list[tuple[float, int]] = []
        i = 0
        for C in cs:
            while i < len(rs) and rs[i][0] < C.begin:
                insort(live, (rs[i][1], rs[i][2]))
                i += 1
            j = bisect_left(live, (C.end, -1))
            # R < End(C) is the same as "C does not precede R" for an action R
            if j > 0:
                arrow.add(live[j - 1][1], C.id, "E7")
    return arrow


class _Graph:
    """Events plus one node per timestamp; node ids are ints."""

    def __init__(self, M: ExecutionStructure, arrow: ArrowRelation):
        self.ids = list(M.events)
        index = {eid: n for n, eid in enumerate(self.ids)}
        self.n_events = len(self.ids)
        stamps = M.actions
        self.size = self.n_events + len(stamps)
        where = {t: self.n_events + k for k, t in enumerate(stamps)}
        succ: list[list[tuple[int, str]]] = [[] for _ in range(self.size)]
        for k in range(len(stamps) - 1):
            succ[self.n_events + k].append((self.n_events + k + 1, "<"))
        for n, eid in enumerate(self.ids):
            e = M.events[eid]
            k = bisect_right(stamps, e.end)
            if k < len(stamps):
                succ[n].append((self.n_events + k, "<"))
            succ[where[e.begin]].append((n, "<"))
        for (x, y) in sorted(arrow.pairs):
            if x in index and y in index:
                succ[index[x]].append((index[y], arrow.tags.get((x, y), "=>")))
        self.succ = succ

    def find_cycle(self) -> list[tuple[int, str]] | None:
        WHITE, GREY, BLACK = 0, 1, 2
        color = [WHITE] * self.size
        for root in range(self.size):
            if color[root] != WHITE:
                continue
            stack = [(root, iter(self.succ[root]))]
            path: list[tuple[int, str]] = []
            color[root] = GREY
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt, tag in it:
                    if color[nxt] == GREY:
                        path.append((node, tag))
                        start = next(i for i, (v, _) in enumerate(path) if v == nxt)
                        return self._events_only(path[start:])
                    if color[nxt] == WHITE:
                        color[nxt] = GREY
                        path.append((node, tag))
                        stack.append((nxt, iter(self.succ[nxt])))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()
                    if path:
                        path.pop()
        return None

    def _events_only(self, cycle: list[tuple[int, str]]) -> list[tuple[int, str]]:
        # rotate so it starts at an event, then fold time-node runs into "<"
        first = next(i for i, (v, _) in enumerate(cycle) if v < self.n_events)
        cycle = cycle[first:] + cycle[:first]
        out: list[tuple[int, str]] = []
        for v, tag in cycle:
            if v < self.n_events:
                out.append((self.ids[v], tag))
        return out


def detect_cycle(M: ExecutionStructure, arrow: ArrowRelation | None = None) -> list[tuple[int, str]] | None:
    """Return a directed cycle of (< union =>) as ``[(event, tag of outgoing edge), ...]``."""
    if arrow is None:
        arrow = reduced_arrow(M)
    return _Graph(M, arrow).find_cycle()


def format_cycle(cycle: list[tuple[int, str]]) -> str:
    return " ".join(f"#{v} {tag}" for v, tag in cycle) + (f" #{cycle[0][0]}" if cycle else "")


@dataclass
class Linearization:
    order: list[int]
    records: list[EventRecord]
    gamma: dict[int, int]
    checked: Verdict

    @property
    def position(self) -> dict[int, int]:
        return {eid: i for i, eid in enumerate(self.order)}

    def lines(self, M: ExecutionStructure) -> list[str]:
        out = []
        for i, eid in enumerate(self.order):
            e = M.events[eid]
            out.append(f"{i} {eid} {e.kind} {e.key} {e.chi}")
        return out


def replay(M: ExecutionStructure, order: list[int]) -> tuple[list[EventRecord], dict[int, int]]:
    """Map a total order of events to a linear sequence and a positional gamma."""
    pos = {eid: i for i, eid in enumerate(order)}
    recs = []
    gamma = {}
    for i, eid in enumerate(order):
        e = M.events[eid]
        recs.append(EventRecord(i, e.kind, e.key, e.chi, e.proc))
        if e.chi == 1 and M.gamma.get(eid) in pos:
            gamma[i] = pos[M.gamma[eid]]
    return recs, gamma


def linearize(M: ExecutionStructure, arrow: ArrowRelation | None = None) -> Linearization:
    """Topologically extend (< union =>) and replay it through FS0-FS2.

    Ties among minimal events go to the lowest begin timestamp, then lowest id.
    """
    if arrow is None:
        arrow = reduced_arrow(M)
    graph = _Graph(M, arrow)
    indeg = [0] * graph.size
    for succs in graph.succ:
        for v, _ in succs:
            indeg[v] += 1
    ready_events: list[tuple[float, int, int]] = []
    ready_times = []
    for v in range(graph.size):
        if indeg[v] == 0:
            (ready_times if v >= graph.n_events else ready_events).append(v)
    ready_events = [(M.events[graph.ids[v]].begin, graph.ids[v], v) for v in ready_events]
    heapq.heapify(ready_events)
    order: list[int] = []

    def release(v: int) -> None:
        for w, _ in graph.succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                if w >= graph.n_events:
                    ready_times.append(w)
                else:
                    eid = graph.ids[w]
                    heapq.heappush(ready_events, (M.events[eid].begin, eid, w))

    while True:
        while ready_times:
            release(ready_times.pop())
        if not ready_events:
            break
        _, eid, v = heapq.heappop(ready_events)
        order.append(eid)
        release(v)
    if len(order) != graph.n_events:
        raise CycleError(graph.find_cycle() or [])
    recs, gamma = replay(M, order)
    return Linearization(order, recs, gamma, check_functional_mode(recs, gamma))


def extends_precedence(M: ExecutionStructure, order: list[int]) -> bool:
    pos = {eid: i for i, eid in enumerate(order)}
    evs = list(M)
    return all(pos[x.id] < pos[y.id] for x in evs for y in evs if x.end < y.begin)


def extends_arrow(arrow: ArrowRelation, order: list[int]) -> bool:
    pos = {eid: i for i, eid in enumerate(order)}
    return all(pos[x] < pos[y] for x, y in arrow.pairs)


# Property probes: direct evaluation of each ordering property, for small structures.

def lemma_l1(M: ExecutionStructure) -> Verdict:
    for Z in M:
        if Z.kind in (Kind.ADD, Kind.REM) and Z.chi == 1:
            g = M.events[M.gamma[Z.id]]
            if not g.end < Z.begin:
                return Verdict.reject("L1", Z.id, "gamma(Z) < Z fails", g.id)
    return Verdict.accept()


def lemma_l23(M: ExecutionStructure) -> Verdict:
    for x in M:
        if x.chi != 1:
            continue
        g = M.events[M.gamma[x.id]]
        for y in M:
            if y.chi == 0 and y.key == x.key and g.end < y.begin and y.end < x.begin:
                return Verdict.reject("L2.3", x.id, "Op0 event between gamma(x) and x", y.id)
    return Verdict.accept()


def lemma_l24(M: ExecutionStructure, arrow: ArrowRelation) -> Verdict:
    for x, y in arrow.pairs:
        if not M.events[x].begin < M.events[y].end:
            return Verdict.reject("L2.4", x, "X => Y but Y < X", y)
    return Verdict.accept()


def lemma_l25(M: ExecutionStructure, arrow: ArrowRelation) -> Verdict:
    succ: dict[int, list[int]] = defaultdict(list)
    for x, y in arrow.pairs:
        succ[x].append(y)
    ev = M.events
    for x, ys in succ.items():
        X = ev[x]
        for y in ys:
            for z in succ.get(y, []):
                Y, Z = ev[y], ev[z]
                if X.kind is Kind.ADD:
                    ok = X.end < Z.begin and Y.is_(Kind.CNT, 1) and Z.is_(Kind.REM, 1)
                elif X.kind is Kind.REM:
                    ok = X.end < Z.begin
                else:
                    ok = X.begin < Z.end
                if not ok:
                    return Verdict.reject("L2.5", x, f"chain {x} => {y} => {z} breaks the lemma", y, z)
    return Verdict.accept()


ARROW_KINDS = {
    "E5": ((Kind.ADD, 0), (Kind.CNT, 1)),
    "E6": ((Kind.CNT, 1), (Kind.REM, 1)),
    "E7": ((Kind.REM, 1), (Kind.CNT, 0)),
    "E8": ((Kind.CNT, 0), (Kind.ADD, 0)),
}
