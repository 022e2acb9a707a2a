"""Brute-force linearizability check for small execution structures.

Independent of the axiom path: it never looks at gamma and accepts an order
iff the state table folds without a violation.  Linear extensions of
precedence over the non-failed events are enumerated by backtracking, and
the set state is folded as each event is placed so dead prefixes are cut
early.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .axiom_checker import ExecutionStructure
from .core import F
from .linear_spec import EventRecord, TableViolation, step_state


class TooLarge(ValueError):
    pass


@dataclass
class OracleVerdict:
    linearizable: bool
    witness: list[int] | None = None
    explored: int = 0
    witnesses: list[list[int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.linearizable


def brute_force(M: ExecutionStructure, cap: int = 8, all_witnesses: bool = False) -> OracleVerdict:
    """Search the linear extensions of precedence for one the state table accepts.

    ``explored`` counts search nodes (placements tried).  With
    ``all_witnesses`` the search continues and collects every valid order.
    """
    evs = sorted((e for e in M if e.chi != F), key=lambda e: (e.begin, e.id))
    if len(evs) > cap:
        raise TooLarge(f"{len(evs)} non-failed events exceed the cap of {cap}")
    n = len(evs)
    before = [[j for j in range(n) if evs[j].end < evs[i].begin] for i in range(n)]
    recs = [EventRecord(i, e.kind, e.key, e.chi, e.proc) for i, e in enumerate(evs)]
    placed = [False] * n
    order: list[int] = []
    verdict = OracleVerdict(False)

    def search(D: frozenset) -> bool:
        if len(order) == n:
            found = [evs[i].id for i in order]
            if verdict.witness is None:
                verdict.witness = found
            verdict.witnesses.append(found)
            return not all_witnesses
        for i in range(n):
            if placed[i] or not all(placed[j] for j in before[i]):
                continue
            verdict.explored += 1
            try:
                D2 = step_state(D, recs[i])
            except TableViolation:
                continue
            placed[i] = True
            order.append(i)
            stop = search(D2)
            order.pop()
            placed[i] = False
            if stop:
                return True
        return False

    search(frozenset())
    verdict.linearizable = verdict.witness is not None
    return verdict


def restrict_order(M: ExecutionStructure, order: list[int]) -> list[int]:
    """Drop failed events from an order over all events."""
    return [eid for eid in order if M.events[eid].chi != F]


def accepts_order(M: ExecutionStructure, order: list[int]) -> bool:
    """Whether ``order`` is one of the orders ``brute_force`` would accept.

    That is, a permutation of the non-failed events extending precedence
    whose state-table fold succeeds.  Failed events in ``order`` are dropped.
    """
    order = restrict_order(M, order)
    live = sorted(e.id for e in M if e.chi != F)
    if sorted(order) != live:
        return False
    pos = {eid: i for i, eid in enumerate(order)}
    evs = [M.events[i] for i in live]
    if any(x.end < y.begin and pos[x.id] > pos[y.id] for x in evs for y in evs):
        return False
    D: frozenset = frozenset()
    for i, eid in enumerate(order):
        e = M.events[eid]
        try:
            D = step_state(D, EventRecord(i, e.kind, e.key, e.chi, e.proc))
        except TableViolation:
            return False
    return True
