"""Deterministic corpus of mutated execution structures.

Each base is the structure of a seeded Simpler run that the axioms accept.
Timestamps are doubled first so that a new atomic event can be slotted in at
an odd timestamp.  Four operators:

``flip-cnt``          a Cnt1 whose key nobody touches before its end (other
                      than its gamma) becomes Cnt0 and loses its gamma; A2.
``retarget-removed``  an Op1 event's gamma is moved to an earlier Add0 that a
                      Rem1 removed before the event began; A1.
``retarget-late``     a Cnt1's gamma is moved to a same-key Add0 after its
                      end; A1.
``insert-op0``        an Add0 or Rem0 of the same key is placed right after
                      an Add0, while that key is certainly present; A2.

``broken`` marks mutants whose observable history (kinds, keys, statuses)
changed in a way no linearization can satisfy; gamma-only mutants keep the
history and may well stay linearizable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

from . import simpler_machine as sm
from .axiom_checker import Event, ExecutionStructure, check_axioms
from .core import F, Kind
from .schedule import RandomScheduler

OPERATORS = ("flip-cnt", "retarget-removed", "retarget-late", "insert-op0")
EXPECTED = {"flip-cnt": "A2", "retarget-removed": "A1", "retarget-late": "A1", "insert-op0": "A2"}


@dataclass
class Mutant:
    name: str
    operator: str
    base: ExecutionStructure
    mutant: ExecutionStructure
    target: int
    expected: str
    broken: bool


def doubled(M: ExecutionStructure) -> ExecutionStructure:
    return ExecutionStructure.of((replace(e, begin=2 * e.begin, end=2 * e.end) for e in M), M.gamma)


def _live(M: ExecutionStructure, key: int):
    return [e for e in M if e.key == key and e.kind is not Kind.CNT and e.chi != F]


def flip_cnt(M: ExecutionStructure) -> Iterator[tuple[int, ExecutionStructure]]:
    for C in M:
        if not C.is_(Kind.CNT, 1):
            continue
        g = M.events[M.gamma[C.id]]
        others = [e for e in _live(M, C.key) if e.id != g.id and e.begin < C.end]
        if g.end < C.begin and not others:
            m = M.update(C.id, chi=0)
            del m.gamma[C.id]
            yield C.id, m


def retarget_removed(M: ExecutionStructure) -> Iterator[tuple[int, ExecutionStructure]]:
    for A in M:
        if A.chi != 1:
            continue
        for R in M:
            g1 = M.gamma.get(R.id)
            if not R.is_(Kind.REM, 1) or R.key != A.key or g1 == M.gamma[A.id]:
                continue
            if M.events[g1].end < R.begin and R.end < A.begin:
                m = M.copy()
                m.gamma[A.id] = g1
                yield A.id, m
                break


def retarget_late(M: ExecutionStructure) -> Iterator[tuple[int, ExecutionStructure]]:
    for C in M:
        if not C.is_(Kind.CNT, 1):
            continue
        for A in M:
            if A.is_(Kind.ADD, 0) and A.key == C.key and A.begin > C.end:
                m = M.copy()
                m.gamma[C.id] = A.id
                yield C.id, m
                break


def insert_op0(M: ExecutionStructure) -> Iterator[tuple[int, ExecutionStructure]]:
    new_id = max(M.events, default=-1) + 1
    for n, A in enumerate(sorted((e for e in M if e.is_(Kind.ADD, 0)), key=lambda e: e.id)):
        kind = Kind.REM if n % 2 == 0 else Kind.ADD
        yield new_id, M.with_event(Event(new_id, kind, A.key, 0, A.end + 1, A.end + 1))


_OPS = {"flip-cnt": flip_cnt, "retarget-removed": retarget_removed,
        "retarget-late": retarget_late, "insert-op0": insert_op0}


def base_structures(start_seed: int = 0, steps: int = 30) -> Iterator[tuple[int, ExecutionStructure]]:
    seed = start_seed
    while True:
        H = sm.run(RandomScheduler(seed, 2, (3, 5), 0.1), steps)
        M = sm.build_structure(H)
        if check_axioms(M):
            yield seed, doubled(M)
        seed += 1


def corpus(per_operator: int = 6, max_seeds: int = 500) -> list[Mutant]:
    """``per_operator`` mutants of each kind, at most one per (operator, seed)."""
    out: list[Mutant] = []
    counts = dict.fromkeys(OPERATORS, 0)
    for seed, M in base_structures():
        if seed >= max_seeds or min(counts.values()) >= per_operator:
            break
        for op in OPERATORS:
            if counts[op] >= per_operator:
                continue
            for target, m in _OPS[op](M):
                out.append(Mutant(f"{op}/seed{seed}/#{target}", op, M, m, target, EXPECTED[op],
                                  op in ("flip-cnt", "insert-op0")))
                counts[op] += 1
                break
    return out
