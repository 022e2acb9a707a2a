"""Thread-safe Lazy Set with per-node locks and an instrumented event log.

Every transition that matters for linearization draws a stamp from the log
and is appended under the same lock, so stamps are a total order on the
recorded actions.  Structural writes that need a stamp (activation splice,
physical unlink) happen inside that critical section too, which makes the
stamp order agree with the order in which the list actually changed.
"""

from __future__ import annotations

import itertools
import math
import random
import sys
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .axiom_checker import Event, ExecutionStructure
from .core import F, Chi, Kind


class MalformedLog(ValueError):
    pass


class Node:
    __slots__ = ("key", "next", "marked", "lock", "id")

    def __init__(self, key: float, next_: "Node | None", node_id: int):
        self.key = key
        self.next = next_
        self.marked = False
        self.lock = threading.Lock()
        self.id = node_id


@dataclass(frozen=True)
class LogRecord:
    stamp: int
    proc: str
    tag: str
    op: str
    key: int
    chi: Chi | None = None
    node: int | None = None

    def __str__(self) -> str:
        parts = [str(self.stamp), self.proc, self.tag, self.op, str(self.key)]
        if self.chi is not None:
            parts.append(f"chi={self.chi}")
        if self.node is not None:
            parts.append(f"node={self.node}")
        return " ".join(parts)


class OpLog:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._stamp = itertools.count()
        self.records: list[LogRecord] = []

    @contextmanager
    def stamped(self, proc: str, tag: str, op: str, key: int, chi: Chi | None = None,
                node: int | None = None) -> Iterator[None]:
        """Run the body and append one record, all as one atomic unit."""
        with self._lock:
            yield
            self.records.append(LogRecord(next(self._stamp), proc, tag, op, key, chi, node))

    def append(self, proc: str, tag: str, op: str, key: int, chi: Chi | None = None,
               node: int | None = None) -> None:
        with self.stamped(proc, tag, op, key, chi, node):
            pass


HEAD_ID, TAIL_ID = 0, 1


class LazySet:
    """``pause``, if given, is called at each interleaving point of interest
    (every traversal step and between locate and lock); stress runs use it to
    yield the GIL and provoke contention."""

    def __init__(self, log: OpLog | None = None, pause: Callable[[], None] | None = None):
        self.log = log if log is not None else OpLog()
        self._pause = pause or (lambda: None)
        self._ids = itertools.count(2)
        self._id_lock = threading.Lock()
        self.tail = Node(math.inf, None, TAIL_ID)
        self.head = Node(-1, self.tail, HEAD_ID)

    def _fresh_id(self) -> int:
        with self._id_lock:
            return next(self._ids)

    def _locate(self, x: int) -> tuple[Node, Node]:
        curr = self.head
        while True:
            pred = curr
            self._pause()
            curr = curr.next
            if curr.key >= x:
                self._pause()
                return pred, curr

    @staticmethod
    def _sc(pred: Node, curr: Node) -> bool:
        return not pred.marked and pred.next is curr

    def add(self, x: int, proc: str = "p1") -> Chi:
        self.log.append(proc, "INV", "add", x)
        pred, curr = self._locate(x)
        with pred.lock:
            if not self._sc(pred, curr):
                self.log.append(proc, "RET", "add", x, F)
                return F
            if curr.key == x:
                self.log.append(proc, "AD", "add", x, 1, curr.id)
                chi: Chi = 1
            else:
                node = Node(x, curr, self._fresh_id())
                with self.log.stamped(proc, "AD", "add", x, 0, node.id):
                    pred.next = node
                chi = 0
        self.log.append(proc, "RET", "add", x, chi)
        return chi

    def remove(self, x: int, proc: str = "p1") -> Chi:
        self.log.append(proc, "INV", "rm", x)
        pred, curr = self._locate(x)
        with pred.lock:
            if not self._sc(pred, curr):
                self.log.append(proc, "RET", "rm", x, F)
                return F
            if curr.key > x:
                self.log.append(proc, "RM", "rm", x, 0)
                chi: Chi = 0
            else:
                with curr.lock:
                    d = curr.next
                    curr.marked = True
                    self.log.append(proc, "MARK", "rm", x, None, curr.id)
                    with self.log.stamped(proc, "RM", "rm", x, 1, curr.id):
                        pred.next = d
                chi = 1
        self.log.append(proc, "RET", "rm", x, chi)
        return chi

    def contains(self, x: int, proc: str = "p1") -> Chi:
        self.log.append(proc, "INV", "cnt", x)
        curr = self.head
        while True:
            self._pause()
            curr = curr.next
            if curr.key >= x:
                break
        chi = 1 if curr.key == x else 0
        self.log.append(proc, "RET", "cnt", x, chi, curr.id)
        return chi

    def snapshot(self) -> list[int]:
        """Keys on the main branch; only meaningful at quiescence."""
        out = []
        node = self.head.next
        while node is not self.tail:
            out.append(node.key)
            node = node.next
        return out


def export_history(records: Sequence[LogRecord]) -> ExecutionStructure:
    """Build the ExecutionStructure of a drained log.

    Add/Rem events sit at their deciding record (AD/RM, or the f return);
    Cnt events span INV..RET.  Event ids are the stamps of those records
    (the INV stamp for Cnt).  Operations still open at the end are dropped.
    """
    open_ops: dict[str, LogRecord] = {}
    activation: dict[int, int] = {}
    decided: dict[str, LogRecord] = {}
    events: list[Event] = []
    gamma_node: dict[int, int] = {}
    last = -1
    for rec in records:
        if rec.stamp <= last:
            raise MalformedLog(f"stamp {rec.stamp} is not increasing")
        last = rec.stamp
        p = rec.proc
        if rec.tag == "INV":
            if p in open_ops:
                raise MalformedLog(f"{p} invokes {rec.op} at {rec.stamp} while {open_ops[p].op} is open")
            open_ops[p] = rec
        elif rec.tag in ("AD", "RM"):
            if p not in open_ops or open_ops[p].op != rec.op:
                raise MalformedLog(f"{rec.tag} at {rec.stamp} outside a matching operation")
            decided[p] = rec
        elif rec.tag == "RET":
            inv = open_ops.pop(p, None)
            if inv is None or inv.op != rec.op or inv.key != rec.key:
                raise MalformedLog(f"return at {rec.stamp} does not match an open invocation of {p}")
            if rec.op == "cnt":
                events.append(Event(inv.stamp, Kind.CNT, rec.key, rec.chi, inv.stamp, rec.stamp, p))
                if rec.chi == 1:
                    gamma_node[inv.stamp] = rec.node
                continue
            kind = Kind.ADD if rec.op == "add" else Kind.REM
            if rec.chi == F:
                events.append(Event(rec.stamp, kind, rec.key, F, rec.stamp, rec.stamp, p))
                continue
            at = decided.pop(p, None)
            if at is None or at.chi != rec.chi:
                raise MalformedLog(f"return at {rec.stamp} has no matching decision record")
            events.append(Event(at.stamp, kind, rec.key, rec.chi, at.stamp, at.stamp, p))
            if kind is Kind.ADD and rec.chi == 0:
                activation[at.node] = at.stamp
            if rec.chi == 1:
                gamma_node[at.stamp] = at.node
        elif rec.tag != "MARK":
            raise MalformedLog(f"unknown record tag {rec.tag!r}")
    gamma = {}
    for eid, node in gamma_node.items():
        if node not in activation:
            raise MalformedLog(f"event {eid} resolved node {node}, which no completed add activated")
        gamma[eid] = activation[node]
    events.sort(key=lambda e: e.id)
    return ExecutionStructure.of(events, gamma)


def stress(threads: int = 4, ops: int = 10_000, keys: Sequence[int] = range(8),
           mix: tuple[int, int, int] = (3, 3, 4), seed: int = 0,
           switch_interval: float | None = 1e-5,
           on_done: Callable[[LazySet], None] | None = None,
           timeout: float | None = None, jitter: float = 0.0) -> tuple[LazySet, list[LogRecord]]:
    """Run ``threads`` workers doing ``ops`` random operations each; return the set and its log.

    With ``jitter > 0`` each interleaving point yields the processor with
    that probability.

    Raises ``TimeoutError`` if the workers have not all finished ``timeout``
    seconds after the start.
    """
    pause = None
    if jitter > 0:
        coin = random.Random(f"{seed}:jitter").random

        def pause() -> None:
            if coin() < jitter:
                time.sleep(1e-6)

    s = LazySet(pause=pause)
    keys = list(keys)
    barrier = threading.Barrier(threads)

    def worker(n: int) -> None:
        rng = random.Random(f"{seed}:{n}")
        name = f"t{n + 1}"
        calls = {"add": s.add, "rm": s.remove, "cnt": s.contains}
        plan = [(rng.choices(("add", "rm", "cnt"), weights=mix)[0], rng.choice(keys)) for _ in range(ops)]
        barrier.wait()
        for op, key in plan:
            calls[op](key, name)

    old = sys.getswitchinterval()
    if switch_interval is not None:
        sys.setswitchinterval(switch_interval)
    try:
        workers = [threading.Thread(target=worker, args=(n,), daemon=True) for n in range(threads)]
        for w in workers:
            w.start()
        deadline = None if timeout is None else time.monotonic() + timeout
        for w in workers:
            w.join(None if deadline is None else max(0.0, deadline - time.monotonic()))
        stuck = [w.name for w in workers if w.is_alive()]
        if stuck:
            raise TimeoutError(f"{len(stuck)} of {threads} workers still running after {timeout}s")
    finally:
        sys.setswitchinterval(old)
    if on_done:
        on_done(s)
    return s, list(s.log.records)


def replay_final_set(M: ExecutionStructure, order: Sequence[int]) -> set[int]:
    """The set left after applying the successful Add0/Rem1 events in ``order``."""
    out: set[int] = set()
    for eid in order:
        e = M.events[eid]
        if e.is_(Kind.ADD, 0):
            out.add(e.key)
        elif e.is_(Kind.REM, 1):
            out.discard(e.key)
    return out


def key_histogram(records: Sequence[LogRecord]) -> dict[str, int]:
    counts: dict[str, int] = defaultdict(int)
    for r in records:
        if r.tag == "RET":
            counts[f"{r.op}:{r.chi}"] += 1
    return dict(counts)
