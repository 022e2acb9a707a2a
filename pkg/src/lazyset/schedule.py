"""Schedulers shared by both interpreters.

A scheduler sees, for every process, the action templates enabled for it
and returns one concrete template (with the invocation key filled in), or
``None`` to stop the run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

OPS = ("add", "rm", "cnt")


class ScriptNotEnabled(RuntimeError):
    pass


class Scheduler(Protocol):
    procs: list[str]

    def pick(self, state, options: dict[str, list]): ...


def proc_names(n: int) -> list[str]:
    return [f"p{i + 1}" for i in range(n)]


def parse_mix(text: str) -> tuple[int, int, int]:
    parts = tuple(int(v) for v in text.split(":"))
    if len(parts) != 3 or min(parts) < 0 or sum(parts) == 0:
        raise ValueError(f"mix must be three non-negative weights add:rm:cnt, got {text!r}")
    return parts


class RandomScheduler:
    """Seeded random interleaving.

    Picks a process uniformly (or by ``weights``) among those with an
    enabled step.  At line 0 the operation is drawn by ``mix`` and the key
    uniformly from ``keys``; where a ``fail`` template is co-enabled it is
    taken with probability ``fail_prob``.
    """

    def __init__(self, seed: int = 0, procs: int | Sequence[str] = 1, keys: Sequence[int] = range(8),
                 fail_prob: float = 0.1, mix: tuple[int, int, int] = (1, 1, 1),
                 weights: Sequence[float] | None = None):
        self.rng = random.Random(seed)
        self.procs = proc_names(procs) if isinstance(procs, int) else list(procs)
        if not self.procs:
            raise ValueError("at least one process is required")
        self.keys = list(keys)
        self.fail_prob = fail_prob
        self.mix = mix
        self.weights = list(weights) if weights else None

    def pick(self, state, options: dict[str, list]):
        ready = [p for p in self.procs if options.get(p)]
        if not ready:
            return None
        if self.weights:
            w = [self.weights[self.procs.index(p)] for p in ready]
            p = self.rng.choices(ready, weights=w)[0]
        else:
            p = self.rng.choice(ready)
        templates = options[p]
        if templates[0].is_invocation:
            op = self.rng.choices(OPS, weights=self.mix)[0]
            t = next(t for t in templates if t.op == op)
            return replace(t, key=self.rng.choice(self.keys))
        fails = [t for t in templates if t.kind == "fail"]
        others = [t for t in templates if t.kind != "fail"]
        if fails and (not others or self.rng.random() < self.fail_prob):
            return fails[0]
        return others[0]


@dataclass(frozen=True)
class ScriptStep:
    proc: str
    kind: str
    key: int | None = None

    def __str__(self) -> str:
        return f"{self.proc} {self.kind}" + ("" if self.key is None else f" {self.key}")


def parse_script(text: str) -> list[ScriptStep]:
    """One step per line: ``proc kind [key]``; blank lines and ``#`` comments skipped."""
    steps = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"script line {n}: expected 'proc kind [key]', got {line!r}")
        key = int(parts[2]) if len(parts) == 3 else None
        steps.append(ScriptStep(parts[0], parts[1], key))
    return steps


class ScriptScheduler:
    """Replays an explicit list of steps.

    ``kind`` names an action kind (``invoke_add``, ``ad``, ``3.4``, ``lock``
    ...), a program line the process must currently be at, ``step`` for the
    process's unique non-failing step, or ``run`` to drive the process
    until it is back at line 0.
    """

    def __init__(self, steps: Sequence[ScriptStep] | str):
        if isinstance(steps, str):
            steps = parse_script(steps)
        self.steps = list(steps)
        self.procs = list(dict.fromkeys(s.proc for s in self.steps)) or ["p1"]
        self.pos = 0
        self._running: str | None = None

    def pick(self, state, options: dict[str, list]):
        if self._running is not None:
            p = self._running
            if state.reg(p).pc == "0":
                self._running = None
            else:
                return self._only(p, options, "run")
        if self.pos >= len(self.steps):
            return None
        step = self.steps[self.pos]
        self.pos += 1
        if step.kind == "run":
            self._running = step.proc
            return self._only(step.proc, options, "run")
        templates = options.get(step.proc, [])
        if step.kind == "step":
            return self._only(step.proc, options, "step")
        for t in templates:
            if step.kind in t.names:
                return replace(t, key=step.key) if t.is_invocation else t
        raise ScriptNotEnabled(f"step {self.pos} ({step}) is not enabled; enabled: {[t.kind for t in templates]}")

    def _only(self, p: str, options: dict[str, list], what: str):
        templates = [t for t in options.get(p, []) if t.kind != "fail" and not t.is_invocation]
        if not templates:
            raise ScriptNotEnabled(f"{what}: process {p} has no enabled non-invocation step")
        return templates[0]
