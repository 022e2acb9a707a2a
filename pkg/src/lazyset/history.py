"""Plain-text formats: machine/threaded histories, structures, linear sequences.

History files start with ``LAZYSET-HISTORY v1 machine=<simpler|full|threaded>``
(optionally ``procs=p1,p2``) followed by one record per line::

    <seq> <proc> <TAG> [fields] [k=v ...]

Machine histories are parsed by replaying the recorded choices through the
interpreter and re-serializing; any field that disagrees with the machine is
a parse error, so a parsed history is always a valid one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from . import lazy_machine as lm
from . import simpler_machine as sm
from .axiom_checker import Event, ExecutionStructure
from .concurrent_set import LogRecord, export_history
from .core import Kind, parse_chi
from .linear_spec import EventRecord

HISTORY_MAGIC = "LAZYSET-HISTORY"
STRUCTURE_MAGIC = "LAZYSET-STRUCTURE"
LINEAR_MAGIC = "LAZYSET-LINEAR"
MACHINES = ("simpler", "full", "threaded")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


def _fmt(v) -> str:
    return "-" if v is None else str(v)


def _int_or_none(tok: str) -> int | None:
    return None if tok == "-" else int(tok)


def _header(machine: str, procs: Sequence[str]) -> str:
    return f"{HISTORY_MAGIC} v1 machine={machine} procs={','.join(procs)}"


def _split_header(line: str, magic: str) -> dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != magic or parts[1] != "v1":
        raise ParseError(f"expected a '{magic} v1' header", 1)
    opts = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise ParseError(f"bad header field {tok!r}", 1)
        k, v = tok.split("=", 1)
        opts[k] = v
    return opts


def _body(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if n == 1:
            continue
        line = line.split("#", 1)[0].strip()
        if line:
            out.append((n, line.split()))
    return out


# -- Simpler machine ------------------------------------------------------

def simpler_record(seq: int, a: sm.SimplerAction, T: sm.SimplerState) -> str:
    head = f"{seq} {a.proc}"
    if a.is_invocation:
        return f"{head} INV {a.op} {a.key}"
    if a.kind in ("ad", "rm"):
        return f"{head} {a.kind.upper()} {a.key} {a.chi} {_fmt(a.adr)}"
    if a.kind == "fail":
        return f"{head} FAIL {a.op} {a.key}"
    if a.kind == "3.5":
        return f"{head} RET cnt {a.key} {a.chi}"
    to = T.reg(a.proc).pc
    delta = f" curr={T.reg(a.proc).curr}" if a.kind in ("3.1", "3.3") else ""
    return f"{head} STEP {a.kind}>{to}{delta}"


def dump_simpler(H: sm.SimplerHistory) -> str:
    lines = [_header("simpler", H.states[0].procs)]
    for i, (_, a, T) in enumerate(H.triples()):
        lines.append(simpler_record(i, a, T))
    return "\n".join(lines) + "\n"


def _simpler_action(proc: str, toks: list[str]) -> sm.SimplerAction:
    tag = toks[0]
    if tag == "INV":
        return sm.SimplerAction(proc, sm.INVOKE[toks[1]], toks[1], int(toks[2]))
    if tag in ("AD", "RM"):
        return sm.SimplerAction(proc, tag.lower(), "add" if tag == "AD" else "rm")
    if tag == "FAIL":
        return sm.SimplerAction(proc, "fail", toks[1])
    if tag == "RET":
        return sm.SimplerAction(proc, "3.5", "cnt")
    if tag == "STEP":
        return sm.SimplerAction(proc, toks[1].split(">")[0], "cnt")
    raise ValueError(f"tag {tag} does not occur in Simpler histories")


def parse_simpler(text: str, source: str | None = None) -> sm.SimplerHistory:
    opts = _split_header(text.splitlines()[0] if text else "", HISTORY_MAGIC)
    records = _body(text)
    procs = opts.get("procs", "").split(",") if opts.get("procs") else list(dict.fromkeys(t[1] for _, t in records)) or ["p1"]
    S = sm.initial_state(procs)
    H = sm.SimplerHistory([S])
    for i, (n, toks) in enumerate(records):
        try:
            if int(toks[0]) != i:
                raise ValueError(f"sequence number {toks[0]} where {i} was expected")
            T, done = sm.apply(S, _simpler_action(toks[1], toks[2:]))
        except (ValueError, IndexError, KeyError, sm.NotEnabled) as exc:
            raise ParseError(str(exc), n, source) from None
        done = _with_id(done, i)
        expect = simpler_record(i, done, T)
        if expect.split() != toks:
            raise ParseError(f"record disagrees with the machine; replay gives '{expect}'", n, source)
        H.actions.append(done)
        H.states.append(T)
        S = T
    return H


def _with_id(a, i):
    return replace(a, id=i)


# -- Full machine ---------------------------------------------------------

def full_record(seq: int, a: lm.FullAction, T: lm.FullState) -> str:
    head = f"{seq} {a.proc}"
    pair = f"{a.line}>{a.to}"
    if a.is_invocation:
        return f"{head} INV {a.op} {a.key}"
    if a.kind in ("response", "fail_return"):
        return f"{head} RET {a.op} {a.key} {a.chi} line={pair}"
    if a.kind == "lock":
        return f"{head} LOCK {pair} {a.adr}"
    if a.kind == "activation":
        return f"{head} ACTIVATE {a.adr} key={a.key}"
    if a.kind == "marking":
        return f"{head} MARK {a.adr}"
    if a.kind == "physical_removal":
        return f"{head} UNLINK {a.adr}"
    r = T.reg(a.proc)
    deltas = {"L1": "curr", "L3.1": "pred", "L3.2": "curr", "2.5d": "d", "3.1": "curr", "3.3": "curr"}
    delta = f" {deltas[a.line]}={getattr(r, deltas[a.line])}" if a.line in deltas else ""
    return f"{head} STEP {pair}{delta}"


def dump_full(H: lm.FullHistory) -> str:
    lines = [_header("full", H.states[0].procs)]
    for i, (_, a, T) in enumerate(H.triples()):
        lines.append(full_record(i, a, T))
    return "\n".join(lines) + "\n"


def parse_full(text: str, source: str | None = None, check: bool = False) -> lm.FullHistory:
    opts = _split_header(text.splitlines()[0] if text else "", HISTORY_MAGIC)
    records = _body(text)
    procs = opts.get("procs", "").split(",") if opts.get("procs") else list(dict.fromkeys(t[1] for _, t in records)) or ["p1"]
    S = lm.initial_full_state(procs)
    H = lm.FullHistory([S])
    for i, (n, toks) in enumerate(records):
        try:
            if int(toks[0]) != i:
                raise ValueError(f"sequence number {toks[0]} where {i} was expected")
            p = toks[1]
            if toks[2] == "INV":
                op = toks[3]
                a = lm.FullAction(p, "0", lm.FIRST_LINE[op], "invoke", op, int(toks[4]), id=i)
            else:
                options = lm.enabled_full(S, p)
                if not options or options[0].is_invocation:
                    raise ValueError(f"{p} has no step to take at line {S.reg(p).pc}")
                a = options[0]
            T, done = lm.apply_full(S, _with_id(a, i), check=check)
        except (ValueError, IndexError, KeyError, lm.NotEnabled) as exc:
            raise ParseError(str(exc), n, source) from None
        expect = full_record(i, done, T)
        if expect.split() != toks:
            raise ParseError(f"record disagrees with the machine; replay gives '{expect}'", n, source)
        H.actions.append(done)
        H.states.append(T)
        S = T
    return H


# -- Threaded logs --------------------------------------------------------

def log_record(r: LogRecord) -> str:
    head = f"{r.stamp} {r.proc} {r.tag}"
    if r.tag == "INV":
        return f"{head} {r.op} {r.key}"
    if r.tag == "RET":
        return f"{head} {r.op} {r.key} {r.chi}" + ("" if r.node is None else f" node={r.node}")
    if r.tag in ("AD", "RM"):
        return f"{head} {r.key} {r.chi} {_fmt(r.node)}"
    if r.tag == "MARK":
        return f"{head} {r.node} key={r.key}"
    raise ValueError(f"unknown log tag {r.tag}")


def dump_log(records: Iterable[LogRecord], procs: Sequence[str] = ()) -> str:
    records = list(records)
    procs = list(procs) or sorted(dict.fromkeys(r.proc for r in records))
    return "\n".join([_header("threaded", procs)] + [log_record(r) for r in records]) + "\n"


def parse_log(text: str, source: str | None = None) -> list[LogRecord]:
    _split_header(text.splitlines()[0] if text else "", HISTORY_MAGIC)
    out = []
    for n, toks in _body(text):
        try:
            stamp, proc, tag, rest = int(toks[0]), toks[1], toks[2], toks[3:]
            kv = dict(t.split("=", 1) for t in rest if "=" in t)
            pos = [t for t in rest if "=" not in t]
            if tag == "INV":
                rec = LogRecord(stamp, proc, tag, pos[0], int(pos[1]))
            elif tag == "RET":
                node = int(kv["node"]) if "node" in kv else None
                rec = LogRecord(stamp, proc, tag, pos[0], int(pos[1]), parse_chi(pos[2]), node)
            elif tag in ("AD", "RM"):
                op = "add" if tag == "AD" else "rm"
                rec = LogRecord(stamp, proc, tag, op, int(pos[0]), parse_chi(pos[1]), _int_or_none(pos[2]))
            elif tag == "MARK":
                rec = LogRecord(stamp, proc, tag, "rm", int(kv["key"]), None, int(pos[0]))
            else:
                raise ValueError(f"tag {tag} does not occur in threaded logs")
        except (ValueError, IndexError, KeyError) as exc:
            raise ParseError(str(exc), n, source) from None
        out.append(rec)
    return out


# -- Dispatch -------------------------------------------------------------

@dataclass
class Loaded:
    machine: str
    history: object
    structure: ExecutionStructure


def history_machine(text: str) -> str:
    opts = _split_header(text.splitlines()[0] if text else "", HISTORY_MAGIC)
    machine = opts.get("machine")
    if machine not in MACHINES:
        raise ParseError(f"unknown machine {machine!r}", 1)
    return machine


def load(text: str, source: str | None = None) -> Loaded:
    """Parse any supported file into an ExecutionStructure (plus its history)."""
    first = text.split(None, 1)[0] if text.strip() else ""
    if first == STRUCTURE_MAGIC:
        M = parse_structure(text, source)
        return Loaded("structure", None, M)
    if first != HISTORY_MAGIC:
        raise ParseError("not a LAZYSET history or structure file", 1, source)
    machine = history_machine(text)
    if machine == "simpler":
        H = parse_simpler(text, source)
        return Loaded(machine, H, sm.build_structure(H))
    if machine == "full":
        from .reduct import destutter, project_history
        H = parse_full(text, source)
        return Loaded(machine, H, sm.build_structure(destutter(project_history(H))))
    records = parse_log(text, source)
    return Loaded(machine, records, export_history(records))


# -- Structures -----------------------------------------------------------

def dump_structure(M: ExecutionStructure) -> str:
    lines = [f"{STRUCTURE_MAGIC} v1"]
    for e in M:
        lines.append(f"E {e.id} {e.kind} {e.key} {e.chi} {e.begin} {e.end} {_fmt(e.proc)}")
    for a, g in sorted(M.gamma.items()):
        lines.append(f"G {a} {g}")
    return "\n".join(lines) + "\n"


def _num(tok: str):
    v = float(tok)
    return int(v) if v.is_integer() else v


def parse_structure(text: str, source: str | None = None) -> ExecutionStructure:
    _split_header(text.splitlines()[0] if text else "", STRUCTURE_MAGIC)
    events, gamma = [], {}
    for n, toks in _body(text):
        try:
            if toks[0] == "E":
                _, eid, kind, key, chi, begin, end, proc = toks
                events.append(Event(int(eid), Kind(kind), int(key), parse_chi(chi), _num(begin), _num(end),
                                    None if proc == "-" else proc))
            elif toks[0] == "G":
                gamma[int(toks[1])] = int(toks[2])
            else:
                raise ValueError(f"unknown line type {toks[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ParseError(str(exc), n, source) from None
    ids = [e.id for e in events]
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate event ids", None, source)
    return ExecutionStructure.of(events, gamma)


# -- Linear sequences -----------------------------------------------------

@dataclass
class LinearFile:
    seq: list[EventRecord]
    gamma: dict[int, int] | None
    states: list[frozenset] | None


def dump_linear(seq: Sequence[EventRecord], gamma: dict[int, int] | None = None,
                states: Sequence[frozenset] | None = None) -> str:
    lines = [f"{LINEAR_MAGIC} v1"]
    for e in seq:
        lines.append(f"{e.index} {e.kind} {e.key} {e.chi}")
    for a, g in sorted((gamma or {}).items()):
        lines.append(f"G {a} {g}")
    for i, D in enumerate(states or []):
        lines.append(f"D {i} {{{','.join(str(k) for k in sorted(D))}}}")
    return "\n".join(lines) + "\n"


def parse_linear(text: str, source: str | None = None) -> LinearFile:
    _split_header(text.splitlines()[0] if text else "", LINEAR_MAGIC)
    seq, gamma, states = [], {}, []
    has_gamma = False
    for n, toks in _body(text):
        try:
            if toks[0] == "G":
                has_gamma = True
                gamma[int(toks[1])] = int(toks[2])
            elif toks[0] == "D":
                body = toks[2].strip("{}")
                states.append(frozenset(int(k) for k in body.split(",") if k))
            else:
                index, kind, key, chi = toks
                if int(index) != len(seq):
                    raise ValueError(f"index {index} where {len(seq)} was expected")
                seq.append(EventRecord(len(seq), Kind(kind), int(key), parse_chi(chi)))
        except (ValueError, IndexError) as exc:
            raise ParseError(str(exc), n, source) from None
    return LinearFile(seq, gamma if has_gamma else None, states or None)
