from pathlib import Path

import pytest

from gen import ev, random_linear, structure
from lazyset import lazy_machine as lm
from lazyset import simpler_machine as sm
from lazyset.concurrent_set import stress
from lazyset.history import (ParseError, dump_full, dump_linear, dump_log, dump_simpler, dump_structure, load,
                             parse_full, parse_linear, parse_log, parse_simpler, parse_structure)
from lazyset.schedule import RandomScheduler

DATA = Path(__file__).parent / "data"


def test_simpler_roundtrip():
    H = sm.run(RandomScheduler(2, 3, range(5), 0.2), 120)
    text = dump_simpler(H)
    again = parse_simpler(text)
    assert again.states == H.states and dump_simpler(again) == text


def test_full_roundtrip():
    H = lm.run_full(RandomScheduler(2, 3, range(5), 0.1), 300)
    text = dump_full(H)
    again = parse_full(text)
    assert again.states == H.states and dump_full(again) == text


def test_threaded_roundtrip():
    _, records = stress(threads=2, ops=200, seed=3)
    text = dump_log(records)
    assert parse_log(text) == records
    assert load(text).machine == "threaded"


def test_tampered_history_is_rejected_with_line():
    lines = (DATA / "simpler_seed42.txt").read_text().splitlines()
    lines[2] = lines[2].replace("AD 4 0 2", "AD 4 1 2")
    with pytest.raises(ParseError) as info:
        parse_simpler("\n".join(lines) + "\n", "x.txt")
    assert info.value.line == 3 and str(info.value).startswith("x.txt:3:")


def test_bad_header():
    with pytest.raises(ParseError):
        load("LAZYSET-HISTORY v2 machine=simpler\n")
    with pytest.raises(ParseError):
        load("hello\n")
    with pytest.raises(ParseError):
        load("LAZYSET-HISTORY v1 machine=quantum\n")


def test_structure_roundtrip():
    M = structure([ev(0, "Add", 5, 0, 1), ev(1, "Cnt", 5, 1, 0.5, 3, "p2"), ev(2, "Rem", 5, "f", 4)], {1: 0})
    again = parse_structure(dump_structure(M))
    assert again == M
    assert load(dump_structure(M)).machine == "structure"


def test_linear_roundtrip():
    import random
    seq, gamma = random_linear(random.Random(1), 30)
    lf = parse_linear(dump_linear(seq, gamma))
    assert [(e.kind, e.key, e.chi) for e in lf.seq] == [(e.kind, e.key, e.chi) for e in seq]
    assert lf.gamma == gamma and lf.states is None
    assert parse_linear(dump_linear(seq)).gamma is None


def test_linear_bad_index():
    with pytest.raises(ParseError) as info:
        parse_linear("LAZYSET-LINEAR v1\n0 Add 1 0\n5 Add 1 1\n")
    assert info.value.line == 3


def test_full_load_projects():
    loaded = load((DATA / "vignette.txt").read_text())
    assert loaded.machine == "full"
    assert sorted((e.kind.value, e.chi) for e in loaded.structure) == [("Add", 0), ("Cnt", 1), ("Rem", 1)]
