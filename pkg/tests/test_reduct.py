from dataclasses import replace

import pytest

from lazyset import lazy_machine as lm
from lazyset import simpler_machine as sm
from lazyset.axiom_checker import check_axioms, linearize
from lazyset.reduct import (LINE_MAP, ProjectionMismatch, classify, destutter, pi, project_history, project_state,
                            validate_reduct)
from lazyset.schedule import RandomScheduler, ScriptScheduler


@pytest.mark.parametrize("line,caller,image", [
    ("0", None, "0"), ("1.1", None, "1"), ("1.5", None, "1"), ("1.6", None, "0"),
    ("2.1", None, "2"), ("2.7", None, "2"), ("2.8", None, "0"),
    ("3.1", None, "3.1"), ("3.4", None, "3.4"),
    ("L3.2", "add", "1"), ("L5", "remove", "2"),
])
def test_pi(line, caller, image):
    assert pi(line, caller) == image


def test_pi_needs_caller_on_locate_lines():
    with pytest.raises(ValueError):
        pi("L1")
    assert all(img in sm.PCS for img in LINE_MAP.values())


def test_classify_pairs():
    def step(line, to, chi=None, adr=None):
        return lm.FullAction("p1", line, to, "x", "add" if line[0] == "1" else "rm", 5, chi, adr)

    assert classify(step("1.5", "1.6", 0, 2)).kind == "ad"
    assert classify(step("1.4", "0", 1, 2)).chi == 1
    assert classify(step("2.7", "2.8", 1, 2)).kind == "rm"
    assert classify(step("2.4", "0", 0)).chi == 0
    assert classify(step("1.3", "0", "f")).kind == "fail"
    assert classify(step("2.3", "0", "f")).kind == "fail"
    assert classify(step("1.2", "1.3")) is None
    assert classify(step("2.6", "2.7")) is None
    assert classify(step("1.6", "0", 0)) is None
    assert classify(step("2.8", "0", 1)) is None


def test_project_state_forgets_locks_and_marks():
    H = lm.run_full(ScriptScheduler("p1 invoke_add 5\np1 run\np1 invoke_rm 5\np1 2.1\n"), 50)
    S = H.states[-1]
    P = project_state(replace(S, marked=frozenset({2}), locked=("p1", None, None)))
    assert P == project_state(S)
    assert P.reg("p1").pc == "2" and P.reg("p1").curr is None


def test_random_histories_reduce_and_linearize():
    for seed in range(25):
        H = lm.run_full(RandomScheduler(seed, 3, range(4), 0.0), 300)
        P = project_history(H)
        assert validate_reduct(P), seed
        Hs = destutter(P)
        assert sm.replay(Hs.states[0].procs, Hs.actions).states == Hs.states
        M = sm.build_structure(Hs)
        assert check_axioms(M)
        assert linearize(M).checked


def test_validate_reduct_catches_tampering():
    H = lm.run_full(RandomScheduler(4, 2, (3, 5)), 200)
    P = project_history(H)
    i = next(n for n, s in enumerate(P.steps) if s is not None and s.kind == "ad")
    P.steps[i] = replace(P.steps[i], chi=1 - P.steps[i].chi)
    v = validate_reduct(P)
    assert not v and v.index == i


def test_projection_mismatch_on_bad_stutter():
    H = lm.run_full(RandomScheduler(1, 2, (3, 5)), 100)
    i = next(n for n, a in enumerate(H.actions) if a.pair == ("1.5", "1.6"))
    H.actions[i] = replace(H.actions[i], line="1.2", to="1.3")
    with pytest.raises(ProjectionMismatch):
        project_history(H)


def test_log_labels():
    H = lm.run_full(ScriptScheduler("p1 invoke_add 5\np1 run\n"), 50)
    log = project_history(H).log()
    assert log[0].endswith("invoke_add")
    assert any(line.endswith("1.5>1.6 ad") for line in log)
    assert sum(line.endswith("stutter") for line in log) == len(log) - 2
