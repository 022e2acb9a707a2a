import pytest

from lazyset import simpler_machine as sm
from lazyset.axiom_checker import check_axioms, detect_cycle, linearize
from lazyset.core import F, Kind
from lazyset.schedule import RandomScheduler, ScriptNotEnabled, ScriptScheduler


def test_initial_state():
    S = sm.initial_state(["p1", "p2"])
    assert S.val == (-1, sm.INF) and S.next == (sm.TAIL, None)
    assert sm.main_branch(S) == [sm.HEAD, sm.TAIL]
    assert sm.is_normal(S)
    with pytest.raises(sm.EmptyProcs):
        sm.initial_state([])


def test_add_remove_contains_solo():
    H = sm.run(ScriptScheduler("p1 invoke_add 5\np1 ad\np1 invoke_add 5\np1 ad\n"
                               "p1 invoke_cnt 5\np1 run\np1 invoke_rm 5\np1 rm\np1 invoke_cnt 5\np1 run\n"), 100)
    outcomes = [(a.kind, a.chi) for a in H.actions if a.kind in ("ad", "rm", "3.5")]
    assert outcomes == [("ad", 0), ("ad", 1), ("3.5", 1), ("rm", 1), ("3.5", 0)]
    S = H.states[-1]
    assert S.val == (-1, sm.INF, 5) and sm.main_branch(S) == [0, 1] and sm.is_removed(S, 2)


def test_fresh_addresses_increase():
    H = sm.run(ScriptScheduler("p1 invoke_add 7\np1 ad\np1 invoke_add 3\np1 ad\np1 invoke_add 5\np1 ad\n"), 100)
    S = H.states[-1]
    assert [S.val[a] for a in sm.main_branch(S)] == [-1, 3, 5, 7, sm.INF]
    assert [a.adr for a in H.actions if a.kind == "ad"] == [2, 3, 4]
    assert H.activation == {2: 1, 3: 3, 4: 5}


def test_fail_is_inert():
    H = sm.run(ScriptScheduler("p1 invoke_add 5\np1 fail\np1 invoke_rm 5\np1 fail\n"), 10)
    assert H.states[-1].val == H.states[0].val
    M = sm.build_structure(H)
    assert [(e.kind, e.chi) for e in M] == [(Kind.ADD, F), (Kind.REM, F)]


def test_script_not_enabled():
    with pytest.raises(ScriptNotEnabled):
        sm.run(ScriptScheduler("p1 ad\n"), 5)


def test_contains_example_structure():
    script = "p1 invoke_add 3\np1 ad\np2 invoke_cnt 3\np2 3.1\np2 3.3\np2 3.4\np2 3.5\n"
    H = sm.run(ScriptScheduler(script), 20)
    M = sm.build_structure(H)
    assert M.gamma == {3: 1}
    cnt = M.events[3]
    assert (cnt.kind, cnt.chi, cnt.begin, cnt.end) == (Kind.CNT, 1, 3, 6)
    assert check_axioms(M)
    assert sm.pseudo_path(H, 3) == [(0, 3), (2, 4)]


def test_random_runs_stay_normal_and_linearize():
    for seed in range(30):
        H = sm.run(RandomScheduler(seed, 3, range(4), 0.1), 150)
        M = sm.build_structure(H)
        assert check_axioms(M), seed
        assert detect_cycle(M) is None
        assert linearize(M).checked
        for begin, _ in sm.contains_spans(H):
            sm.pseudo_path(H, begin)


def test_replay_roundtrip_and_tamper():
    H = sm.run(RandomScheduler(5, 2, (3, 5), 0.2), 60)
    again = sm.replay(H.states[0].procs, H.actions)
    assert again.states == H.states
    i = next(n for n, a in enumerate(H.actions) if a.kind == "ad")
    bad = list(H.actions)
    bad[i] = bad[i].__class__(**{**bad[i].__dict__, "chi": 1 - bad[i].chi})
    with pytest.raises(ValueError):
        sm.replay(H.states[0].procs, bad)


def test_incomplete_contains():
    H = sm.run(ScriptScheduler("p1 invoke_cnt 4\np1 3.1\n"), 5)
    assert len(sm.build_structure(H)) == 0
    with pytest.raises(sm.IncompleteHistory):
        sm.build_structure(H, strict=True)
