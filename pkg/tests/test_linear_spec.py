import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_linear, reference_functional, reference_states
from lazyset.core import F, InvariantBroken, Kind
from lazyset.linear_spec import (EventRecord, NoWitness, TableViolation, check_functional_mode, check_state_mode,
                                 derive_gamma, derive_states, no_op0_between, records, step_state, strengthen_fs1)

A, R, C = "Add", "Rem", "Cnt"


def test_step_state_rows():
    assert step_state(frozenset(), EventRecord(0, Kind.ADD, 3, 0)) == {3}
    assert step_state(frozenset({3}), EventRecord(0, Kind.REM, 7, F)) == {3}
    with pytest.raises(TableViolation) as info:
        step_state(frozenset({3}), EventRecord(0, Kind.CNT, 3, 0))
    assert info.value.row == "Cnt0"


def test_event_record_invariants():
    with pytest.raises(ValueError):
        EventRecord(0, Kind.CNT, 1, F)
    with pytest.raises(ValueError):
        EventRecord(0, Kind.ADD, -1, 0)


def test_state_mode_examples():
    v = check_state_mode([])
    assert v and v.details["states"] == [frozenset()]
    assert check_state_mode(records([(A, 5, 0), (C, 5, 1), (R, 5, 1), (C, 5, 0)]))
    v = check_state_mode(records([(C, 5, 1)]))
    assert not v and v.index == 0


def test_derive_gamma_examples():
    assert derive_gamma(records([(A, 5, 0), (C, 5, 1)])) == {1: 0}
    assert derive_gamma(records([(A, 5, 0), (R, 5, 1), (A, 5, 0), (C, 5, 1)])) == {1: 0, 3: 2}
    assert derive_gamma(records([(R, 5, 0)])) == {}
    with pytest.raises(NoWitness):
        derive_gamma(records([(C, 5, 1)]))


def test_functional_mode_examples():
    assert check_functional_mode(records([(A, 5, 0), (C, 5, 1)]), {1: 0})
    v = check_functional_mode(records([(A, 5, 0), (C, 5, 1)]), {1: 1})
    assert not v and v.axiom == "FS0"
    v = check_functional_mode(records([(A, 5, 0), (R, 5, 1), (C, 5, 1)]), {1: 0, 2: 0})
    assert not v and v.axiom == "FS1" and v.index == 2


def test_functional_mode_fs2():
    v = check_functional_mode(records([(A, 5, 0), (A, 5, 0)]), {})
    assert not v and v.axiom == "FS2"
    assert check_functional_mode(records([(A, 5, 0), (R, 5, 1), (A, 5, 0)]), {1: 0})


def test_derive_states_examples():
    assert derive_states([], {}) == [frozenset()]
    assert derive_states(records([(A, 5, 0), (R, 5, 1)]), {1: 0}) == [frozenset(), {5}, frozenset()]
    assert derive_states(records([(A, 2, 0), (A, 9, 0)]), {}) == [frozenset(), {2}, {2, 9}]
    with pytest.raises(InvariantBroken):
        derive_states(records([(C, 5, 1)]), {})


def test_strengthened_fs1_examples():
    assert strengthen_fs1(records([(A, 5, 0), (C, 5, 1)]), {1: 0})
    assert strengthen_fs1(records([(A, 5, 0), (R, 5, 1), (A, 5, 0), (C, 5, 1)]), {1: 0, 3: 2})
    # an FS-rejected input: Rem0 while 5 is present
    seq = records([(A, 5, 0), (R, 5, 0), (C, 5, 1)])
    assert not check_functional_mode(seq, {2: 0})


def test_failed_events_are_inert():
    seq = records([(A, 5, F), (R, 5, F), (A, 5, 0), (A, 5, F), (C, 5, 1)])
    assert check_state_mode(seq)
    assert derive_gamma(seq) == {4: 2}


def test_random_round_trips_against_reference():
    rng = random.Random(11)
    for _ in range(500):
        seq, gamma = random_linear(rng, rng.randint(0, 40))
        assert reference_states(seq) is not None
        assert derive_gamma(seq) == gamma
        assert check_functional_mode(seq, gamma)
        assert derive_states(seq, gamma) == reference_states(seq)
        assert strengthen_fs1(seq, gamma) and no_op0_between(seq, gamma)


triples = st.lists(st.tuples(st.sampled_from(list(Kind)), st.integers(0, 3), st.sampled_from([0, 1, F])), max_size=12)


@settings(max_examples=300, deadline=None)
@given(triples)
def test_state_mode_matches_reference(spec):
    seq = records([(k, x, c) for k, x, c in spec if not (k is Kind.CNT and c == F)])
    assert bool(check_state_mode(seq)) == (reference_states(seq) is not None)


@settings(max_examples=300, deadline=None)
@given(triples, st.randoms(use_true_random=False))
def test_functional_mode_matches_reference(spec, rnd):
    seq = records([(k, x, c) for k, x, c in spec if not (k is Kind.CNT and c == F)])
    gamma = {}
    for i, e in enumerate(seq):
        if e.chi == 1:
            gamma[i] = rnd.randrange(len(seq))
    verdict = check_functional_mode(seq, gamma)
    assert bool(verdict) == reference_functional(seq, gamma)
    if verdict:
        assert check_state_mode(seq)
        assert strengthen_fs1(seq, gamma) and no_op0_between(seq, gamma)
