from lazyset.axiom_checker import check_axioms
from lazyset.mutate import EXPECTED, OPERATORS, corpus, doubled, flip_cnt, insert_op0
from lazyset.oracle import brute_force

from gen import ev, structure


def test_corpus_is_deterministic_and_covers_operators():
    a, b = corpus(), corpus()
    assert [m.name for m in a] == [m.name for m in b]
    assert len(a) >= 20
    assert {m.operator for m in a} == set(OPERATORS)


def test_bases_are_accepted():
    for m in corpus():
        assert check_axioms(m.base)


def test_doubled_keeps_order():
    M = structure([ev(0, "Add", 1, 0, 1), ev(1, "Cnt", 1, 1, 2, 3)], {1: 0})
    D = doubled(M)
    assert [(e.begin, e.end) for e in D] == [(2, 2), (4, 6)] and D.gamma == M.gamma


def test_flip_and_insert_by_hand():
    M = doubled(structure([ev(0, "Add", 1, 0, 1), ev(1, "Cnt", 1, 1, 2, 3)], {1: 0}))
    (target, m), = list(flip_cnt(M))
    v = check_axioms(m)
    assert target == 1 and not v and v.axiom == EXPECTED["flip-cnt"]
    assert not brute_force(m)
    (target, m), = list(insert_op0(M))
    assert m.events[target].begin == 3
    assert check_axioms(m).axiom == "A2" and not brute_force(m)
