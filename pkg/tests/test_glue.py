from fractions import Fraction

import pytest

from osculate.formulas import aht, neighbor_formula, q_row, winding_formula
from osculate.glue import (
    CONTRACTIBLE_ONLY,
    WITH_WINDING,
    _pair_sum,
    glue,
    spanning_visit_prob,
    surround_count,
    surround_distribution,
    winding_edge_prob,
)
from osculate.patterns import LinkPattern, enumerate_states, parse


def test_l2_examples():
    d = glue(LinkPattern("()"), LinkPattern("()"))
    assert len(d.loops) == 1 and sorted(d.loops[0].points) == [0, 1]
    assert not d.loops[0].winds
    d = glue(LinkPattern("()"), LinkPattern(")("))
    assert len(d.loops) == 1 and d.loops[0].winds
    assert d.open_strand is None


def test_l2_surround_by_hand():
    counts = sorted(surround_count(glue(a, b), 0) for a in enumerate_states(2) for b in enumerate_states(2))
    assert counts == [0, 0, 0, 1]


def test_size_mismatch():
    with pytest.raises(ValueError):
        glue(LinkPattern("()"), LinkPattern("()()"))
    with pytest.raises(ValueError):
        glue(parse("|()"), LinkPattern("()()"))


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6, 7])
def test_point_conservation(L):
    states = enumerate_states(L)
    for a in states:
        for b in states:
            d = glue(a, b)
            pts = [p for loop in d.loops for p in loop.points]
            if d.open_strand is not None:
                pts += d.open_strand.points
            assert sorted(pts) == list(range(L))
            for loop in d.loops:
                assert loop.winds == (loop.seam_crossings != 0)
                assert loop.displacement == loop.seam_crossings * L
            if L % 2:
                assert d.open_strand is not None
                assert not any(loop.winds for loop in d.loops)
            else:
                assert d.open_strand is None


@pytest.mark.parametrize("L", [2, 4, 6])
def test_contractible_parity(L):
    # surround_count asserts equal parities internally; run it on every pair and gap
    states = enumerate_states(L)
    for a in states:
        for b in states:
            d = glue(a, b)
            for g in range(L):
                m = surround_count(d, g)
                assert 0 <= m <= len(d.loops)


def test_winding_examples(dist):
    assert winding_edge_prob(dist(2)) == Fraction(1, 2)
    assert winding_edge_prob(dist(4)) == Fraction(42, 100)
    assert winding_edge_prob(dist(6)) == Fraction(7436, 19600)
    assert spanning_visit_prob(dist(3)) == Fraction(7, 9)
    with pytest.raises(ValueError):
        winding_edge_prob(dist(3))
    with pytest.raises(ValueError):
        spanning_visit_prob(dist(4))


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6, 7, 8])
def test_winding_formula(L, dist):
    f = winding_edge_prob if L % 2 == 0 else spanning_visit_prob
    v = f(dist(L))
    assert v == winding_formula(L)
    assert 0 < v <= 1


@pytest.mark.parametrize("L", [2, 4, 6, 8])
def test_surround_formula(L, dist):
    sd = surround_distribution(dist(L))
    assert sum(sd.values()) == 1
    assert [sd.get(m, 0) for m in range(L // 2 + 1)] == [Fraction(q, aht(L) ** 2) for q in q_row(L)]


def test_surround_examples(dist):
    assert surround_distribution(dist(2)) == {0: Fraction(3, 4), 1: Fraction(1, 4)}
    assert surround_distribution(dist(4)) == {0: Fraction(7, 10), 1: Fraction(29, 100), 2: Fraction(1, 100)}


def test_alternative_policy_differs(dist):
    alt = surround_distribution(dist(4), WITH_WINDING)
    assert sum(alt.values()) == 1
    assert alt != surround_distribution(dist(4), CONTRACTIBLE_ONLY)


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_translation_invariance(L, dist):
    d = dist(L)
    if L % 2:
        vals = {spanning_visit_prob(d, x) for x in range(L)}
        assert len(vals) == 1
        return
    assert len({winding_edge_prob(d, x) for x in range(L)}) == 1
    ref = surround_distribution(d)
    for g in range(L):
        assert surround_distribution(d, gap=g) == ref


def test_p_l0_decreases(dist):
    vals = [surround_distribution(dist(L))[0] for L in (2, 4, 6, 8)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("L", [2, 4, 6, 8])
def test_neighbor_formula_as_cut_connectivity(L, dist):
    # independent cross-check of the walker reading used by the Monte Carlo:
    # the edge left of the start edge is visited iff both cut edges lie on one loop
    got = _pair_sum(dist(L), lambda d: d.loop_of(0) is d.loop_of(L - 1)).get(True, 0)
    assert got == neighbor_formula(L)
