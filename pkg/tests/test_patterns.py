from itertools import product
from math import comb

import pytest
from hypothesis import given, strategies as st

from osculate.patterns import (
    DefectPattern,
    LinkPattern,
    PatternError,
    enumerate_even,
    enumerate_odd,
    enumerate_states,
    format_pattern,
    match_map,
    orbit,
    parse,
    partner_table,
    reflect,
    rotate,
)


def _balanced_words(L):
    # independent oracle: all binary words with equal counts
    return sorted("".join(w) for w in product("()", repeat=L) if w.count("(") == L // 2)


@pytest.mark.parametrize("L", [2, 4, 6, 8, 10])
def test_even_count(L):
    states = enumerate_even(L)
    assert len(states) == comb(L, L // 2)
    assert len(set(states)) == len(states)


@pytest.mark.parametrize("L", [2, 4, 6])
def test_even_matches_bruteforce(L):
    assert sorted(p.word for p in enumerate_even(L)) == _balanced_words(L)


def test_l2_patterns():
    assert {p.word for p in enumerate_even(2)} == {"()", ")("}


@pytest.mark.parametrize("L,n", [(3, 3), (5, 10), (7, 35), (9, 126)])
def test_odd_count(L, n):
    states = enumerate_odd(L)
    assert len(states) == n == comb(L, (L - 1) // 2)


def test_odd_matches_bruteforce():
    # every word with one bar whose remaining symbols, read after the bar, stay balanced
    for L in (3, 5, 7):
        found = set()
        for w in product("()|", repeat=L):
            if w.count("|") != 1:
                continue
            try:
                found.add(parse("".join(w)).symbols)
            except PatternError:
                pass
        assert found == {p.symbols for p in enumerate_odd(L)}


def test_enumeration_is_sorted():
    for L in range(2, 9):
        syms = [p.symbols for p in enumerate_states(L)]
        assert syms == sorted(syms)


def test_bad_arguments():
    with pytest.raises(ValueError):
        enumerate_even(3)
    with pytest.raises(ValueError):
        enumerate_even(0)
    with pytest.raises(ValueError):
        enumerate_odd(4)


def test_match_map_examples():
    (a,) = match_map(LinkPattern("()"))
    assert (a.start, a.end, a.covered_gaps, a.crosses_seam) == (0, 1, frozenset({0}), False)
    (a,) = match_map(LinkPattern(")("))
    assert (a.start, a.end, a.covered_gaps, a.crosses_seam) == (1, 0, frozenset({1}), True)
    arcs = {(a.start, a.end): a.covered_gaps for a in match_map(LinkPattern("(())"))}
    assert arcs == {(1, 2): frozenset({1}), (0, 3): frozenset({0, 1, 2})}


def test_rotate_examples():
    assert rotate(LinkPattern("()"), 1) == LinkPattern(")(")
    p = LinkPattern("(())")
    assert rotate(p, 0) == p
    assert rotate(p, 2) == LinkPattern("))((")


def test_parse_examples():
    assert parse("(())") == LinkPattern("(())")
    with pytest.raises(PatternError):
        parse("(()")
    with pytest.raises(PatternError):
        parse("|(|")
    with pytest.raises(PatternError):
        parse("(()|")
    # the arc from 0 to 2 would have to pass over the defect at 1
    with pytest.raises(PatternError) as exc:
        parse("(|)")
    assert exc.value.position is not None
    p = parse(")|(")
    assert isinstance(p, DefectPattern) and p.defect == 1 and p.L == 3
    assert {q.symbols for q in enumerate_odd(3)} == {"|()", ")|(", "()|"}


def test_defect_partner():
    partner, disp = partner_table(parse("()|"))
    assert partner == [1, 0, -1]
    assert disp[0] == 1 and disp[1] == -1


def test_orbit_sizes():
    assert len(orbit(LinkPattern("(())"))) == 4
    assert len(orbit(LinkPattern("()()"))) == 2
    total = sum(1 for _ in enumerate_even(8))
    seen = set()
    for p in enumerate_even(8):
        seen |= orbit(p)
    assert len(seen) == total


# -- properties -------------------------------------------------------------------------

pattern_L = st.integers(min_value=2, max_value=10)


@st.composite
def patterns(draw):
    L = draw(pattern_L)
    states = enumerate_states(L)
    return states[draw(st.integers(0, len(states) - 1))]


@given(patterns(), st.integers(-25, 25))
def test_rotate_round_trip(p, s):
    q = rotate(p, s)
    assert type(q) is type(p)
    assert rotate(q, -s) == p
    assert rotate(p, p.L) == p
    assert rotate(rotate(p, s), 1) == rotate(p, s + 1)


@given(patterns())
def test_reflect_involution(p):
    assert reflect(reflect(p)) == p


@given(patterns())
def test_format_parse_round_trip(p):
    assert parse(format_pattern(p)) == p


@pytest.mark.parametrize("L", range(2, 11))
def test_round_trip_full_space(L):
    for p in enumerate_states(L):
        assert parse(format_pattern(p)) == p


@given(patterns())
def test_arcs_partition_and_nest(p):
    arcs = match_map(p)
    L = p.L
    points = sorted(x for a in arcs for x in (a.start, a.end))
    expected = [i for i in range(L) if not (isinstance(p, DefectPattern) and i == p.defect)]
    assert points == expected
    for a in arcs:
        assert a.crosses_seam == ((L - 1) in a.covered_gaps)
        assert a.length == (a.end - a.start) % L
        # the covered gaps run start..end-1 cyclically
        assert a.covered_gaps == frozenset((a.start + k) % L for k in range(a.length))
    for a in arcs:
        for b in arcs:
            if a is b:
                continue
            g, h = a.covered_gaps, b.covered_gaps
            assert g <= h or h <= g or not (g & h)
    if isinstance(p, DefectPattern):
        # nothing passes over the defect strand
        for a in arcs:
            inner = {(a.start + k) % L for k in range(1, a.length)}
            assert p.defect not in inner


@given(patterns())
def test_gap_coverage_counts(p):
    # for even L the number of arcs over gap g is the prefix balance through
    # position g minus its minimum
    if isinstance(p, DefectPattern):
        return
    arcs = match_map(p)
    h, bal = [], 0
    for ch in p.word:
        bal += 1 if ch == "(" else -1
        h.append(bal)
    low = min(h)
    for g in range(p.L):
        assert sum(1 for a in arcs if g in a.covered_gaps) == h[g] - low
