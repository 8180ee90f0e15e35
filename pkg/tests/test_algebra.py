import cmath
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from osculate.algebra import (
    I,
    OMEGA,
    GaussianInt,
    OmegaInt,
    RingError,
    charpoly_berkowitz,
    cspp_weighted_enum,
    det_bareiss,
    det_leibniz,
    exact_div,
    is_cyclically_symmetric,
    pascal_charpoly,
    pascal_matrix,
    plane_partitions,
    ring_of,
    shifted_det,
)

small = st.integers(-50, 50)
gauss = st.builds(GaussianInt, small, small)
omega = st.builds(OmegaInt, small, small)
W = cmath.exp(1j * cmath.pi / 3)


@pytest.mark.parametrize("elems", [gauss, omega])
@given(data=st.data())
def test_ring_axioms(elems, data):
    a, b, c = data.draw(elems), data.draw(elems), data.draw(elems)
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == 0 * a
    assert a * 1 == a and 1 * a == a


def test_reduction_rules():
    assert I * I == GaussianInt(-1, 0)
    assert OMEGA * OMEGA == OMEGA - 1
    assert OMEGA**6 == OmegaInt(1, 0)
    assert OMEGA**3 == OmegaInt(-1, 0)
    assert I**-1 == GaussianInt(0, -1)
    assert OMEGA**-1 * OMEGA == OmegaInt(1)


@given(gauss, gauss)
def test_gaussian_matches_complex(a, b):
    assert complex(a * b) == pytest.approx(complex(a) * complex(b))
    assert a.norm() == a.re**2 + a.im**2


@given(omega, omega)
def test_omega_matches_complex(a, b):
    za, zb = a.a + a.b * W, b.a + b.b * W
    assert complex(a * b) == pytest.approx(za * zb, abs=1e-6)
    assert a.norm() == round(abs(za) ** 2)
    assert complex(a.conjugate()) == pytest.approx(za.conjugate(), abs=1e-9)


@given(omega, omega.filter(bool))
def test_exact_division(a, b):
    assert exact_div(a * b, b) == a
    assert exact_div(a * b, b) == (a * b).exact_div(b)


def test_inexact_division_raises():
    with pytest.raises(RingError):
        exact_div(GaussianInt(1, 0), GaussianInt(2, 0))
    with pytest.raises(RingError):
        exact_div(7, 2)


def test_ring_of():
    assert ring_of(3) == "Z"
    assert ring_of(Fraction(1, 2)) == "Q"
    assert ring_of(I) == "Z[i]"
    assert ring_of(OMEGA) == "Z[w]"


def test_pascal_matrix():
    assert pascal_matrix(3) == [[1, 1, 1], [1, 2, 3], [1, 3, 6]]
    for L in range(1, 9):
        P = pascal_matrix(L)
        assert P == [[sympy.binomial(r + s, r) for s in range(L)] for r in range(L)]


def test_charpoly_examples():
    assert pascal_charpoly(2).coeffs == (1, 3, 1)
    assert pascal_charpoly(4).coeffs == (1, 29, 72, 29, 1)


@pytest.mark.parametrize("L", range(1, 13))
def test_charpoly_against_sympy(L):
    x = sympy.Symbol("x")
    ref = sympy.Matrix(pascal_matrix(L)).charpoly(x).all_coeffs()  # det(xI - P), highest first
    C = pascal_charpoly(L).coeffs
    # det(P - xI) = sum C_n (-x)^n  <=>  det(xI - P) = sum C_n (-1)^(L-n) x^n
    assert [abs(int(c)) for c in reversed(ref)] == list(C)
    assert all(c > 0 for c in C) and C[0] == 1 and C[-1] == 1


def test_berkowitz_generic_matrix():
    M = [[2, -1, 0, 3], [1, 0, 4, -2], [0, 5, -3, 1], [7, 1, 1, 0]]
    x = sympy.Symbol("x")
    ref = [int(c) for c in sympy.Matrix(M).charpoly(x).all_coeffs()]
    assert charpoly_berkowitz(M) == ref


@pytest.mark.parametrize("L", range(1, 9))
def test_interpolation_check(L):
    P = pascal_matrix(L)
    C = pascal_charpoly(L)
    for x in range(-3, 4):
        M = [[P[r][c] - (x if r == c else 0) for c in range(L)] for r in range(L)]
        assert det_bareiss(M) == C.evaluate_shift(-x)


@pytest.mark.parametrize("L", range(1, 30))
def test_pascal_determinant_is_one(L):
    assert shifted_det(L, 0) == 1


def test_shifted_det_examples():
    assert shifted_det(2, I) == GaussianInt(0, 3)
    assert I ** -1 * shifted_det(2, I) == GaussianInt(3, 0)
    assert shifted_det(2, OMEGA) == OmegaInt(0, 4)
    assert OMEGA ** -1 * shifted_det(2, OMEGA) == OmegaInt(4, 0)
    assert I ** -2 * shifted_det(4, I) == GaussianInt(70, 0)


@pytest.mark.parametrize("L", range(1, 9))
@pytest.mark.parametrize("s", [1, -2, I, OMEGA, GaussianInt(2, -1), OmegaInt(-1, 3)])
def test_shifted_det_against_elimination(L, s):
    assert shifted_det(L, s, check=True) == shifted_det(L, s)


@pytest.mark.parametrize("L", range(1, 5))
def test_bareiss_vs_leibniz(L):
    P = pascal_matrix(L)
    M = [[OmegaInt(P[r][c], r - c) for c in range(L)] for r in range(L)]
    assert det_bareiss(M, OmegaInt(1)) == det_leibniz(M, OmegaInt(1))


def test_plane_partition_counts():
    # all plane partitions in an n-box: MacMahon's box formula values
    assert [sum(1 for _ in plane_partitions(n)) for n in range(1, 4)] == [2, 20, 980]
    assert [sum(1 for pp in plane_partitions(n) if is_cyclically_symmetric(pp)) for n in range(1, 4)] == [2, 5, 20]


@pytest.mark.parametrize("L", [1, 2, 3])
@pytest.mark.parametrize("s", [1, I, OMEGA])
def test_cspp_matches_determinant(L, s):
    assert cspp_weighted_enum(L, s) == shifted_det(L, s)


def test_cspp_l1():
    assert cspp_weighted_enum(1, OMEGA) == 1 + OMEGA


def test_cspp_guard():
    with pytest.raises(ValueError):
        cspp_weighted_enum(5, 1)
