"""Exact arithmetic: Gaussian integers, the ring Z[w] with w = exp(i pi/3),
characteristic polynomials of Pascal matrices and shifted determinants.

Plain ``int`` and ``fractions.Fraction`` serve as Z and Q.  The two
quadratic rings are small immutable value types that interoperate with
``int`` on either side of an operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import permutations
from operator import mul
from typing import Sequence, Union

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int


class RingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GaussianInt:
    """re + im*i with i**2 = -1."""

    re: int
    im: int = 0

    ring = "Z[i]"

    @classmethod
    def coerce(cls, x) -> "GaussianInt":
        if isinstance(x, GaussianInt):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        return NotImplemented

    def __add__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return GaussianInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __sub__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return GaussianInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, o):
        if isinstance(o, int):
            return GaussianInt(self.re * o, self.im * o)
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return GaussianInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.unit_inverse() ** (-n)
        return _power(self, n, GaussianInt(1, 0))

    def __eq__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re or self.im)

    def conjugate(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def exact_div(self, o) -> "GaussianInt":
        o = self.coerce(o)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[i]")
        num = self * o.conjugate()
        if num.re % n or num.im % n:
            raise RingError(f"{self} is not divisible by {o} in Z[i]")
        return GaussianInt(num.re // n, num.im // n)

    def unit_inverse(self) -> "GaussianInt":
        if self.norm() != 1:
            raise RingError(f"{self} is not a unit")
        return self.conjugate()

    def is_rational_integer(self) -> bool:
        return self.im == 0

    def __complex__(self):
        return complex(self.re, self.im)

    def __str__(self):
        return _fmt_linear(self.re, self.im, "i")


@dataclass(frozen=True)
class OmegaInt:
    """a + b*w with w = exp(i pi/3), so w**2 = w - 1 and w**6 = 1."""

    a: int
    b: int = 0

    ring = "Z[w]"

    @classmethod
    def coerce(cls, x) -> "OmegaInt":
        if isinstance(x, OmegaInt):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        return NotImplemented

    def __add__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return OmegaInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return OmegaInt(-self.a, -self.b)

    def __sub__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return OmegaInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, o):
        if isinstance(o, int):
            return OmegaInt(self.a * o, self.b * o)
        o = self.coerce(o)
        if o is NotImplemented:
            return o
        # (a + b w)(c + d w) = ac + (ad + bc) w + bd (w - 1)
        bd = self.b * o.b
        return OmegaInt(self.a * o.a - bd, self.a * o.b + self.b * o.a + bd)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.unit_inverse() ** (-n)
        return _power(self, n, OmegaInt(1, 0))

    def __eq__(self, o):
        o = self.coerce(o)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, "w"))

    def __bool__(self):
        return bool(self.a or self.b)

    def conjugate(self) -> "OmegaInt":
        # conj(w) = 1 - w
        return OmegaInt(self.a + self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a + self.a * self.b + self.b * self.b

    def exact_div(self, o) -> "OmegaInt":
        o = self.coerce(o)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[w]")
        num = self * o.conjugate()
        if num.a % n or num.b % n:
            raise RingError(f"{self} is not divisible by {o} in Z[w]")
        return OmegaInt(num.a // n, num.b // n)

    def unit_inverse(self) -> "OmegaInt":
        if self.norm() != 1:
            raise RingError(f"{self} is not a unit")
        return self.conjugate()

    def is_rational_integer(self) -> bool:
        return self.b == 0

    def __complex__(self):
        return self.a + self.b * complex(0.5, 3**0.5 / 2)

    def __str__(self):
        return _fmt_linear(self.a, self.b, "w")


I = GaussianInt(0, 1)
OMEGA = OmegaInt(0, 1)

Scalar = Union[int, Fraction, GaussianInt, OmegaInt]


def ring_of(x: Scalar) -> str:
    if isinstance(x, bool):
        raise TypeError("bool is not a ring element")
    if isinstance(x, int):
        return "Z"
    if isinstance(x, Fraction):
        return "Q"
    return x.ring


def _fmt_linear(x: int, y: int, sym: str) -> str:
    if y == 0:
        return str(x)
    if x == 0:
        return f"{y}{sym}"
    return f"{x}{'+' if y > 0 else '-'}{abs(y)}{sym}"


def _power(x, n, one):
    result = one
    while n:
        if n & 1:
            result = result * x
        x = x * x
        n >>= 1
    return result


def exact_div(a, b):
    """Exact quotient in the ring of ``a`` and ``b``; raises if not exact."""
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise RingError(f"{a} is not divisible by {b}")
        return q
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        return Fraction(a) / Fraction(b)
    if isinstance(a, int):
        a = type(b).coerce(a)
    return a.exact_div(b)


# -- matrices ---------------------------------------------------------------


def pascal_matrix(L: int) -> list[list[int]]:
    """Symmetric Pascal matrix binom(r+s, r), 0 <= r, s < L, by the additive recurrence."""
    m = [[1] * L for _ in range(L)]
    for r in range(1, L):
        for s in range(1, L):
            m[r][s] = m[r - 1][s] + m[r][s - 1]
    return m


def det_bareiss(matrix: Sequence[Sequence], one=1):
    """Fraction-free determinant over an integral domain with exact division."""
    n = len(matrix)
    if n == 0:
        return one
    a = [list(row) for row in matrix]
    sign = 1
    prev = one
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0 * one
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = exact_div(akk * row_i[j] - aik * row_k[j], prev)
        prev = akk
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def det_leibniz(matrix: Sequence[Sequence], one=1):
    """Permutation expansion; only for tiny matrices (used as an oracle)."""
    n = len(matrix)
    total = 0 * one
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = reduce(mul, (matrix[i][perm[i]] for i in range(n)), one)
        total = total + term if inv % 2 == 0 else total - term
    return total


def _berkowitz_step(A: list[list[int]], col: list[int], row: list[int], corner: int, prev: list[int]) -> list[int]:
    """Char poly of [[A, col], [row, corner]] from the char poly ``prev`` of A.

    Polynomials are coefficient lists of det(xI - M), highest degree first.
    """
    k = len(A)
    # first column of the Toeplitz factor: 1, -corner, -row A^j col (j = 0..k-1)
    toe = [1, -corner]
    v = list(col)
    for j in range(k):
        toe.append(-sum(map(mul, row, v)))
        if j + 1 < k:
            v = [sum(map(mul, r, v)) for r in A]
    # lower-triangular Toeplitz (k+2) x (k+1) times prev
    return [sum(toe[i - j] * prev[j] for j in range(min(i, k) + 1)) for i in range(k + 2)]


def charpoly_berkowitz(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Division-free characteristic polynomial det(xI - M), highest degree first."""
    n = len(matrix)
    poly = [1]
    for k in range(n):
        A = [list(matrix[i][:k]) for i in range(k)]
        col = [matrix[i][k] for i in range(k)]
        row = [matrix[k][j] for j in range(k)]
        poly = _berkowitz_step(A, col, row, matrix[k][k], poly)
    return poly


@dataclass(frozen=True)
class CharPoly:
    """Absolute coefficients of det(Pascal_L - xI) = sum C_n (-x)^n."""

    L: int
    coeffs: tuple[int, ...]  # C_0 .. C_L

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def evaluate_shift(self, s: Scalar):
        """det(Pascal_L + s I) = sum C_n s^n, by Horner."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def is_palindromic(self) -> bool:
        return self.coeffs == self.coeffs[::-1]

    def to_csv(self) -> str:
        lines = ["n,C_n"]
        lines += [f"{n},{c}" for n, c in enumerate(self.coeffs)]
        return "\n".join(lines) + "\n"


class _PascalTable:
    """Char polys of all Pascal matrices up to the largest size requested.

    The L x L Pascal matrix is the leading block of every larger one, so
    bordering it at the bottom-right and applying one Berkowitz step per size
    yields the whole family.  Symmetry gives row A^j col = (A^a col).(A^b col)
    with a + b = j, so each step needs only about k/2 matrix-vector products.
    """

    def __init__(self):
        self.polys: list[list[int]] = [[1]]
        self._raw = [[_mpz(1)]]

    def get(self, L: int) -> list[int]:
        if L >= len(self.polys):
            P = [[_mpz(v) for v in row] for row in pascal_matrix(L)]
            for k in range(len(self.polys) - 1, L):
                A = [row[:k] for row in P[:k]]
                krylov = [[P[i][k] for i in range(k)]]
                for _ in range(k // 2):
                    v = krylov[-1]
                    krylov.append([sum(map(mul, r, v)) for r in A])
                toe = [_mpz(1), -P[k][k]]
                for j in range(k):
                    a = (j + 1) // 2
                    toe.append(-sum(map(mul, krylov[a], krylov[j - a])))
                prev = self._raw[k]
                nxt = [sum(toe[i - j] * prev[j] for j in range(min(i, k) + 1)) for i in range(k + 2)]
                self._raw.append(nxt)
                self.polys.append([int(v) for v in nxt])
        return self.polys[L]


_TABLE = _PascalTable()


def pascal_charpoly(L: int) -> CharPoly:
    """Coefficients C_0(L)..C_L(L) of the Pascal characteristic polynomial."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    c = _TABLE.get(L)  # det(xI - P) = sum_j c[j] x^(L-j)
    coeffs = tuple((-1) ** (L - n) * c[L - n] for n in range(L + 1))
    if any(v <= 0 for v in coeffs):
        raise RingError(f"unexpected sign pattern in Pascal char poly at L={L}")
    return CharPoly(L, coeffs)


def shifted_det(L: int, s: Scalar, check: bool = False):
    """det(binom(r+s-2, r-1) + s delta) through the characteristic polynomial.

    With ``check`` the value is recomputed by fraction-free elimination
    (L <= 8 only).
    """
    value = pascal_charpoly(L).evaluate_shift(s)
    if check:
        if L > 8:
            raise ValueError("elimination cross-check is limited to L <= 8")
        one = s ** 0 if not isinstance(s, (int, Fraction)) else 1
        P = pascal_matrix(L)
        M = [[P[r][c] + (s if r == c else 0) for c in range(L)] for r in range(L)]
        M = [[x * one for x in row] for row in M]
        other = det_bareiss(M, one)
        if other != value:
            raise RingError(f"shifted_det mismatch at L={L}: {value} vs {other}")
    return value


# -- cyclically symmetric plane partitions -----------------------------------

MAX_CSPP_BOX = 4


def plane_partitions(L: int):
    """All plane partitions fitting an L x L x L box, as tuples of row tuples."""

    def rows_below(bound):
        # weakly decreasing rows with row[k] <= bound[k]
        def rec(k, cap, acc):
            if k == L:
                yield tuple(acc)
                return
            for v in range(min(cap, bound[k]), -1, -1):
                acc.append(v)
                yield from rec(k + 1, v, acc)
                acc.pop()

        yield from rec(0, L, [])

    def rec_rows(j, prev, acc):
        if j == L:
            yield tuple(acc)
            return
        for row in rows_below(prev):
            acc.append(row)
            yield from rec_rows(j + 1, row, acc)
            acc.pop()

    yield from rec_rows(0, (L,) * L, [])


def is_cyclically_symmetric(pp) -> bool:
    """Cube set {(x, y, z): z < n[x][y]} invariant under (x, y, z) -> (y, z, x)."""
    L = len(pp)
    for x in range(L):
        for y in range(L):
            h = pp[x][y]
            for z in range(L):
                if (z < h) != (x < pp[y][z]):
                    return False
    return True


def cspp_weighted_enum(L: int, s: Scalar):
    """Sum over cyclically symmetric plane partitions in the L-box of s**(diagonal cubes)."""
    if L > MAX_CSPP_BOX:
        raise ValueError(f"brute-force CSPP enumeration is limited to L <= {MAX_CSPP_BOX}")
    counts = [0] * (L + 1)
    for pp in plane_partitions(L):
        if is_cyclically_symmetric(pp):
            counts[sum(1 for t in range(L) if t < pp[t][t])] += 1
    total = 0
    for n, c in enumerate(counts):
        if c:
            total = total + c * s**n
    return total
