"""Row-to-row transfer matrix of the dense O(1) loop model and its exact
stationary state.

Vertex stubs are named S, E, W, N.  Horizontal stub E(i) is glued to W(i+1)
(mod L).  Only the two turning tiles exist:

    A: S-E and W-N
    B: S-W and E-N

Tile rows are encoded as integers, bit ``i`` set meaning tile B at vertex i.
Every tile row has weight 2**-L, so a matrix column is a list of integer
counts summing to 2**L.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Sequence as _SequenceABC
from math import lcm
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .patterns import (
    CLOSE,
    OPEN,
    DefectPattern,
    Pattern,
    _from_symbols,
    enumerate_states,
    partner_table,
)

log = logging.getLogger(__name__)

TILE_A = "A"
TILE_B = "B"

# computed columns * 2**L tile rows
DEFAULT_BUDGET = 2 * 10**7
# L <= 13; L = 14..18 need an explicit override
DEFAULT_MAX_STATES = 2000


class ResourceError(RuntimeError):
    """Requested computation exceeds the configured budget."""


class TransferError(RuntimeError):
    """Internal inconsistency in the transfer matrix or its stationary state."""


def tile_mask(tiles: Sequence[str] | str | int, L: int) -> int:
    if isinstance(tiles, int):
        if not 0 <= tiles < (1 << L):
            raise ValueError(f"tile mask {tiles} out of range for L={L}")
        return tiles
    if len(tiles) != L:
        raise ValueError(f"tile row has length {len(tiles)}, pattern has L={L}")
    mask = 0
    for i, t in enumerate(tiles):
        if t == TILE_B:
            mask |= 1 << i
        elif t != TILE_A:
            raise ValueError(f"unknown tile {t!r}")
    return mask


def _trace_row(partner, disp, L, t, defect):
    """Top connectivity of one tile row over a bottom state.

    Returns ``(top_partner, top_disp, new_defect, used_bottom)`` where
    ``used_bottom`` marks the bottom points reached from the top.
    """
    top = [-1] * L
    tdisp = [0] * L
    used = [False] * L
    new_defect = -1
    for p in range(L):
        if top[p] != -1 or p == new_defect:
            continue
        d = 0
        if (t >> p) & 1:  # B: N-E, head right
            j, right, d = (p + 1) % L, True, 1
        else:  # A: N-W, head left
            j, right, d = (p - 1) % L, False, -1
        while True:
            b = (t >> j) & 1
            # entering through W (moving right): A ends at N, B goes down
            # entering through E (moving left): B ends at N, A goes down
            if right != bool(b):
                break
            if j == defect:
                used[j] = True
                new_defect = p
                j = -1
                break
            k = partner[j]
            used[j] = used[k] = True
            d += disp[j]
            if (t >> k) & 1:  # B: S-W
                j, right = (k - 1) % L, False
                d -= 1
            else:  # A: S-E
                j, right = (k + 1) % L, True
                d += 1
        if j == -1:
            continue
        top[p], top[j] = j, p
        tdisp[p], tdisp[j] = d, -d
    return top, tdisp, new_defect, used


def _symbols_from_top(top, tdisp, new_defect, L):
    out = []
    for i in range(L):
        if i == new_defect:
            out.append("|")
        else:
            out.append(OPEN if tdisp[i] > 0 else CLOSE)
    return "".join(out)


def _count_closed(partner, disp, L, t, defect, used):
    """Loops closed by this row: cycles through bottom points not reached from the top."""
    seen = list(used)
    loops = 0
    for s in range(L):
        if seen[s] or s == defect:
            continue
        loops += 1
        j = s
        while not seen[j]:
            k = partner[j]
            seen[j] = seen[k] = True
            if (t >> k) & 1:
                j, right = (k - 1) % L, False
            else:
                j, right = (k + 1) % L, True
            b = (t >> j) & 1
            # a closed cycle never reaches an N stub; it always goes down again
            assert right == bool(b), "closed cycle reached a top stub"
    return loops


def apply_row(c2: Pattern, tiles) -> tuple[Pattern, int]:
    """Continue the lines of ``c2`` through one row of tiles.

    Returns the connectivity of the top stubs and the number of loops the
    row closes against ``c2``.
    """
    L = c2.L
    t = tile_mask(tiles, L)
    partner, disp = partner_table(c2)
    defect = c2.defect if isinstance(c2, DefectPattern) else -1
    top, tdisp, new_defect, used = _trace_row(partner, disp, L, t, defect)
    closed = _count_closed(partner, disp, L, t, defect, used)
    return _from_symbols(_symbols_from_top(top, tdisp, new_defect, L)), closed


def _column_bruteforce(state: Pattern, L: int, index: dict) -> dict[int, int]:
    partner, disp = partner_table(state)
    defect = state.defect if isinstance(state, DefectPattern) else -1
    col: dict[int, int] = {}
    for t in range(1 << L):
        top, tdisp, nd, _ = _trace_row(partner, disp, L, t, defect)
        key = index[_symbols_from_top(top, tdisp, nd, L)]
        col[key] = col.get(key, 0) + 1
    return col


_INF = -2  # partner of an end joined to the open strand


def _join(p, q, u, v, step):
    """Connect ends u and v by a segment of displacement ``step`` (u -> v).

    Slots u and v become free.  Returns True when this closes a loop.
    """
    a, b = p[u], p[v]
    if a == v:
        return True
    if a == _INF and b == _INF:
        raise TransferError("two open strands met")
    if a == _INF:
        p[b], q[b] = _INF, 0
    elif b == _INF:
        p[a], q[a] = _INF, 0
    else:
        d = -q[u] + step + q[v]  # a -> u -> v -> b
        p[a], p[b] = b, a
        q[a], q[b] = d, -d
    return False


def _shift_end(p, q, u, step):
    """Extend the end in slot ``u`` by a segment of displacement ``step``."""
    a = p[u]
    if a == _INF:
        return
    q[u] -= step
    q[a] = -q[u]


def _column_sweep(state: Pattern, L: int, index: dict) -> dict[int, int]:
    """Same column as the brute force, built one vertex at a time.

    Before vertex k the dangling ends are laid out as
    ``[W0, N0..N(k-1), I, S(k)..S(L-1)]`` where W0 is the left stub of
    vertex 0 and I the end of the horizontal edge entering vertex k.  A sweep
    state stores each end's partner slot and the signed displacement along
    the joining path; identical sweep states are merged.
    """
    partner, disp = partner_table(state)
    part0 = [1, 0] + [_INF if partner[i] < 0 else partner[i] + 2 for i in range(L)]
    disp0 = [0, 0] + list(disp)
    states = {(tuple(part0), tuple(disp0)): 1}

    for k in range(L):
        i_slot, s_slot = k + 1, k + 2
        nxt: dict = {}
        for (part, dsp), cnt in states.items():
            for tile in (0, 1):
                p, q = list(part), list(dsp)
                if tile:  # B: S-W and E-N
                    _join(p, q, s_slot, i_slot, 0)
                    p[i_slot], p[s_slot] = s_slot, i_slot
                    q[i_slot] = q[s_slot] = 0
                # A: W-N keeps slot i_slot as N(k); S-E keeps slot s_slot as E(k)
                # E(k) then runs along the horizontal edge to the next vertex
                _shift_end(p, q, s_slot, 1)
                key = (tuple(p), tuple(q))
                nxt[key] = nxt.get(key, 0) + cnt
        states = nxt

    col: dict[int, int] = {}
    last = L + 1
    for (part, dsp), cnt in states.items():
        p, q = list(part), list(dsp)
        _join(p, q, last, 0, 0)
        chars = []
        for i in range(1, L + 1):
            if p[i] == _INF:
                chars.append("|")
            else:
                chars.append(OPEN if q[i] > 0 else CLOSE)
        key = index["".join(chars)]
        col[key] = col.get(key, 0) + cnt
    return col


@dataclass
class TransitionMatrix:
    """Sparse integer transfer matrix; probabilities are ``count / 2**L``.

    ``columns[j]`` maps target index -> number of tile rows taking
    ``states[j]`` to that target.
    """

    L: int
    states: list
    columns: Sequence[dict[int, int]]
    index: dict = field(repr=False, default_factory=dict)
    perms: list | None = field(repr=False, default=None)  # symmetry permutations, if known

    @property
    def denominator(self) -> int:
        return 1 << self.L

    def __len__(self) -> int:
        return len(self.states)

    def column_sums(self) -> list[int]:
        return [sum(c.values()) for c in self.columns]

    def probability(self, target: Pattern, source: Pattern) -> Fraction:
        j = self.index[source.symbols]
        return Fraction(self.columns[j].get(self.index[target.symbols], 0), self.denominator)

    def apply(self, x: Sequence) -> list:
        """Exact product M @ x (M including the 2**-L weight)."""
        out = [0] * len(self.states)
        for j, col in enumerate(self.columns):
            xj = x[j]
            if not xj:
                continue
            for i, k in col.items():
                out[i] += k * xj
        den = self.denominator
        return [Fraction(v) / den for v in out]

    def to_dense(self) -> np.ndarray:
        n = len(self.states)
        m = np.zeros((n, n), dtype=np.int64)
        for j, col in enumerate(self.columns):
            for i, k in col.items():
                m[i, j] = k
        return m


class _OrbitColumns(_SequenceABC):
    """Columns produced on demand from one stored column per symmetry orbit."""

    def __init__(self, stored: dict, source: list, perms: list):
        self.stored = stored  # representative -> column
        self.source = source  # j -> (permutation number, representative)
        self.perms = perms

    def __len__(self) -> int:
        return len(self.source)

    def __getitem__(self, j):
        if isinstance(j, slice):
            return [self[k] for k in range(*j.indices(len(self)))]
        g, r = self.source[j]
        col = self.stored[r]
        if g == 0:
            return col
        p = self.perms[g]
        return {p[i]: k for i, k in col.items()}


def _state_index(states) -> dict:
    return {s.symbols: i for i, s in enumerate(states)}


_MIRROR = str.maketrans({OPEN: CLOSE, CLOSE: OPEN})


def symmetry_permutations(states, index: dict) -> list[list[int]]:
    """Index permutations for every rotation, with and without reflection."""
    L = len(states[0].symbols)
    syms = [s.symbols for s in states]
    mirrored = [t[::-1].translate(_MIRROR) for t in syms]
    perms = []
    for base in (syms, mirrored):
        for r in range(L):
            # rotation by r: symbol at i moves to i + r
            perms.append([index[t[L - r:] + t[:L - r]] for t in base])
    return perms


def orbit_representatives(tm_states, index: dict, perms=None) -> tuple[list[int], list[int]]:
    """(representative index per state, sorted list of representatives)."""
    if perms is None:
        perms = symmetry_permutations(tm_states, index)
    rep = [-1] * len(tm_states)
    reps = []
    for j in range(len(tm_states)):
        if rep[j] >= 0:
            continue
        reps.append(j)
        for g in perms:
            rep[g[j]] = j
    return rep, reps


def transition_matrix(
    L: int,
    method: str = "bruteforce",
    budget: int | None = DEFAULT_BUDGET,
    sources: Iterable[int] | None = None,
    symmetric_fill: bool = False,
    workers: int = 1,
) -> TransitionMatrix:
    """Build the transfer matrix over all connectivity states of circumference L.

    ``method`` is ``"bruteforce"`` (all 2**L tile rows per column) or
    ``"sweep"`` (vertex-by-vertex with merged intermediate states).  With
    ``sources`` only those columns are filled; the rest stay empty.  With
    ``symmetric_fill`` one column per rotation/reflection orbit is computed
    and the others are obtained by relabelling.  ``budget`` bounds
    ``columns computed * 2**L``; ``None`` lifts it.
    """
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    states = enumerate_states(L)
    index = _state_index(states)
    perms = rep = None
    if sources is not None:
        wanted = sorted(set(sources))
    elif symmetric_fill:
        perms = symmetry_permutations(states, index)
        rep, wanted = orbit_representatives(states, index, perms)
    else:
        wanted = list(range(len(states)))
    cost = len(wanted) << L
    if budget is not None and cost > budget:
        raise ResourceError(
            f"L={L} needs {len(wanted)} columns x 2^{L} tile rows = {cost} > budget {budget}"
        )
    build = {"bruteforce": _column_bruteforce, "sweep": _column_sweep}[method]
    computed: dict[int, dict[int, int]] = {}
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            futs = {j: ex.submit(build, states[j], L, index) for j in wanted}
            for j in wanted:
                computed[j] = futs[j].result()
    else:
        for j in wanted:
            computed[j] = build(states[j], L, index)
    if perms is not None:
        # perms[0] is the identity, so representatives map to themselves
        source: list = [None] * len(states)
        for j in wanted:
            for g, p in enumerate(perms):
                if source[p[j]] is None:
                    source[p[j]] = (g, j)
        return TransitionMatrix(L, states, _OrbitColumns(computed, source, perms), index, perms)
    columns = [computed.get(j, {}) for j in range(len(states))]
    return TransitionMatrix(L, states, columns, index)


def is_irreducible(tm: TransitionMatrix) -> bool:
    """Strong connectivity of the support graph.

    Forward reachability from state 0 is checked on the full graph.  For the
    backward direction, when the symmetry permutations are known, the
    quotient graph on orbits suffices: the support is invariant under the
    symmetries, so an orbit path lifts from any of its members, and 0
    reaching every state gives g(0) -> 0 for every symmetry g.
    """
    n = len(tm)

    def reach(start, adj, size):
        seen = bytearray(size)
        seen[start] = 1
        todo = deque([start])
        count = 1
        while todo:
            u = todo.popleft()
            for v in adj(u):
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    todo.append(v)
        return count == size

    if not reach(0, lambda u: [i for i, k in tm.columns[u].items() if k], n):
        return False
    if tm.perms is None:
        bwd = [[] for _ in range(n)]
        for j, col in enumerate(tm.columns):
            for i, k in col.items():
                if k:
                    bwd[i].append(j)
        return reach(0, bwd.__getitem__, n)
    rep, reps = orbit_representatives(tm.states, tm.index, tm.perms)
    pos = {r: o for o, r in enumerate(reps)}
    orbit = [pos[r] for r in rep]
    qbwd: list[set] = [set() for _ in reps]
    for o, r in enumerate(reps):
        for i, k in tm.columns[r].items():
            if k:
                qbwd[orbit[i]].add(o)
    return reach(orbit[0], qbwd.__getitem__, len(reps))


def nullspace(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the right nullspace of a rational matrix by exact Gauss-Jordan elimination.

    Pivot choice: the candidate with the largest-magnitude numerator.
    """
    a = [[Fraction(v) for v in r] for r in rows]
    m = len(a)
    n = len(a[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        best = None
        for i in range(r, m):
            v = a[i][c]
            if v and (best is None or abs(v.numerator) > abs(a[best][c].numerator)):
                best = i
        if best is None:
            continue
        a[r], a[best] = a[best], a[r]
        piv = a[r][c]
        a[r] = [v / piv for v in a[r]]
        for i in range(m):
            if i != r and a[i][c]:
                f = a[i][c]
                ri = a[i]
                rr = a[r]
                a[i] = [x - f * y for x, y in zip(ri, rr)]
        pivots.append(c)
        r += 1
        if r == m:
            break
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis


@dataclass
class Distribution:
    """Exact probability of every connectivity state at one circumference."""

    L: int
    probs: dict  # Pattern -> Fraction

    def __getitem__(self, p: Pattern) -> Fraction:
        return self.probs[p]

    def __iter__(self):
        return iter(self.probs)

    def __len__(self) -> int:
        return len(self.probs)

    def items(self):
        return self.probs.items()

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def minimum(self) -> Fraction:
        return min(self.probs.values())

    def maximum(self) -> Fraction:
        return max(self.probs.values())

    def argmax(self) -> list[Pattern]:
        top = self.maximum()
        return [p for p, v in self.probs.items() if v == top]

    def argmin(self) -> list[Pattern]:
        low = self.minimum()
        return [p for p, v in self.probs.items() if v == low]

    def ratios(self) -> dict:
        """Each probability divided by the smallest one (exact)."""
        low = self.minimum()
        return {p: v / low for p, v in self.probs.items()}

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "entries": [
                {"pattern": p.symbols, "p": f"{v.numerator}/{v.denominator}", "decimal": float(v)}
                for p, v in self.probs.items()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Distribution":
        from .patterns import parse

        probs = {parse(e["pattern"]): Fraction(e["p"]) for e in data["entries"]}
        return cls(int(data["L"]), probs)


def _lumped_system(tm: TransitionMatrix):
    """Integer system for orbit weights y: (K - 2**L) y = 0 with the last row
    replaced by sum(y) = 1.

    K[o', o] sums M[c1, rep(o)] over c1 in o'.  This lumping is valid because
    the dynamics commute with the cylinder symmetries; callers re-check
    stationarity on the full matrix.
    """
    perms = tm.perms or symmetry_permutations(tm.states, tm.index)
    rep, reps = orbit_representatives(tm.states, tm.index, perms)
    pos = {r: o for o, r in enumerate(reps)}
    orbit_of = [pos[r] for r in rep]
    n = len(reps)
    den = tm.denominator
    K = [[0] * n for _ in range(n)]
    for o, r in enumerate(reps):
        if not tm.columns[r]:
            raise TransferError(f"column {r} missing")
        for i, k in tm.columns[r].items():
            K[orbit_of[i]][o] += k
    for o in range(n):
        K[o][o] -= den
    K[-1] = [1] * n
    sizes = [0] * n
    for o in orbit_of:
        sizes[o] += 1
    return K, orbit_of, sizes


def _expand(tm, y, orbit_of, sizes):
    return [y[o] / sizes[o] for o in orbit_of]


def _lumped_solve(tm: TransitionMatrix) -> list[Fraction]:
    K, orbit_of, sizes = _lumped_system(tm)
    n = len(K)
    aug = [[Fraction(v) for v in row] + [Fraction(1 if i == n - 1 else 0)] for i, row in enumerate(K)]
    null = nullspace(aug)
    if len(null) != 1:
        raise TransferError(f"lumped system has nullspace dimension {len(null)}")
    v = null[0]
    y = [-c / v[-1] for c in v[:-1]]
    return _expand(tm, y, orbit_of, sizes)


# primes just below 2**31, so products of residues fit in int64
_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549,
           2147483543, 2147483497, 2147483489, 2147483477, 2147483423, 2147483399)


def _solve_mod(K: list[list[int]], p: int) -> list[int] | None:
    """Solve K y = e_last modulo p; None when K is singular mod p."""
    n = len(K)
    a = np.array([[v % p for v in row] + [1 if i == n - 1 else 0] for i, row in enumerate(K)], dtype=np.int64)
    for c in range(n):
        nz = np.nonzero(a[c:, c])[0]
        if nz.size == 0:
            return None
        r = c + nz[0]
        if r != c:
            a[[c, r]] = a[[r, c]]
        inv = pow(int(a[c, c]), -1, p)
        a[c] = (a[c] * inv) % p
        f = a[:, c].copy()
        f[c] = 0
        a = (a - (f[:, None] * a[c][None, :]) % p) % p
    return a[:, n].tolist()


def _rational_reconstruct(u: int, m: int) -> Fraction | None:
    """Fraction n/d with |n|, d <= sqrt(m/2) and n = u d (mod m), if any."""
    bound = int((m // 2) ** 0.5)
    r0, r1 = m, u % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def _modular_solve(tm: TransitionMatrix) -> list[Fraction]:
    """Lumped system solved modulo several primes, combined by CRT and
    rational reconstruction; accepted only after exact verification."""
    K, orbit_of, sizes = _lumped_system(tm)
    residues, modulus = None, 1
    for p in _PRIMES:
        sol = _solve_mod(K, p)
        if sol is None:
            continue
        if residues is None:
            residues, modulus = sol, p
        else:
            # CRT merge
            inv = pow(modulus, -1, p)
            residues = [r + modulus * (((s - r) * inv) % p) for r, s in zip(residues, sol)]
            modulus *= p
        y = [_rational_reconstruct(r, modulus) for r in residues]
        if any(v is None for v in y):
            continue
        x = _expand(tm, y, orbit_of, sizes)
        if verify_stationary(tm, x):
            return x
    raise TransferError("modular solve did not converge within the prime table")


def _full_solve(tm: TransitionMatrix) -> list[Fraction]:
    n = len(tm)
    den = tm.denominator
    dense = [[Fraction(0)] * n for _ in range(n)]
    for j, col in enumerate(tm.columns):
        for i, k in col.items():
            dense[i][j] += k
    for i in range(n):
        dense[i][i] -= den
    null = nullspace(dense)
    if len(null) != 1:
        raise TransferError(f"stationary equation has nullspace dimension {len(null)}")
    v = null[0]
    s = sum(v)
    return [c / s for c in v]


def verify_stationary(tm: TransitionMatrix, x: Sequence[Fraction]) -> bool:
    """Exact check of M x = x and sum(x) = 1."""
    if sum(x) != 1:
        return False
    common = 1
    for v in x:
        common = lcm(common, v.denominator)
    X = [int(v * common) for v in x]
    out = [0] * len(X)
    for j, col in enumerate(tm.columns):
        for i, k in col.items():
            out[i] += k * X[j]
    den = tm.denominator
    return all(o == den * xi for o, xi in zip(out, X))


SOLVERS = {"lumped": _lumped_solve, "modular": _modular_solve, "full": _full_solve}


def stationary(
    L: int,
    method: str | None = None,
    build: str | None = None,
    budget: int | None = DEFAULT_BUDGET,
    max_states: int | None = DEFAULT_MAX_STATES,
    symmetric_fill: bool | None = None,
    tm: TransitionMatrix | None = None,
) -> Distribution:
    """Exact stationary distribution over connectivity states.

    ``method`` selects the solve: ``"lumped"`` (symmetry-reduced exact
    elimination), ``"modular"`` (the same system via residues and rational
    reconstruction) or ``"full"`` (exact elimination on the whole matrix).
    ``build`` chooses the matrix construction; by default brute force up
    to L=8 and the vertex sweep beyond.  Above ``max_states`` states the
    call is refused unless the guard is lifted with ``None``.
    """
    if tm is None:
        n = len(enumerate_states(L))
        if max_states is not None and n > max_states:
            raise ResourceError(f"L={L} has {n} states > max_states={max_states}")
        if build is None:
            build = "bruteforce" if L <= 8 else "sweep"
        if symmetric_fill is None:
            symmetric_fill = n > DEFAULT_MAX_STATES
        tm = transition_matrix(L, method=build, budget=budget, symmetric_fill=symmetric_fill)
    if method is None:
        method = "lumped" if L <= 12 else "modular"
    if any(s != tm.denominator for s in tm.column_sums()):
        raise TransferError("transfer matrix is not column stochastic")
    if not is_irreducible(tm):
        raise TransferError(f"transfer matrix at L={tm.L} is not irreducible")
    x = SOLVERS[method](tm)
    if not verify_stationary(tm, x):
        raise TransferError("solution fails M x = x")
    if min(x) <= 0:
        raise TransferError("non-positive stationary probability")
    log.debug("stationary L=%d: %d states, min 1/%s", tm.L, len(x), 1 / min(x))
    return Distribution(tm.L, dict(zip(tm.states, x)))
