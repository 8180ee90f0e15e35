"""Monte Carlo for osculating walkers and the loop gas on a cylinder.

Lattice vertices are (x, y) with x taken mod L.  Tiles as in the transfer
module: A pairs S-E and W-N, B pairs S-W and E-N, each with probability 1/2.

Randomness is organised in fixed-size blocks of samples; block ``b`` draws
from a generator seeded with ``(seed, b)``, so results do not depend on how
blocks are distributed over workers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

N, E, S, W = 0, 1, 2, 3
_DX = (0, 1, 0, -1)
_DY = (1, 0, -1, 0)
_OPPOSITE = (S, W, N, E)
# exit stub for each entry stub; index [tile][entry]
_EXIT = (
    (W, S, E, N),  # A: N-W, E-S, S-E, W-N
    (E, N, W, S),  # B: N-E, E-N, S-W, W-S
)

BLOCK = 10_000
STEP_CAP = 10**8


class WalkError(RuntimeError):
    pass


@dataclass
class WalkOutcome:
    """Result of one walk.

    ``visited_left_neighbor`` refers to the vertical edge one column to the
    left of the starting edge, in the same row.  The two vertex readings
    (left of the first vertex, and left of the vertex below the starting
    edge) are kept for comparison.
    """

    wound: bool
    visited_left_neighbor: bool
    steps: int
    visited_left_vertex: bool = False
    visited_left_vertex_below: bool = False


@dataclass
class McEstimate:
    observable: str
    L: int
    samples: int
    hits: int
    seed: int
    height: int | None = None
    censored: int = 0

    @property
    def mean(self) -> float:
        return self.hits / self.samples if self.samples else float("nan")

    @property
    def stderr(self) -> float:
        p = self.mean
        return math.sqrt(p * (1 - p) / self.samples) if self.samples else float("nan")

    def zscore(self, expected: float) -> float:
        se = self.stderr
        if se == 0:
            return 0.0 if self.mean == expected else math.inf
        return (self.mean - expected) / se

    def to_json(self) -> dict:
        d = asdict(self)
        d["mean"] = self.mean
        d["stderr"] = self.stderr
        return d


class _Bits:
    """Fair random bits drawn from a numpy generator in bulk."""

    def __init__(self, rng: np.random.Generator, chunk: int = 1 << 14):
        self.rng = rng
        self.chunk = chunk
        self._buf: list[int] = []
        self._pos = 0

    def __call__(self) -> int:
        if self._pos == len(self._buf):
            self._buf = self.rng.integers(0, 2, size=self.chunk, dtype=np.uint8).tolist()
            self._pos = 0
        b = self._buf[self._pos]
        self._pos += 1
        return b


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([seed, block])


def walk_single(L: int, bits) -> WalkOutcome:
    """One osculating walk on the infinite cylinder of circumference L.

    The walker starts on the vertical edge below vertex (0, 0), moving up,
    and stops when it is about to run along that edge again.  ``bits`` is a
    callable returning fair 0/1 values (a :class:`_Bits` or anything alike).
    Only visited vertices are stored.
    """
    if L < 2 or L % 2:
        raise ValueError(f"walks close with probability one only for even L >= 2, got {L}")
    if isinstance(bits, np.random.Generator):
        bits = _Bits(bits)
    left = L - 1
    tiles: dict[tuple[int, int], int] = {}
    x, y, X = 0, 0, 0
    entry = S
    steps = 1
    hit_edge = False
    while True:
        key = (x, y)
        t = tiles.get(key)
        if t is None:
            t = bits()
            tiles[key] = t
        out = _EXIT[t][entry]
        if x == left and ((out == S and y == 0) or (out == N and y == -1)):
            hit_edge = True
        dx = _DX[out]
        x = (x + dx) % L
        X += dx
        y += _DY[out]
        entry = _OPPOSITE[out]
        steps += 1
        if x == 0 and y == 0 and entry == S:
            break
        if steps > STEP_CAP:
            raise WalkError(f"walk exceeded {STEP_CAP} steps")
    return WalkOutcome(
        wound=X != 0,
        visited_left_neighbor=hit_edge,
        steps=steps - 1,
        visited_left_vertex=(left, 0) in tiles,
        visited_left_vertex_below=(left, -1) in tiles,
    )


def _walk_block(L: int, seed: int, block: int, count: int) -> tuple[int, int, int, int, int]:
    bits = _Bits(block_rng(seed, block))
    wound = edge = vert = below = steps = 0
    for _ in range(count):
        w = walk_single(L, bits)
        wound += w.wound
        edge += w.visited_left_neighbor
        vert += w.visited_left_vertex
        below += w.visited_left_vertex_below
        steps += w.steps
    return wound, edge, vert, below, steps


def _blocks(samples: int):
    full, rest = divmod(samples, BLOCK)
    sizes = [BLOCK] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _run_blocks(fn, args_list, workers: int):
    if workers <= 1:
        return [fn(*a) for a in args_list]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(workers) as ex:
        futs = [ex.submit(fn, *a) for a in args_list]
        return [f.result() for f in futs]


NEIGHBOR_MODES = ("edge", "vertex", "vertex-below")


def estimate_walks(L: int, samples: int, seed: int = 0, workers: int = 1) -> dict[str, McEstimate]:
    """Winding and left-neighbour frequencies of independent walks.

    Keys: ``"winding"``, ``"neighbor"`` (edge reading) and
    ``"neighbor-vertex"`` / ``"neighbor-vertex-below"`` for the alternatives.
    """
    parts = _run_blocks(_walk_block, [(L, seed, b, n) for b, n in _blocks(samples)], workers)
    tot = [sum(p[i] for p in parts) for i in range(5)]
    out = {
        "winding": McEstimate("winding", L, samples, tot[0], seed),
        "neighbor": McEstimate("neighbor", L, samples, tot[1], seed),
        "neighbor-vertex": McEstimate("neighbor-vertex", L, samples, tot[2], seed),
        "neighbor-vertex-below": McEstimate("neighbor-vertex-below", L, samples, tot[3], seed),
    }
    return out


# -- finite strips ------------------------------------------------------------


@dataclass
class StripPath:
    """A loop or boundary-to-boundary strand of a strip sample."""

    closed: bool
    ends: tuple = ()  # boundary sides reached ("bottom"/"top") for open paths
    displacement: int = 0
    cut_points: set = field(default_factory=set)
    ray_crossings: int = 0  # horizontal edges crossed by the upward ray from the probe face

    @property
    def winds(self) -> bool:
        return self.closed and self.displacement != 0

    @property
    def spans(self) -> bool:
        return not self.closed and sorted(self.ends) == ["bottom", "top"]


@dataclass
class StripSample:
    L: int
    H: int
    tiles: list  # tiles[y][x], 1 = B
    cut: int  # vertical edges (x, cut) join rows cut-1 and cut

    def _walk(self, x, y, entry, stop):
        """Follow the line entering vertex (x, y) through ``entry``.

        Returns (status, path pieces) where status is "closed" when the
        starting edge is reached again, else the boundary side.
        """
        L, H, tiles, cut = self.L, self.H, self.tiles, self.cut
        X = 0
        cuts = set()
        ray = 0
        while True:
            if y < 0:
                return "bottom", X, cuts, ray
            if y >= H:
                return "top", X, cuts, ray
            out = _EXIT[tiles[y][x]][entry]
            if out == N:
                ny = y + 1
                if ny == cut:
                    cuts.add(x)
                x2, y2 = x, ny
            elif out == S:
                if y == cut:
                    cuts.add(x)
                x2, y2 = x, y - 1
            elif out == E:
                if x == 0 and y >= cut:
                    ray += 1
                X += 1
                x2, y2 = (x + 1) % L, y
            else:
                if x == 1 % L and y >= cut and L > 1:
                    ray += 1
                X -= 1
                x2, y2 = (x - 1) % L, y
            entry = _OPPOSITE[out]
            if (x2, y2, entry) == stop:
                return "closed", X, cuts, ray
            x, y = x2, y2

    def path_through(self, x: int) -> StripPath:
        """Loop or strand containing the vertical cut edge at column x."""
        cut = self.cut
        # upward from the edge into vertex (x, cut)
        status, X, cuts, ray = self._walk(x, cut, S, (x, cut, S))
        cuts.add(x)
        if status == "closed":
            return StripPath(True, (), X, cuts, ray)
        status2, X2, cuts2, ray2 = self._walk(x, cut - 1, N, (x, cut - 1, N))
        return StripPath(False, (status, status2), X - X2, cuts | cuts2, ray + ray2)

    def central_paths(self) -> list[StripPath]:
        paths = []
        seen: set = set()
        for x in range(self.L):
            if x in seen:
                continue
            p = self.path_through(x)
            seen |= p.cut_points
            paths.append(p)
        return paths

    def surround_count(self, policy: str = "contractible-only") -> int | None:
        """Loops around the face between cut edges 0 and 1, or None if censored."""
        m = 0
        for p in self.central_paths():
            if not p.closed:
                return None
            if p.winds:
                m += policy == "contractible-plus-winding"
            else:
                m += p.ray_crossings % 2
        return m


def strip_sample(L: int, H: int, rng: np.random.Generator) -> StripSample:
    """An L x H strip of fair tiles, periodic across, open at top and bottom."""
    tiles = rng.integers(0, 2, size=(H, L), dtype=np.int8).tolist()
    return StripSample(L, H, tiles, H // 2)


def trace_strip(sample: StripSample) -> dict:
    """Label every edge of the strip with the component that runs along it.

    Edges are ``("v", x, y)`` for the vertical edge entering vertex (x, y)
    from below (y = 0..H) and ``("h", x, y)`` for the edge from (x, y) to
    (x+1, y).
    """
    L, H, tiles = sample.L, sample.H, sample.tiles
    label: dict = {}

    def edge_of(x, y, out):
        if out == N:
            return ("v", x, y + 1)
        if out == S:
            return ("v", x, y)
        if out == E:
            return ("h", x, y)
        return ("h", (x - 1) % L, y)

    def run(x, y, entry, comp):
        while 0 <= y < H:
            out = _EXIT[tiles[y][x]][entry]
            e = edge_of(x, y, out)
            if e in label:
                return
            label[e] = comp
            x, y = x + _DX[out], y + _DY[out]
            x %= L
            entry = _OPPOSITE[out]

    comp = 0
    edges = [("v", x, y) for y in range(H + 1) for x in range(L)]
    edges += [("h", x, y) for y in range(H) for x in range(L)]
    for e in edges:
        if e in label:
            continue
        label[e] = comp
        kind, x, y = e
        if kind == "v":
            run(x, y, S, comp)  # upward into (x, y)
            run(x, y - 1, N, comp)  # downward into (x, y-1)
        else:
            run((x + 1) % L, y, W, comp)
            run(x, y, E, comp)
        comp += 1
    return label


def _strip_block(L: int, H: int, seed: int, block: int, count: int, observable: str):
    rng = block_rng(seed, block)
    tally: dict = {}
    censored = 0
    for _ in range(count):
        s = strip_sample(L, H, rng)
        if observable == "surround":
            v = s.surround_count()
        else:
            p = s.path_through(0)
            if observable == "winding":
                v = int(p.winds) if p.closed else None
            else:  # spanning
                if p.closed:
                    v = 0
                elif p.spans:
                    v = 1
                else:
                    v = None
        if v is None:
            censored += 1
        else:
            tally[v] = tally.get(v, 0) + 1
    return tally, censored


def estimate_strip(
    L: int, H: int, samples: int, observable: str, seed: int = 0, workers: int = 1
) -> dict:
    """Strip estimates.

    For ``"winding"`` and ``"spanning"`` returns ``{observable: McEstimate}``;
    for ``"surround"`` returns one McEstimate per value of m (the indicator
    of that value).  Censored samples are excluded from every denominator
    and reported.
    """
    if observable not in ("surround", "winding", "spanning"):
        raise ValueError(f"unknown strip observable {observable!r}")
    if observable == "spanning" and L % 2 == 0:
        raise ValueError("spanning strand needs odd L")
    if observable != "spanning" and L % 2:
        raise ValueError(f"{observable} needs even L")
    parts = _run_blocks(
        _strip_block, [(L, H, seed, b, n, observable) for b, n in _blocks(samples)], workers
    )
    tally: dict = {}
    censored = 0
    for t, c in parts:
        censored += c
        for k, v in t.items():
            tally[k] = tally.get(k, 0) + v
    kept = samples - censored
    if observable == "surround":
        return {
            m: McEstimate(f"surround[m={m}]", L, kept, tally.get(m, 0), seed, H, censored)
            for m in range(L // 2 + 1)
        }
    return {observable: McEstimate(observable, L, kept, tally.get(1, 0), seed, H, censored)}
