"""Full-cylinder observables from a lower and an upper half-cylinder state.

With all loop configurations equally likely, the pair (state below the cut,
state above the cut) has probability P(below) * P(above).  Joining the two
sets of arcs at the cut points gives the loops crossing that cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .patterns import ArcSpan, DefectPattern, Pattern, match_map
from .transfer import Distribution

CONTRACTIBLE_ONLY = "contractible-only"
WITH_WINDING = "contractible-plus-winding"
POLICIES = (CONTRACTIBLE_ONLY, WITH_WINDING)


@dataclass
class Loop:
    points: list[int]  # cut points in traversal order
    below: list[ArcSpan]
    above: list[ArcSpan]
    seam_crossings: int  # signed
    displacement: int  # total signed horizontal displacement

    @property
    def winds(self) -> bool:
        return self.seam_crossings != 0

    def covering(self, side: str, gap: int) -> int:
        arcs = self.below if side == "below" else self.above
        return sum(1 for a in arcs if gap in a.covered_gaps)


@dataclass
class GlueDiagram:
    L: int
    loops: list[Loop]
    open_strand: Loop | None = None
    _owner: dict = field(default_factory=dict, repr=False)

    def loop_of(self, point: int) -> Loop:
        return self._owner[point]

    def on_strand(self, point: int) -> bool:
        return self.open_strand is not None and self._owner[point] is self.open_strand


def _arc_table(p: Pattern) -> dict[int, ArcSpan]:
    table = {}
    for arc in match_map(p):
        table[arc.start] = arc
        table[arc.end] = arc
    return table


def _step(arc: ArcSpan, origin: int) -> tuple[int, int, int]:
    """(destination, displacement, signed seam crossing) for traversing ``arc``."""
    dest = arc.other(origin)
    d = arc.displacement(origin)
    seam = (1 if d > 0 else -1) if arc.crosses_seam else 0
    return dest, d, seam


def glue(below: Pattern, above: Pattern) -> GlueDiagram:
    """Join lower and upper arcs into loops (and, for odd L, the open strand)."""
    L = below.L
    if above.L != L or isinstance(below, DefectPattern) != isinstance(above, DefectPattern):
        raise ValueError("glue needs two states of the same size and parity")
    bt, at = _arc_table(below), _arc_table(above)
    owner: dict[int, Loop] = {}
    strand = None

    if isinstance(below, DefectPattern):
        # from -inf up to the lower defect, then alternate above/below arcs
        # until the upper defect leads off to +inf
        pts, ba, aa = [below.defect], [], []
        seam = disp = 0
        cur, side = below.defect, "above"
        while not (side == "above" and cur == above.defect):
            arc = (at if side == "above" else bt)[cur]
            (aa if side == "above" else ba).append(arc)
            cur, d, s = _step(arc, cur)
            seam += s
            disp += d
            pts.append(cur)
            side = "below" if side == "above" else "above"
        strand = Loop(pts, ba, aa, seam, disp)
        for p in pts:
            owner[p] = strand

    loops = []
    for start in range(L):
        if start in owner:
            continue
        pts, ba, aa = [start], [], []
        seam = disp = 0
        cur, side = start, "below"
        while True:
            arc = (bt if side == "below" else at)[cur]
            (ba if side == "below" else aa).append(arc)
            cur, d, s = _step(arc, cur)
            seam += s
            disp += d
            side = "above" if side == "below" else "below"
            if cur == start and side == "below":
                break
            pts.append(cur)
        if disp != seam * L:
            raise AssertionError("seam count disagrees with displacement")
        loop = Loop(pts, ba, aa, seam, disp)
        loops.append(loop)
        for p in pts:
            owner[p] = loop
    if strand is not None and any(l.winds for l in loops):
        raise AssertionError("winding loop alongside an open strand")
    return GlueDiagram(L, loops, strand, owner)


def surround_count(d: GlueDiagram, gap: int = 0, policy: str = CONTRACTIBLE_ONLY) -> int:
    """Number of loops around the face sitting in ``gap`` of the cut row."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    m = 0
    for loop in d.loops:
        if loop.winds:
            m += policy == WITH_WINDING
            continue
        up = loop.covering("above", gap) % 2
        if up != loop.covering("below", gap) % 2:
            raise AssertionError("ray parity differs above and below for a contractible loop")
        m += up
    return m


def _pair_sum(dist: Distribution, f: Callable[[GlueDiagram], object]) -> dict:
    """sum over (c1, c2) of P(c1) P(c2) grouped by f(glue(c1, c2))."""
    out: dict = {}
    items = list(dist.items())
    for c1, p1 in items:
        for c2, p2 in items:
            key = f(glue(c1, c2))
            out[key] = out.get(key, Fraction(0)) + p1 * p2
    return out


def winding_edge_prob(dist: Distribution, point: int = 0) -> Fraction:
    """Probability that the vertical edge at ``point`` lies on a winding loop."""
    if dist.L % 2:
        raise ValueError("winding loops need even L; use spanning_visit_prob")
    return _pair_sum(dist, lambda d: d.loop_of(point).winds).get(True, Fraction(0))


def spanning_visit_prob(dist: Distribution, point: int = 0) -> Fraction:
    """Probability that the edge at ``point`` lies on the open strand (odd L)."""
    if dist.L % 2 == 0:
        raise ValueError("the open strand only exists for odd L")
    return _pair_sum(dist, lambda d: d.on_strand(point)).get(True, Fraction(0))


def surround_distribution(dist: Distribution, policy: str = CONTRACTIBLE_ONLY, gap: int = 0) -> dict[int, Fraction]:
    if dist.L % 2:
        raise ValueError("surround distribution is defined for even L")
    out = _pair_sum(dist, lambda d: surround_count(d, gap, policy))
    return dict(sorted(out.items()))
