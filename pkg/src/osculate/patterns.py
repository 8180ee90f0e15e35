"""Connectivity states of a periodic cut of circumference L.

A cut row meets the loops in L points.  Their pairing through the half
cylinder below the cut is written as a word of parentheses: position ``i``
carries ``'('`` when its partner is reached by moving right (increasing
index, cyclically) and ``')'`` otherwise.  Because the word is read on a
circle, ``")("`` is a perfectly good state: its single arc runs over the
seam between positions L-1 and 0.

For odd L one point (the defect) is joined to the strand that runs the
whole length of the cylinder.  The remaining L-1 symbols are balanced when
read linearly starting just after the defect, which is exactly the statement
that no arc passes over the open strand.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Union

OPEN = "("
CLOSE = ")"
DEFECT = "|"

_FLIP = {OPEN: CLOSE, CLOSE: OPEN}


class PatternError(ValueError):
    """Malformed pattern text or invalid pattern arguments."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class ArcSpan:
    """Geometric realisation of one matched pair.

    ``start`` holds the ``'('``, ``end`` the matching ``')'``.  Gap ``g`` is
    the space between positions ``g`` and ``g + 1 (mod L)``; the arc covers
    the gaps ``start, start+1, ..., end-1`` taken cyclically.
    """

    start: int
    end: int
    covered_gaps: frozenset[int]
    crosses_seam: bool

    @property
    def length(self) -> int:
        """Number of covered gaps, i.e. the rightward displacement start -> end."""
        return len(self.covered_gaps)

    def other(self, point: int) -> int:
        if point == self.start:
            return self.end
        if point == self.end:
            return self.start
        raise KeyError(point)

    def displacement(self, origin: int) -> int:
        """Signed horizontal displacement when traversing the arc from ``origin``."""
        if origin == self.start:
            return self.length
        if origin == self.end:
            return -self.length
        raise KeyError(origin)


def _arcs_from_symbols(symbols: str, skip: int | None = None) -> list[ArcSpan]:
    # Stack matching along the circle: a single pass started right after the
    # skipped position (or anywhere with a net-zero prefix) is equivalent to
    # repeated removal of adjacent "()" pairs.
    L = len(symbols)
    if skip is not None:
        origin = (skip + 1) % L
    else:
        # start where the running balance attains its minimum, so the linear
        # read from there never dips below zero
        bal, low, origin = 0, 0, 0
        for i, ch in enumerate(symbols):
            bal += 1 if ch == OPEN else -1
            if bal < low:
                low, origin = bal, (i + 1) % L
    stack: list[int] = []
    arcs = []
    for step in range(L):
        i = (origin + step) % L
        if i == skip:
            continue
        if symbols[i] == OPEN:
            stack.append(i)
        else:
            j = stack.pop()
            gaps = frozenset((j + k) % L for k in range((i - j) % L))
            arcs.append(ArcSpan(j, i, gaps, (L - 1) in gaps))
    arcs.sort(key=lambda a: a.start)
    return arcs


@dataclass(frozen=True)
class LinkPattern:
    """Even-L connectivity state; ``word`` is the canonical parenthesis word."""

    word: str

    def __post_init__(self):
        L = len(self.word)
        if L == 0 or L % 2:
            raise PatternError(f"link pattern needs even positive length, got {L}")
        for i, ch in enumerate(self.word):
            if ch not in _FLIP:
                raise PatternError(f"unexpected symbol {ch!r}", i)
        if self.word.count(OPEN) != L // 2:
            raise PatternError("numbers of '(' and ')' differ")

    @property
    def L(self) -> int:
        return len(self.word)

    @property
    def symbols(self) -> str:
        return self.word

    def __str__(self) -> str:
        return self.word


@dataclass(frozen=True)
class DefectPattern:
    """Odd-L connectivity state with one unmatched point.

    ``word`` has L-1 symbols, listed cyclically from position ``defect + 1``.
    """

    defect: int
    word: str

    def __post_init__(self):
        L = len(self.word) + 1
        if L % 2 == 0:
            raise PatternError(f"defect pattern needs odd length, got {L}")
        if not 0 <= self.defect < L:
            raise PatternError(f"defect {self.defect} outside 0..{L - 1}")
        bal = 0
        for k, ch in enumerate(self.word):
            pos = (self.defect + 1 + k) % L
            if ch not in _FLIP:
                raise PatternError(f"unexpected symbol {ch!r}", pos)
            bal += 1 if ch == OPEN else -1
            if bal < 0:
                raise PatternError("arc passes over the defect", pos)
        if bal:
            raise PatternError("numbers of '(' and ')' differ")

    @property
    def L(self) -> int:
        return len(self.word) + 1

    @property
    def symbols(self) -> str:
        """Positional text, ``'|'`` marking the defect."""
        L = self.L
        out = [DEFECT] * L
        for k, ch in enumerate(self.word):
            out[(self.defect + 1 + k) % L] = ch
        return "".join(out)

    def __str__(self) -> str:
        return self.symbols


Pattern = Union[LinkPattern, DefectPattern]


def _dyck_words(n: int) -> Iterator[str]:
    """Balanced words with n pairs, in lexicographic order ('(' < ')')."""

    def rec(prefix: str, opened: int, closed: int):
        if closed == n:
            yield prefix
            return
        if opened < n:
            yield from rec(prefix + OPEN, opened + 1, closed)
        if closed < opened:
            yield from rec(prefix + CLOSE, opened, closed + 1)

    yield from rec("", 0, 0)


def enumerate_even(L: int) -> list[LinkPattern]:
    """All cyclic parenthesis words of length L, lexicographically sorted."""
    if L < 2 or L % 2:
        raise ValueError(f"enumerate_even needs even L >= 2, got {L}")
    words = []
    for opens in combinations(range(L), L // 2):
        chars = [CLOSE] * L
        for i in opens:
            chars[i] = OPEN
        words.append("".join(chars))
    words.sort()
    return [LinkPattern(w) for w in words]


def enumerate_odd(L: int) -> list[DefectPattern]:
    """All defect states for odd L, sorted by their positional text."""
    if L < 3 or L % 2 == 0:
        raise ValueError(f"enumerate_odd needs odd L >= 3, got {L}")
    states = [DefectPattern(d, w) for d in range(L) for w in _dyck_words((L - 1) // 2)]
    states.sort(key=lambda p: p.symbols)
    return states


def enumerate_states(L: int) -> list[Pattern]:
    return enumerate_even(L) if L % 2 == 0 else enumerate_odd(L)


def match_map(p: Pattern) -> list[ArcSpan]:
    """Arcs of the pattern, sorted by their opening position."""
    if isinstance(p, DefectPattern):
        return _arcs_from_symbols(p.symbols, skip=p.defect)
    return _arcs_from_symbols(p.word)


def partner_table(p: Pattern) -> tuple[list[int], list[int]]:
    """Per-position partner and signed displacement to reach it.

    The defect (odd L) has partner -1 and displacement 0.
    """
    L = p.L
    partner = [-1] * L
    disp = [0] * L
    for arc in match_map(p):
        partner[arc.start], partner[arc.end] = arc.end, arc.start
        disp[arc.start], disp[arc.end] = arc.length, -arc.length
    return partner, disp


def _from_symbols(symbols: str) -> Pattern:
    if DEFECT in symbols:
        d = symbols.index(DEFECT)
        L = len(symbols)
        return DefectPattern(d, "".join(symbols[(d + 1 + k) % L] for k in range(L - 1)))
    return LinkPattern(symbols)


def rotate(p: Pattern, s: int) -> Pattern:
    """Shift every position by ``s`` (mod L)."""
    L = p.L
    sym = p.symbols
    out = [""] * L
    for i, ch in enumerate(sym):
        out[(i + s) % L] = ch
    return _from_symbols("".join(out))


def reflect(p: Pattern) -> Pattern:
    """Left-right mirror image: position i -> L-1-i, parentheses swapped."""
    sym = p.symbols
    return _from_symbols("".join(_FLIP.get(ch, ch) for ch in reversed(sym)))


def parse(text: str) -> Pattern:
    text = text.strip()
    if not text:
        raise PatternError("empty pattern")
    for i, ch in enumerate(text):
        if ch not in (OPEN, CLOSE, DEFECT):
            raise PatternError(f"unexpected symbol {ch!r}", i)
    bars = [i for i, ch in enumerate(text) if ch == DEFECT]
    if len(bars) > 1:
        raise PatternError("more than one defect", bars[1])
    if bars and len(text) % 2 == 0:
        raise PatternError("defect in even-length pattern", bars[0])
    if not bars and len(text) % 2:
        raise PatternError("odd-length pattern without a defect")
    return _from_symbols(text)


def format_pattern(p: Pattern) -> str:
    return p.symbols


def orbit(p: Pattern) -> set[Pattern]:
    """Images of ``p`` under rotations and reflection of the cylinder."""
    out = set()
    for q in (p, reflect(p)):
        for s in range(p.L):
            out.add(rotate(q, s))
    return out


def rainbow(L: int) -> LinkPattern:
    """The fully nested word ``((...))``."""
    return LinkPattern(OPEN * (L // 2) + CLOSE * (L // 2))


def small_arcs(L: int) -> LinkPattern:
    """The word ``()()...()``."""
    return LinkPattern((OPEN + CLOSE) * (L // 2))
