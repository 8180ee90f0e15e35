import math

import numpy as np
import pytest

from osculate.formulas import winding_formula
from osculate.montecarlo import (
    _EXIT,
    E,
    N,
    S,
    W,
    McEstimate,
    WalkError,
    block_rng,
    estimate_strip,
    estimate_walks,
    strip_sample,
    trace_strip,
    walk_single,
)


def test_exit_tables_turn():
    # every tile turns: the straight pairings N-S and E-W never occur
    for tile in (0, 1):
        for entry in (N, E, S, W):
            out = _EXIT[tile][entry]
            assert out != entry and {out, entry} not in ({N, S}, {E, W})
            assert _EXIT[tile][out] == entry


def test_l2_always_visits_neighbor():
    rng = block_rng(5, 0)
    for _ in range(500):
        w = walk_single(2, rng)
        assert w.visited_left_neighbor
        assert w.steps >= 2


def test_odd_walks_rejected():
    with pytest.raises(ValueError):
        walk_single(3, block_rng(0, 0))


def test_reproducible():
    a = estimate_walks(4, 3000, seed=11)
    b = estimate_walks(4, 3000, seed=11)
    c = estimate_walks(4, 3000, seed=12)
    assert {k: v.hits for k, v in a.items()} == {k: v.hits for k, v in b.items()}
    assert {k: v.hits for k, v in a.items()} != {k: v.hits for k, v in c.items()}


def test_workers_do_not_change_result():
    a = estimate_walks(4, 25_000, seed=3, workers=1)
    b = estimate_walks(4, 25_000, seed=3, workers=2)
    assert {k: v.hits for k, v in a.items()} == {k: v.hits for k, v in b.items()}


def test_estimate_fields():
    e = McEstimate("x", 4, 100, 25, 0)
    assert e.mean == 0.25
    assert e.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert e.zscore(0.25) == 0
    d = e.to_json()
    assert d["samples"] == 100 and d["seed"] == 0 and "stderr" in d


def test_step_cap(monkeypatch):
    import osculate.montecarlo as mc

    monkeypatch.setattr(mc, "STEP_CAP", 3)
    rng = block_rng(1, 0)
    with pytest.raises(WalkError):
        for _ in range(200):
            walk_single(8, rng)


def test_walk_winding_rough():
    est = estimate_walks(4, 20_000, seed=1)["winding"]
    assert abs(est.zscore(float(winding_formula(4)))) < 4


@pytest.mark.parametrize("L,H", [(3, 12), (4, 10), (5, 9)])
def test_trace_covers_every_edge(L, H):
    s = strip_sample(L, H, np.random.default_rng(L))
    label = trace_strip(s)
    edges = [("v", x, y) for y in range(H + 1) for x in range(L)]
    edges += [("h", x, y) for y in range(H) for x in range(L)]
    assert set(label) == set(edges)
    # the two edges paired at a vertex always belong to the same component
    def edge(x, y, d):
        return {N: ("v", x, y + 1), S: ("v", x, y), E: ("h", x, y), W: ("h", (x - 1) % L, y)}[d]

    for y in range(H):
        for x in range(L):
            t = s.tiles[y][x]
            for d in (N, E, S, W):
                assert label[edge(x, y, d)] == label[edge(x, y, _EXIT[t][d])]


def test_strip_reproducible():
    a = estimate_strip(4, 40, 500, "surround", seed=2)
    b = estimate_strip(4, 40, 500, "surround", seed=2)
    assert {m: e.hits for m, e in a.items()} == {m: e.hits for m, e in b.items()}


def test_censoring_shrinks_with_height():
    small = estimate_strip(4, 12, 3000, "surround", seed=4)[0].censored
    big = estimate_strip(4, 48, 3000, "surround", seed=4)[0].censored
    assert big < small


def test_strip_observable_checks():
    with pytest.raises(ValueError):
        estimate_strip(4, 20, 10, "spanning")
    with pytest.raises(ValueError):
        estimate_strip(3, 20, 10, "surround")
    with pytest.raises(ValueError):
        estimate_strip(4, 20, 10, "bogus")


def test_walker_and_strip_winding_agree():
    w = estimate_walks(4, 20_000, seed=7)["winding"]
    s = estimate_strip(4, 200, 10_000, "winding", seed=7)["winding"]
    z = (w.mean - s.mean) / math.hypot(w.stderr, s.stderr)
    assert abs(z) < 3
