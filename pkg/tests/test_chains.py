from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from qslab import (InputError, build_delta_graph, chain_distance, chain_profile,
                   gen_explicit)
from qslab.chains import chain_distances_from

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def brute_force_min(graph, x, y):
    """Exhaustive minimum over simple paths, left-associated edge sums."""
    best = math.inf
    adj = [dict(zip(map(int, graph.neighbors[u]), graph.weights[u]))
           for u in range(graph.n)]

    def walk(u, total, seen):
        nonlocal best
        if u == y:
            best = min(best, total)
            return
        for v, w in adj[u].items():
            if v not in seen:
                seen.add(v)
                walk(v, total + w, seen)
                seen.remove(v)

    walk(x, 0.0, {x})
    return best


def test_line_graph_edges(line3):
    g = build_delta_graph(line3, 1.0, 2.0)
    assert list(g.neighbors[0]) == [1]
    assert list(g.neighbors[1]) == [0, 2]
    assert g.weights[0][0] == pytest.approx(SQRT2, abs=1e-15)
    g2 = build_delta_graph(line3, 2.0, 2.0)
    assert list(g2.neighbors[0]) == [1, 2]
    w02 = dict(zip(map(int, g2.neighbors[0]), g2.weights[0]))[2]
    assert w02 == pytest.approx(SQRT3, abs=1e-15)


def test_empty_graph_below_min_distance(line3):
    g = build_delta_graph(line3, 0.5, 2.0)
    assert g.below_mesh
    res = chain_distance(g, 0, 2)
    assert not res.reachable and res.total_weight == math.inf and res.path == []


def test_line_chain_values(line3):
    g1 = build_delta_graph(line3, 1.0, 2.0)
    r = chain_distance(g1, 0, 2)
    assert r.total_weight == 2 * SQRT2
    assert r.path == [0, 1, 2]
    g2 = build_delta_graph(line3, 2.0, 2.0)
    r2 = chain_distance(g2, 0, 2)
    assert r2.total_weight == SQRT3
    assert r2.path == [0, 2]


def test_chain_same_point(line3):
    g = build_delta_graph(line3, 1.0, 2.0)
    r = chain_distance(g, 1, 1)
    assert r.total_weight == 0.0 and r.path == [1]


def test_line_profile(line3):
    prof = chain_profile(line3, 0, 2, [2.0, 1.0], 2.0)
    assert prof.entries[0] == (2.0, SQRT3)
    assert prof.entries[1][1] == 2 * SQRT2
    assert prof.q_estimate == 2 * SQRT2
    assert not prof.truncated


def test_profile_same_point(line3):
    prof = chain_profile(line3, 1, 1, [2.0, 1.0], 2.0)
    assert all(w == 0.0 for _, w in prof.entries)
    assert prof.q_estimate == 0.0


def test_profile_validates_schedule(line3):
    with pytest.raises(InputError):
        chain_profile(line3, 0, 2, [1.0, 2.0], 2.0)
    with pytest.raises(InputError):
        chain_profile(line3, 0, 2, [2.0, 0.5], 2.0)  # below mesh scale


def test_brute_force_oracle_small_spaces():
    rng = np.random.default_rng(42)
    for trial in range(40):
        n = int(rng.integers(3, 9))
        pts = rng.uniform(0, 1, size=(n, 2))
        m = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        space = gen_explicit(m, rng.uniform(0.2, 2.0, size=n))
        delta = float(rng.uniform(0.3, 1.0))
        g = build_delta_graph(space, delta, 2.0)
        x, y = rng.choice(n, size=2, replace=False)
        res = chain_distance(g, int(x), int(y))
        expect = brute_force_min(g, int(x), int(y))
        if math.isinf(expect):
            assert not res.reachable
        else:
            assert res.total_weight == expect


def test_symmetry_exact(sphere):
    g = build_delta_graph(sphere, 0.2, 2.0)
    rng = np.random.default_rng(9)
    for _ in range(25):
        x, y = rng.choice(sphere.n_points, size=2, replace=False)
        a = chain_distance(g, int(x), int(y))
        b = chain_distance(g, int(y), int(x))
        assert a.total_weight == b.total_weight
        assert a.path == b.path[::-1]


def test_monotone_in_delta(line3, sphere):
    rng = np.random.default_rng(10)
    g_fine = build_delta_graph(sphere, 0.15, 2.0)
    g_coarse = build_delta_graph(sphere, 0.3, 2.0)
    src = rng.choice(sphere.n_points, size=12, replace=False)
    fine = chain_distances_from(g_fine, src)
    coarse = chain_distances_from(g_coarse, src)
    assert (coarse <= fine).all()


def test_path_weight_consistency(sphere):
    g = build_delta_graph(sphere, 0.25, 2.0)
    lut = [dict(zip(map(int, g.neighbors[u]), g.weights[u])) for u in range(g.n)]
    rng = np.random.default_rng(11)
    for _ in range(10):
        x, y = rng.choice(sphere.n_points, size=2, replace=False)
        res = chain_distance(g, int(x), int(y))
        total = 0.0
        for u, v in zip(res.path, res.path[1:]):
            assert v in lut[u]  # consecutive points are delta-neighbors
            total += lut[u][v]
        assert total == pytest.approx(res.total_weight, rel=1e-12)


def test_weight_scaling_homogeneity():
    rng = np.random.default_rng(13)
    pts = rng.uniform(0, 1, size=(12, 2))
    m = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    w = rng.uniform(0.5, 1.5, size=12)
    for s in (1.5, 2.0, 3.0):
        g1 = build_delta_graph(gen_explicit(m, w), 0.6, s)
        g2 = build_delta_graph(gen_explicit(m, 3.0 * w), 0.6, s)
        r1 = chain_distance(g1, 0, 11)
        r2 = chain_distance(g2, 0, 11)
        if r1.reachable:
            assert r2.total_weight == pytest.approx(
                3.0 ** (1.0 / s) * r1.total_weight, rel=1e-9)


def test_sphere_profile_band(sphere):
    # weights nondecreasing in shrinking delta; endpoint value comparable
    # to the pair-ball oracle within the generous two-sided band
    x = 0
    y = int(sphere.distances_from(0).argmax())
    prof = chain_profile(sphere, x, y, [0.4, 0.2, 0.1], 2.0)
    ws = [w for _, w in prof.entries]
    assert ws == sorted(ws)
    root = math.sqrt(sphere.pair_ball_measure(x, y))
    assert root <= prof.q_estimate <= 10 * root
