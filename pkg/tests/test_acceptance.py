"""Acceptance criteria 1-10.

Each test carries a ``criterion`` marker; the conftest prints one
pass/fail line per criterion at the end of the run.  Two sub-claims that
the implementation shows to be false for the constructed metrics are
strict xfails (see the ledger in the README).
"""
import math
import time

import numpy as np
import pytest

from warpgeo.distance import (GridGraph, grid_distance, product_distance_g0,
                              shortcut_experiment, uniform_axes)
from warpgeo.distributional import (ConstantTest, SeparableBump, boundary_decay, div_V,
                                    extrapolate_pairing, lee_lefloch_F, lee_lefloch_V,
                                    pairing, scalar_integral)
from warpgeo.examples import (C1AlphaParams, DrawstringParams, build_c1alpha,
                              build_drawstring, kstar)
from warpgeo.geodesics import ball_expansion, wedge_expansion
from warpgeo.inequality_oracles import run_suite
from warpgeo.metric_core import (WarpedProductMetric, background_metric,
                                 gauss_bonnet_residual, scalar_curvature)
from warpgeo.profiles import ConstantWarp, CosineWarp, RoundProfile, sample_admissible_pair

criterion = pytest.mark.criterion


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.fixture(scope="module")
def eps_list():
    return [0.08, 0.04, 0.02, 0.01]


@pytest.fixture(scope="module")
def decay_rows(eps_list):
    m = build_drawstring(DrawstringParams(A=3.0))
    with Timer() as tm:
        rows = boundary_decay(m, ConstantTest(), eps_list)
    return rows, tm.elapsed


@pytest.fixture(scope="module")
def shortcut_rows():
    with Timer() as tm:
        rows = shortcut_experiment([2, 3, 4, 5], r_star=1 / 50)
    return {r["A"]: r for r in rows}, tm.elapsed


# ---------------------------------------------------------------- 1

@criterion(1, "background identities")
def test_c1_background_identities():
    with Timer() as tm:
        g0 = background_metric()
        rng = np.random.default_rng(0)
        r = rng.uniform(1e-3, np.pi - 1e-3, 1000)
        th = rng.uniform(-np.pi, np.pi, 1000)
        p = (r, th)
        assert np.max(np.abs(scalar_curvature(g0, p) - 2.0)) <= 1e-12
        assert np.max(np.abs(lee_lefloch_V(g0, p)[0])) <= 1e-12
        assert np.max(np.abs(lee_lefloch_F(g0, p) - 2.0)) <= 1e-12
        assert np.max(np.abs(div_V(g0, p))) <= 1e-12
        P, _ = extrapolate_pairing(g0, ConstantTest(), 0.01)
        assert abs(P / (16 * np.pi**2) - 1.0) <= 1e-5
    assert tm.elapsed < 5.0


# ---------------------------------------------------------------- 2

@criterion(2, "decomposition and Stokes")
def test_c2_decomposition_and_stokes():
    with Timer() as tm:
        m = WarpedProductMetric(RoundProfile(np.pi), CosineWarp(0.1))
        rng = np.random.default_rng(1)
        r = rng.uniform(1e-3, np.pi - 1e-3, 1000)
        th = rng.uniform(-np.pi, np.pi, 1000)
        resid = scalar_curvature(m, (r, th)) - div_V(m, (r, th)) - lee_lefloch_F(m, (r, th))
        assert np.max(np.abs(resid)) <= 1e-8
        for v in (ConstantTest(), SeparableBump(0.3, 0.2, 0.5, 1.0)):
            res = pairing(m, v, 0.05)
            S = scalar_integral(m, v, 0.05)
            assert abs(S - res.interior_part - res.boundary_part) <= 1e-6
    assert tm.elapsed < 10.0


# ---------------------------------------------------------------- 3

@criterion(3, "C^{1,alpha} scalar floor")
def test_c3_c1alpha_scalar_floor():
    with Timer() as tm:
        for al, k in [(1 / 3, 1.0), (1 / 2, 2.0), (2 / 3, 5.0)]:
            m = build_c1alpha(C1AlphaParams(al, k))
            r0, r1, t0, t1 = m.phi.support_box()
            R, T = np.meshgrid(np.linspace(r0, r1, 400), np.linspace(t0, t1, 400),
                               indexing="ij")
            ok = m.smooth_mask(R, T)
            S = scalar_curvature(m, (R[ok], T[ok]))
            assert ok.sum() >= 400 * 400 - 400
            assert S.min() >= 5 / 8 - 1e-9
    assert tm.elapsed < 30.0


# ---------------------------------------------------------------- 4

@criterion(4, "wedge t^5 coefficient")
def test_c4_wedge_coefficient():
    K = kstar(0.5)
    with Timer() as tm:
        out = {k: wedge_expansion(0.5, k, n_samples=2**20) for k in (0.0, K, 2 * K)}
    hi = out[2 * K]
    assert abs(hi["ratio"] - 1.0) <= 0.10
    assert out[0.0]["c5"] < 0
    assert out[0.0]["c5"] < out[K]["c5"] < hi["c5"]
    assert len({o["rho0"] for o in out.values()}) == 1
    assert tm.elapsed < 600.0


# ---------------------------------------------------------------- 5

@criterion(5, "geodesic-ball coefficient")
def test_c5_ball_coefficient():
    ref = -4 * np.pi / 45
    with Timer() as tm:
        g = ball_expansion(background_metric(), (np.pi / 2, 0.0, 0.0))
        c = ball_expansion(build_c1alpha(C1AlphaParams(0.5, 5.0)), (np.pi / 2, 0.0, 0.0))
    assert abs(g["c5"] / ref - 1.0) <= 0.01
    assert abs(c["c5"] / ref - 1.0) <= 0.15
    assert tm.elapsed < 900.0


# ---------------------------------------------------------------- 6

@criterion(6, "radial excess decreasing, d_upper < pi")
def test_c6_shortcut_trend(shortcut_rows):
    rows, elapsed = shortcut_rows
    excess = [rows[A]["radial_excess"] for A in (2.0, 3.0, 4.0, 5.0)]
    assert np.all(np.diff(excess) < 0)
    assert all(r["d_upper"] < r["d_limit"] == pytest.approx(np.pi) for r in rows.values())
    assert elapsed < 60.0


@criterion(6, "d_upper <= 0.08 at A = 4")
@pytest.mark.xfail(strict=True, reason="the fiber leg alone costs pi e^{-4} = 0.0575 and the "
                   "two radial legs at least 2 r* = 0.04, so d_upper(A=4) is about 0.104")
def test_c6_shortcut_threshold(shortcut_rows):
    rows, _ = shortcut_rows
    assert rows[4.0]["d_upper"] <= 0.08


# ---------------------------------------------------------------- 7

@criterion(7, "positive part of B(eps) within eps^{3/2} bound")
def test_c7_one_sided_boundary_bound(decay_rows):
    rows, elapsed = decay_rows
    assert all(r["ratio_positive_part"] == 0.0 for r in rows)
    assert all(r["boundary"] <= 0.0 for r in rows)
    assert elapsed < 120.0


@criterion(7, "|B(eps)|/eps^{3/2} nonincreasing")
@pytest.mark.xfail(strict=True, reason="|B| does not vanish as eps -> 0: the outer flux "
                   "grows like -1/eps and the inner one tends to a negative constant")
def test_c7_two_sided_decay(decay_rows):
    rows, _ = decay_rows
    ratios = [r["ratio"] for r in rows]
    assert np.all(np.diff(ratios) <= 0)


# ---------------------------------------------------------------- 8

@criterion(8, "inequality oracles on 200 pairs")
def test_c8_inequality_suite():
    with Timer() as tm:
        reports, ok = run_suite(seed=0, n_pairs=200)
    assert ok
    for rep in reports:
        assert rep.worst_margin >= -1e-9, rep.to_dict()
    ids = {rep.lemma_id for rep in reports}
    assert len(ids) >= 8
    assert tm.elapsed < 60.0


# ---------------------------------------------------------------- 9

@criterion(9, "grid distance vs product distance")
def test_c9_grid_distance():
    g0 = background_metric()
    r, th, xi = uniform_axes(g0, 64, 64, 64)
    rng = np.random.default_rng(1)
    with Timer() as tm:
        errs = []
        for _ in range(20):
            p = (rng.choice(r), rng.choice(th), rng.choice(xi))
            q = (rng.choice(r), rng.choice(th), rng.choice(xi))
            d = grid_distance(g0, p, q, 64, 64, 64, refine=True)
            errs.append(abs(d / product_distance_g0(p, q) - 1.0))
    assert max(errs) <= 0.02
    assert tm.elapsed < 120.0


@criterion(9, "raw Dijkstra symmetric and an upper bound")
def test_c9_raw_graph_invariants():
    g0 = background_metric()
    r, th, xi = uniform_axes(g0, 24, 24, 24)
    G = GridGraph(g0, r, th, xi)
    rng = np.random.default_rng(2)
    for _ in range(5):
        p = (rng.choice(r), rng.choice(th), rng.choice(xi))
        q = (rng.choice(r), rng.choice(th), rng.choice(xi))
        assert G.distance(p, q) == pytest.approx(G.distance(q, p), rel=1e-14)
        assert G.distance(p, q) >= product_distance_g0(p, q) * (1 - 1e-12)


# ---------------------------------------------------------------- 10

@criterion(10, "Gauss-Bonnet residual")
def test_c10_gauss_bonnet():
    with Timer() as tm:
        metrics = [background_metric()]
        metrics += [build_drawstring(DrawstringParams(A=A)) for A in (2.0, 3.0, 4.0)]
        rng = np.random.default_rng(0)
        for i in range(200):
            pair = sample_admissible_pair(i, float(rng.uniform(0.0, 1.0)))
            metrics.append(WarpedProductMetric(pair.w, ConstantWarp(1.0)))
        worst = max(gauss_bonnet_residual(m) for m in metrics)
    assert worst <= 1e-6
    assert tm.elapsed < 10.0
