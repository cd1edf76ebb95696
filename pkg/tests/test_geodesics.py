import math

import numpy as np
import pytest

from warpgeo.errors import ChartExitError, ConditioningError, PreconditionError
from warpgeo.examples import C1AlphaParams, kstar, rho_star
from warpgeo.geodesics import (GeodesicState, background_ball_volume, ball_expansion,
                               exp_map, fit_expansion, integrate_geodesic, ricci_moment,
                               wedge_c5_formula, wedge_expansion, wedge_region)


def test_equator_is_geodesic(g0):
    traj = integrate_geodesic(g0, GeodesicState(math.pi / 2, 0.0, 0.0, 0.0, 1.0, 0.5), 2.0)
    assert traj.end == pytest.approx([math.pi / 2, 2.0, 1.0], abs=1e-9)
    assert traj.max_drift < 1e-9


def test_meridian_hits_pole(g0):
    with pytest.raises(ChartExitError):
        integrate_geodesic(g0, GeodesicState(0.5, 0.0, 0.0, -1.0, 0.0, 0.0), 1.0)


def test_exp_map_plane_branch(c1alpha_half):
    q = (c1alpha_half.chart_offset, 0.0, 0.0)
    assert exp_map(c1alpha_half, q, (0.0, 1e-3, 0.0)) == pytest.approx([q[0], 1e-3, 0.0])


def test_background_ball_volume_series():
    t = 0.05
    assert background_ball_volume(t) == pytest.approx(
        4 * math.pi / 3 * t**3 - 4 * math.pi / 45 * t**5, rel=1e-7)


def test_fit_expansion_recovers_coefficients():
    t = np.array([0.4, 0.2, 0.1, 0.05])
    V = 2.0 * t**3 - 0.5 * t**5 + 0.1 * t**6
    fit = fit_expansion(list(zip(t, V)))
    assert (fit.c3, fit.c5, fit.c6) == pytest.approx((2.0, -0.5, 0.1), rel=1e-8)
    with pytest.raises(ConditioningError):
        fit_expansion([(0.1, 1.0), (0.11, 1.0), (0.12, 1.0)])


def test_wedge_region_moments():
    W = wedge_region(0.5, 1e-3)
    assert W.euclid_volume == pytest.approx(2 * math.sqrt(3) * W.meta["delta"] * 1e-9)
    vol, mom = W.monte_carlo_moments(n=400_000, seed=1)
    assert vol == pytest.approx(W.euclid_volume, rel=0.03)
    assert abs(mom["xy"]) < 0.05 * mom["xx"]
    assert mom["xx"] == pytest.approx(mom["zz"], rel=0.1)
    with pytest.raises(PreconditionError):
        wedge_region(0.5, 1.0, rho_star=0.01)


def test_ricci_moment_closed_form():
    num, closed = ricci_moment(0.5, 2.0, 1e-3)
    assert num == pytest.approx(closed, rel=1e-10)


def test_wedge_c5_sign_changes_at_kstar():
    K = kstar(0.5)
    assert wedge_c5_formula(0.5, 0.0, 1e-3) < 0
    assert wedge_c5_formula(0.5, K, 1e-3) == pytest.approx(0.0, abs=1e-25)
    assert wedge_c5_formula(0.5, 2 * K, 1e-3) > 0


def test_background_ball_expansion(g0):
    out = ball_expansion(g0, (math.pi / 2, 0.0, 0.0))
    assert out["ratio"] == pytest.approx(1.0, abs=0.01)


def test_wedge_expansion_small_run():
    out = wedge_expansion(0.5, 2 * kstar(0.5), n_samples=2**13, n_rep=4)
    assert out["c3"] == pytest.approx(out["c3_exact"], rel=1e-3)
    assert out["c5"] > 0
    assert out["rho0"] <= 0.5 * rho_star(C1AlphaParams(0.5, 2 * kstar(0.5)))
