import math

import numpy as np
import pytest

from warpgeo.distance import (GridGraph, PathCosts, diameter_upper_bound, grid_distance,
                              log_graded_axis, path_family_upper_bound, polyline_length,
                              product_distance_g0, shorten_path, shortcut_experiment,
                              uniform_axes, well_radius)
from warpgeo.errors import DomainError


def test_product_distance_wraps():
    p, q = (1.0, 0.1, 0.2), (1.0, 0.1, 2 * math.pi - 0.2)
    assert product_distance_g0(p, q) == pytest.approx(0.4)


def test_path_costs_closed_forms(g0):
    c = PathCosts(g0)
    assert c.radial(0.5, 1.0, 0.0) == pytest.approx(0.5)
    assert c.angular(math.pi / 2, 0.0, 1.0) == pytest.approx(1.0)
    assert c.fiber(1.0, 0.0, math.pi) == pytest.approx(math.pi)
    assert well_radius(g0) is None


def test_polyline_and_shortening(g0):
    p, q = np.array([1.0, 0.0, 0.0]), np.array([1.5, 1.0, 1.0])
    corner = [p, np.array([1.0, 1.0, 0.0]), np.array([1.5, 1.0, 0.0]), q]
    L0 = polyline_length(g0, corner)
    L, pts = shorten_path(g0, corner)
    exact = product_distance_g0(p, q)
    assert L0 > L >= exact * (1 - 1e-9)
    assert L == pytest.approx(exact, rel=5e-3)


def test_grid_graph_invariants(g0):
    r, th, xi = uniform_axes(g0, 16, 16, 16)
    G = GridGraph(g0, r, th, xi)
    p = (r[3], th[2], xi[5])
    q = (r[10], th[12], xi[1])
    s = (r[7], th[7], xi[9])
    assert G.distance(p, q) == pytest.approx(G.distance(q, p), rel=1e-14)
    assert G.distance(p, q) <= G.distance(p, s) + G.distance(s, q) + 1e-12
    assert G.distance(p, q) >= product_distance_g0(p, q) * (1 - 1e-9)


def test_grid_distance_refined(g0):
    p, q = (0.8, 0.3, 0.0), (2.0, -1.0, 2.0)
    d = grid_distance(g0, p, q, 24, 24, 24, refine=True)
    assert d == pytest.approx(product_distance_g0(p, q), rel=0.01)
    with pytest.raises(DomainError):
        grid_distance(g0, p, q, 8, 24, 24)


def test_log_axis_resolves_well(drawstring3):
    ax = log_graded_axis(drawstring3, 32)
    assert ax[0] < drawstring3.meta["rho"] and np.all(np.diff(ax) > 0)


def test_path_family_on_drawstring(drawstring3):
    p, q = (0.02, 0.0, 0.0), (0.02, 0.0, math.pi)
    path, d = path_family_upper_bound(drawstring3, p, q)
    assert path.check()
    assert d == pytest.approx(path.total_length)
    assert d < 0.25


def test_diameter_upper_bound_background(g0):
    assert diameter_upper_bound(g0, 8, 8, 4) >= math.pi


def test_shortcut_rows():
    rows = shortcut_experiment([2, 3])
    assert rows[1]["d_upper"] < rows[0]["d_upper"] < math.pi
    assert rows[1]["radial_excess"] < rows[0]["radial_excess"]
    with pytest.raises(DomainError):
        shortcut_experiment([2], r_star=0.05)
