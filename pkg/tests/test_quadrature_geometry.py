import math

import numpy as np
import pytest

from warpgeo.errors import DomainError
from warpgeo.quadrature_geometry import (QuadratureSpec, base_area, base_diameter, cap_volume,
                                         integrate_radial, middle_volume,
                                         min_torus_area_candidates, radial_cost, total_volume)


def test_integrate_radial_singular_endpoint():
    res = integrate_radial(lambda r: r**-0.5, 0.0, 1.0, QuadratureSpec(rel_tol=1e-10))
    assert res.value == pytest.approx(2.0, rel=1e-8)


def test_background_volumes(g0):
    V = total_volume(g0).value
    assert V == pytest.approx(8 * np.pi**2, rel=1e-10)
    assert base_area(g0).value == pytest.approx(4 * np.pi, rel=1e-10)
    assert base_diameter(g0) == pytest.approx(np.pi)
    eps = 0.3
    caps = cap_volume(g0, eps).value
    assert caps == pytest.approx(2 * 4 * np.pi**2 * (1 - np.cos(eps)), rel=1e-10)
    assert caps + middle_volume(g0, eps).value == pytest.approx(V, rel=1e-10)
    with pytest.raises(DomainError):
        cap_volume(g0, 2.0)


def test_min_area_candidates(g0):
    c = min_torus_area_candidates(g0)
    torus = [e for e in c if e["kind"] == "torus"]
    assert torus[0]["r"] == pytest.approx(np.pi / 2)
    assert torus[0]["area"] == pytest.approx(4 * np.pi**2)
    assert c[0]["kind"] == "xi_slice" and c[0]["area"] == pytest.approx(4 * np.pi)


def test_drawstring_radial_cost_near_rstar(drawstring3):
    rs = 0.02
    cost = radial_cost(drawstring3, drawstring3.meta["rho"] * 1e-3, rs).value
    assert rs < cost < rs + 0.01
    with pytest.raises(DomainError):
        radial_cost(drawstring3, 0.0, rs)


def test_drawstring_volume_finite(drawstring3):
    V = total_volume(drawstring3)
    assert np.isfinite(V.value) and V.value > 0
    assert V.est_error < 1e-6 * V.value


def test_cap_volume_sqrt_scaling():
    from warpgeo.examples import DrawstringParams, build_drawstring
    m = build_drawstring(DrawstringParams(A=4.0))
    eps = [0.04, 0.02, 0.01]
    ratios = [cap_volume(m, e).value / np.sqrt(e) for e in eps]
    assert np.all(np.diff(ratios) <= 0)
    assert cap_volume(m, 0.01).value <= ratios[0] * np.sqrt(0.01)


def test_volume_additivity(drawstring3):
    V = total_volume(drawstring3).value
    for eps in (0.01, 0.05, 0.1, 0.3, 0.7):
        parts = cap_volume(drawstring3, eps).value + middle_volume(drawstring3, eps).value
        assert parts == pytest.approx(V, abs=2 * QuadratureSpec().abs_tol + 1e-9 * V)


def test_gradient_budget(drawstring3):
    from warpgeo.quadrature_geometry import gradient_budget
    lhs, rhs = gradient_budget(drawstring3)
    assert lhs <= rhs + 1e-6
    assert rhs == pytest.approx(4 * np.pi, rel=1e-6)


def test_negligible_well_piece():
    from warpgeo.examples import DrawstringParams, build_drawstring
    for A in (2.0, 3.0):
        m = build_drawstring(DrawstringParams(A=A))
        rho = m.meta["rho"]
        assert radial_cost(m, rho, 2 * rho).value <= math.e**A * rho
