import numpy as np
import pytest
import sympy as sp

from warpgeo.errors import CoordinateDegeneracyError, MaskedPointError
from warpgeo.distributional import div_V, lee_lefloch_F, lee_lefloch_V
from warpgeo.metric_core import (WarpedProductMetric, christoffel, gauss_bonnet_residual,
                                 metric_at, metric_from_dict, ricci_mixed_rtheta,
                                 scalar_curvature, torus_mean_curvature)
from warpgeo.profiles import RoundProfile, WarpField

AMP = 0.1


class TiltWarp(WarpField):
    """``phi = 1 + 0.1 sin^2 r cos theta``, a non-radial smooth field."""

    kind = "tilt"

    def eval(self, r, th):
        return 1.0 + AMP * np.sin(r)**2 * np.cos(th)

    def grad(self, r, th):
        return AMP * np.sin(2 * r) * np.cos(th), -AMP * np.sin(r)**2 * np.sin(th)

    def hess(self, r, th):
        return (2 * AMP * np.cos(2 * r) * np.cos(th), -AMP * np.sin(2 * r) * np.sin(th),
                -AMP * np.sin(r)**2 * np.cos(th))


def _symbolic():
    r, th, xi = sp.symbols("r theta xi")
    x = (r, th, xi)
    u = sp.sin(r)
    phi = 1 + AMP * sp.sin(r)**2 * sp.cos(th)
    g = sp.diag(phi**-2, phi**-2 * u**2, phi**2)
    gi = sp.diag(*[1 / g[i, i] for i in range(3)])
    Gam = [[[sum(gi[k, l] * (sp.diff(g[l, i], x[j]) + sp.diff(g[l, j], x[i])
                             - sp.diff(g[i, j], x[l])) for l in range(3)) / 2
             for j in range(3)] for i in range(3)] for k in range(3)]

    def ric(i, j):
        return sum(sp.diff(Gam[k][i][j], x[k]) - sp.diff(Gam[k][i][k], x[j])
                   + sum(Gam[k][k][l] * Gam[l][i][j] - Gam[k][j][l] * Gam[l][i][k]
                         for l in range(3)) for k in range(3))

    scal = sum(gi[i, i] * ric(i, i) for i in range(3))
    # Lee-LeFloch field against g0 = dr^2 + sin^2 r dth^2 + dxi^2, radial phi only
    pr = 1 + AMP * sp.cos(r)
    ur = sp.sin(r)
    Vr = pr**2 * (sp.sin(r) * sp.cos(r) / ur**2 + sp.cot(r) - 2 * sp.diff(ur, r) / ur)
    divv = sp.diff(sp.sin(r) * Vr, r) / sp.sin(r)
    f = lambda e: sp.lambdify((r, th), e, "numpy")
    return f(scal), f(ric(0, 1)), [f(Gam[k][i][j]) for k in range(3) for i in range(3)
                                    for j in range(3)], f(divv), f(Vr)


@pytest.fixture(scope="module")
def sym():
    return _symbolic()


@pytest.fixture(scope="module")
def tilt():
    return WarpedProductMetric(RoundProfile(np.pi), TiltWarp())


@pytest.fixture(scope="module")
def pts():
    rng = np.random.default_rng(3)
    return rng.uniform(0.2, np.pi - 0.2, 40), rng.uniform(-np.pi, np.pi, 40)


def test_scalar_and_ricci_match_symbolic(sym, tilt, pts):
    scal, ric_rt, _, _, _ = sym
    r, th = pts
    assert np.allclose(scalar_curvature(tilt, (r, th)), scal(r, th), atol=1e-11)
    assert np.allclose(ricci_mixed_rtheta(tilt, (r, th)), ric_rt(r, th), atol=1e-11)


def test_christoffel_matches_symbolic(sym, tilt, pts):
    _, _, gam, _, _ = sym
    r, th = pts
    G = christoffel(tilt, (r, th))
    for idx, fn in enumerate(gam):
        k, i, j = idx // 9, (idx // 3) % 3, idx % 3
        assert np.allclose(G[k, i, j], np.broadcast_to(fn(r, th), r.shape), atol=1e-11)


def test_lee_lefloch_decomposition_symbolic(sym, pts):
    from warpgeo.profiles import CosineWarp
    _, _, _, divv, Vr = sym
    m = WarpedProductMetric(RoundProfile(np.pi), CosineWarp(AMP))
    r, th = pts
    assert np.allclose(lee_lefloch_V(m, (r, th))[0], Vr(r, th), atol=1e-11)
    assert np.allclose(div_V(m, (r, th)), divv(r, th), atol=1e-10)
    resid = scalar_curvature(m, (r, th)) - div_V(m, (r, th)) - lee_lefloch_F(m, (r, th))
    assert np.max(np.abs(resid)) < 1e-10


def test_background_values(g0, pts):
    r, th = pts
    assert np.allclose(scalar_curvature(g0, (r, th)), 2.0, atol=1e-12)
    c = metric_at(g0, (1.0, 0.0))
    assert (c.g_rr, c.g_thth, c.g_xixi) == pytest.approx((1.0, np.sin(1.0)**2, 1.0))
    assert torus_mean_curvature(g0, 1.0)(0.3) == pytest.approx(np.cos(1.0) / np.sin(1.0))


def test_pole_and_mask_errors(g0, c1alpha_half):
    with pytest.raises(CoordinateDegeneracyError):
        scalar_curvature(g0, (0.0, 0.0))
    with pytest.raises(CoordinateDegeneracyError):
        scalar_curvature(g0, (np.pi, 0.0))
    with pytest.raises(MaskedPointError):
        scalar_curvature(c1alpha_half, (c1alpha_half.chart_offset, 0.0))


def test_gauss_bonnet_and_descriptor_round_trip(g0, drawstring3):
    assert gauss_bonnet_residual(g0) < 1e-10
    assert gauss_bonnet_residual(drawstring3) < 1e-6
    m = metric_from_dict(drawstring3.to_dict())
    assert m.meta["rho"] == drawstring3.meta["rho"]
