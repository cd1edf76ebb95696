import numpy as np
import pytest

from warpgeo.distributional import (ConstantTest, RadialBump, SeparableBump, boundary_parts,
                                    div_V, extrapolate_pairing, lee_lefloch_F, lee_lefloch_V,
                                    pairing, scalar_integral)
from warpgeo.errors import CoordinateDegeneracyError
from warpgeo.metric_core import WarpedProductMetric
from warpgeo.profiles import CosineWarp, RoundProfile


@pytest.fixture(scope="module")
def cosine():
    return WarpedProductMetric(RoundProfile(np.pi), CosineWarp(0.1))


def test_background_kernels(g0, rng):
    r = rng.uniform(0.05, np.pi - 0.05, 500)
    th = rng.uniform(-np.pi, np.pi, 500)
    assert np.max(np.abs(lee_lefloch_V(g0, (r, th))[0])) < 1e-12
    assert np.max(np.abs(lee_lefloch_F(g0, (r, th)) - 2.0)) < 1e-12
    assert np.max(np.abs(div_V(g0, (r, th)))) < 1e-12
    with pytest.raises(CoordinateDegeneracyError):
        lee_lefloch_V(g0, (0.0, 0.0))


def test_test_function_gradients():
    v = SeparableBump(0.5, 0.2, 0.3, 1.0)
    p, h = (0.55, 0.4, 0.9), 1e-6
    g = v.grad(*p)
    for i in range(3):
        a, b = list(p), list(p)
        a[i] += h
        b[i] -= h
        assert g[i] == pytest.approx((v.eval(*a) - v.eval(*b)) / (2 * h), rel=1e-6, abs=1e-9)
    assert RadialBump(0.5, 0.1).eval(0.5, 0.0, 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("v", [ConstantTest(), SeparableBump(0.3, 0.2, 0.5, 1.0)])
def test_stokes_identity(cosine, v):
    res = pairing(cosine, v, 0.05)
    S = scalar_integral(cosine, v, 0.05)
    assert abs(S - res.interior_part - res.boundary_part) <= 1e-6 * max(1.0, abs(S))
    assert res.value == pytest.approx(res.interior_part)


def test_background_total_pairing(g0):
    P, res = extrapolate_pairing(g0, ConstantTest(), 0.01)
    assert P == pytest.approx(16 * np.pi**2, rel=1e-5)
    assert len(res) == 3


def test_boundary_fluxes_vanish_on_background(g0):
    bm, bp = boundary_parts(g0, ConstantTest(), 0.05)
    assert abs(bm) < 1e-10 and abs(bp) < 1e-10


def test_record_round_trip(cosine):
    rec = pairing(cosine, RadialBump(1.5, 0.3), 0.05).to_record()
    assert set(rec) >= {"value", "interior", "boundary"}
