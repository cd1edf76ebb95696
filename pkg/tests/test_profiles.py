import numpy as np
import pytest

from warpgeo.profiles import (ConstantWarp, CosineWarp, RoundProfile, normalize_profile,
                              profile_from_dict, sample_admissible_pair)


def test_round_profile_invariants():
    p = RoundProfile(np.pi)
    t = np.linspace(0.1, 3.0, 50)
    assert np.allclose(p.eval(t), np.sin(t))
    assert np.allclose(p.d1(t), np.cos(t))
    assert np.allclose(p.curvature(t), 1.0)
    assert profile_from_dict(p.to_dict()).eval(1.0) == pytest.approx(np.sin(1.0))


def test_normalized_profile_on_unit_interval():
    p = normalize_profile(RoundProfile(np.pi), 2.0)
    assert p.a == pytest.approx(2.0)
    assert p.d1(0.0) == pytest.approx(1.0)
    assert p.d1(2.0) == pytest.approx(-1.0)


def test_warp_gradients_match_finite_differences():
    w = CosineWarp(0.1)
    r, th, h = 0.7, 0.3, 1e-6
    gr, _ = w.grad(r, th)
    assert gr == pytest.approx((w.eval(r + h, th) - w.eval(r - h, th)) / (2 * h), rel=1e-6)
    assert ConstantWarp(1.0).eval(0.4, 0.0) == 1.0


@pytest.mark.parametrize("seed", [0, 1, 2, 7])
def test_sampled_pairs_are_admissible_and_deterministic(seed):
    a = sample_admissible_pair(seed, 0.6)
    b = sample_admissible_pair(seed, 0.6)
    assert a.is_admissible()
    t = np.linspace(0.1, 1.9, 7)
    assert np.array_equal(a.w.eval(t), b.w.eval(t))
    assert a.w.d1(0.0) == pytest.approx(1.0, abs=1e-8)
    assert a.w.d1(2.0) == pytest.approx(-1.0, abs=1e-8)


def test_zero_roughness_is_round():
    p = sample_admissible_pair(0, 0.0)
    assert p.is_admissible()
    assert np.allclose(p.f.eval(np.linspace(0, 2, 5)), 0.0)
