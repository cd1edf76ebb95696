import math

import pytest

from warpgeo.errors import AdmissibilityError
from warpgeo.inequality_oracles import (check_concave_props, check_elementary,
                                        check_holder_chain, check_integral_bounds,
                                        check_oscillation, check_pole_bounds,
                                        integral_f_constant, merge_reports,
                                        oscillation_bound, pair_from_metric, precheck,
                                        run_suite)
from warpgeo.profiles import AdmissiblePair, sample_admissible_pair


def test_frozen_constants():
    assert oscillation_bound(0.5) == pytest.approx(8 + 2 * math.sqrt(2) * math.pi, rel=1e-15)
    assert oscillation_bound(0.5) == pytest.approx(16.885765876316732, rel=1e-15)
    assert integral_f_constant(0.5) == pytest.approx(117.80972450961724, rel=1e-14)
    assert integral_f_constant(0.25) == pytest.approx(437.3545772747505, rel=1e-14)


def test_elementary_inequalities():
    assert check_elementary(n_trials=20_000, seed=1).passed()


@pytest.mark.parametrize("seed", [0, 5])
def test_pair_oracles(seed):
    pair = sample_admissible_pair(seed, 0.9)
    precheck(pair)
    for rep in (check_concave_props(pair, 0.5), check_oscillation(pair, 0.5, n_quads=200),
                check_integral_bounds(pair)):
        assert rep.passed(), rep.to_dict()


def test_inadmissible_pair_rejected():
    p = sample_admissible_pair(3, 0.8)
    with pytest.raises(AdmissibilityError):
        precheck(AdmissiblePair(p.w, p.f.scaled(10.0)))


def test_drawstring_pair_and_family_checks(drawstring3, c1alpha_half):
    pair = pair_from_metric(drawstring3)
    assert pair.is_admissible()
    assert check_holder_chain(drawstring3, n_samples=200).passed()
    rep = check_pole_bounds(drawstring3)
    assert rep.passed() and rep.constants
    assert check_holder_chain(c1alpha_half, n_samples=200).passed()
    with pytest.raises(AdmissibilityError):
        pair_from_metric(c1alpha_half)


def test_merge_reports_takes_minimum():
    pair = sample_admissible_pair(1, 0.5)
    reps = [check_concave_props(pair, 0.25), check_concave_props(pair, 0.5)]
    merged = merge_reports(reps)
    assert len(merged) == 1
    assert merged[0].worst_margin == min(r.worst_margin for r in reps)
    assert merged[0].n_trials == sum(r.n_trials for r in reps)


def test_small_suite_is_reproducible():
    a, ok_a = run_suite(seed=4, n_pairs=3)
    b, ok_b = run_suite(seed=4, n_pairs=3)
    assert ok_a and ok_b
    assert [r.worst_margin for r in a] == [r.worst_margin for r in b]
