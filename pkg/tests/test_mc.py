import numpy as np
import pytest
from numpy.testing import assert_allclose

from mrfpareto.errors import EmptyTail, ValidationError
from mrfpareto.extremes import minima_law
from mrfpareto.mc import (
    McEstimate,
    draws,
    estimate_corr,
    estimate_ddf,
    estimate_equal_mass,
    estimate_solvency_bonus,
    estimate_tail_mean,
    kolmogorov_distance,
)
from mrfpareto.model import joint_ddf, sample
from mrfpareto.moments import pearson_corr

from conftest import MC_N, MC_SEED, three_component


def test_ddf_at_origin_is_exact():
    est = estimate_ddf(three_component(), [0.0, 0.0, 0.0], 20_000, 1)
    assert est.estimate == 1.0 and est.std_error == 0.0


def test_case1_equal_mass(cases):
    est = estimate_equal_mass(cases["case1"], [0, 1], MC_N, MC_SEED)
    assert est.within(0.5)


def test_independent_has_no_ties(cases):
    assert estimate_equal_mass(cases["independent"], [0, 1], 50_000, 3).estimate == 0.0


def test_case2_correlation(cases):
    p = cases["case2"]
    est = estimate_corr(p, 0, 1, MC_N, MC_SEED)
    assert est.within(pearson_corr(p, 0, 1))
    assert 0 < est.std_error < 0.05


def test_determinism():
    p = three_component()
    a = draws(p, 20_000, 42)
    b = sample(p, 20_000, 42).draws
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(p, 20_000, 43).draws)
    e1 = estimate_corr(p, 0, 1, 20_000, 42, resamples=20)
    e2 = estimate_corr(p, 0, 1, 20_000, 42, resamples=20)
    assert e1 == e2


def test_ddf_coverage_across_seeds():
    p = three_component()
    x = np.array([0.2, 0.1, 0.3])
    target = float(joint_ddf(p, x))
    hits = sum(estimate_ddf(p, x, 20_000, seed).within(target) for seed in range(20))
    assert hits >= 19


def test_minima_distribution_fit():
    p = three_component()
    rl = minima_law(p, [0, 1, 2])
    m = draws(p, 100_000, 7).min(axis=1)
    grid = np.quantile(m, np.linspace(0.01, 0.99, 50))
    # Kolmogorov band at roughly 99.9% for n = 1e5
    assert kolmogorov_distance(m, lambda t: 1 - rl.ddf(t), grid) < 1.95 / np.sqrt(m.size)


def test_tail_mean_errors():
    p = three_component()
    with pytest.raises(EmptyTail):
        estimate_tail_mean(p, ("minima", ()), 1e12, 20_000, 0)
    with pytest.raises(EmptyTail):
        estimate_solvency_bonus(p, 0, 1, 1e12, 20_000, 0)
    with pytest.raises(ValidationError):
        estimate_tail_mean(p, ("median", ()), 0.1, 20_000, 0)


@pytest.mark.parametrize("fn, args", [
    (estimate_ddf, ([0.1, 0.1, 0.1],)),
    (estimate_corr, (0, 1)),
    (estimate_equal_mass, ([0, 1],)),
    (estimate_tail_mean, (("maxima", ()), 0.1)),
])
def test_minimum_sample_count(fn, args):
    with pytest.raises(ValidationError):
        fn(three_component(), *args, 9_999, 0)


def test_ddf_dimension_check():
    with pytest.raises(ValidationError):
        estimate_ddf(three_component(), [0.1, 0.1], 20_000, 0)


def test_mc_estimate_helpers():
    e = McEstimate(1.0, 0.1, 10_000, 0)
    assert e.within(1.29) and not e.within(1.31)
    assert_allclose(e.z_score(0.8), 2.0)
    assert McEstimate(1.0, 0.0, 10_000, 0).z_score(1.0) == 0.0
    assert McEstimate(1.0, 0.0, 10_000, 0).z_score(0.0) == np.inf
