"""End-to-end acceptance checks; each test records one pass/fail summary line."""

import json
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mrfpareto import cli
from mrfpareto.extremes import bivariate_ddf, bivariate_decompose, simultaneous_default_prob
from mrfpareto.gammaconv import GammaComponent, moschopoulos_pmf
from mrfpareto.mc import estimate_corr, estimate_equal_mass, kolmogorov_distance
from mrfpareto.model import MrfPortfolio, aggregate_powers, marginal
from mrfpareto.moments import corr_special_cs, corr_special_su, pearson_corr, product_moment
from mrfpareto.risk import cte_maxima, cte_minima, solvency_bonus, solvency_bonus_quad
from mrfpareto.scenarios import CORRELATION_TARGETS, RandomPortfolioSpec, random_portfolio

from conftest import MC_N, MC_SEED, criterion, quad_product_moment, two_component

CHAIN = ("case1", "case3", "case2", "independent")


def test_case_study_correlations(cases):
    with criterion(1) as notes:
        start = time.perf_counter()
        for name in ("case1", "case2", "case3"):
            p = cases[name]
            rho = pearson_corr(p, 0, 1)
            assert abs(rho - CORRELATION_TARGETS[name]) <= 0.005, (name, rho)
            est = estimate_corr(p, 0, 1, MC_N, MC_SEED)
            assert est.within(rho), (name, rho, est)
            notes.append(f"{name} {rho:.4f} mc {est.estimate:.4f}±{est.std_error:.4f}")
        assert time.perf_counter() - start < 30


def test_marginal_calibration(cases):
    with criterion(2) as notes:
        rounded = MrfPortfolio.from_factors([122.39, 122.39], conditional=[(3.33, [0]), (3.33, [1])])
        for label, p in (("power 3.33", rounded), ("power 10/3", cases["case1"])):
            prob = 1 - marginal(p, 0).ddf(15.0)
            assert 0.3188 <= prob <= 0.3208, (label, prob)
            notes.append(f"{label}: {prob:.5f}")


def test_simultaneous_default_mass(cases):
    with criterion(3) as notes:
        for name in ("case1", "case3"):
            p = cases[name]
            mass = simultaneous_default_prob(p, (0, 1))
            est = estimate_equal_mass(p, (0, 1), MC_N, MC_SEED)
            assert est.within(mass), (name, mass, est)
            notes.append(f"{name} {mass:.6f} mc {est.estimate:.6f}±{est.std_error:.6f}")
        assert simultaneous_default_prob(cases["case1"], (0, 1)) == pytest.approx(0.5, abs=1e-12)


def test_lebesgue_decomposition(cases):
    with criterion(4) as notes:
        grid = np.linspace(0.0, 400.0, 10)
        x, y = np.meshgrid(grid, grid)
        for name in ("case1", "case3"):
            p = cases[name]
            dec = bivariate_decompose(p, 0, 1)
            a = dec.singular_mass
            recon = a * dec.singular_ddf(x, y) + (1 - a) * dec.ac_ddf(x, y)
            err = float(np.max(np.abs(recon - bivariate_ddf(p, 0, 1, x, y))))
            assert err <= 1e-10, (name, err)
            notes.append(f"{name} max err {err:.1e}")


def test_gamma_convolution_suite():
    with criterion(5) as notes:
        geo = moschopoulos_pmf([GammaComponent(1, 1), GammaComponent(1, 2)])
        k = np.arange(31)
        assert_allclose(geo.pmf[:31], 0.5 ** (k + 1), rtol=0, atol=1e-12)
        rng = np.random.default_rng(MC_SEED)
        worst_mass = worst_ks = 0.0
        for _ in range(5):
            m = int(rng.integers(2, 5))
            shapes, rates = rng.uniform(0.5, 5, m), rng.uniform(0.5, 4, m)
            conv = moschopoulos_pmf([GammaComponent(a, r) for a, r in zip(shapes, rates)], 1e-10)
            worst_mass = max(worst_mass, abs(1 - conv.pmf.sum()))
            sims = sum(rng.gamma(a, 1 / r, MC_N) for a, r in zip(shapes, rates))
            grid = np.quantile(sims, np.linspace(0.01, 0.99, 99))
            worst_ks = max(worst_ks, kolmogorov_distance(sims, conv.cdf, grid))
        assert worst_mass <= 1e-10 and worst_ks <= 0.005
        notes.append(f"mass gap {worst_mass:.1e}, Kolmogorov {worst_ks:.4f}")


def test_special_case_equivalence():
    with criterion(6) as notes:
        worst = 0.0
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            su = two_component(rng, 0, int(rng.integers(1, 4)))
            cs = two_component(rng, int(rng.integers(1, 4)), 0)
            for p, form in ((su, corr_special_su), (cs, corr_special_cs)):
                rho = pearson_corr(p, 0, 1)
                alt = form(aggregate_powers(p, (0, 1)))
                assert_allclose(rho, alt, rtol=1e-8)
                worst = max(worst, abs(rho - alt) / abs(alt))
        for gamma in (2.5, 3.0, 6.0):
            shared_only = MrfPortfolio.from_factors([1.0, 3.0], conditional=[(gamma, [0, 1])])
            assert_allclose(pearson_corr(shared_only, 0, 1), 1 / gamma, rtol=0, atol=1e-10)
        notes.append(f"max rel gap {worst:.1e}; shared-factor-only pair gives 1/gamma")


def test_risk_orderings(cases):
    with criterion(7) as notes:
        for q in np.round(np.arange(0.1, 0.95, 0.1), 2):
            mins = [cte_minima(cases[c], (0, 1), q) for c in CHAIN]
            maxs = [cte_maxima(cases[c], q) for c in CHAIN]
            assert all(a >= b for a, b in zip(mins, mins[1:])), (q, mins)
            assert all(a <= b for a, b in zip(maxs, maxs[1:])), (q, maxs)
        for y in (5.0, 15.0, 30.0):
            b = [solvency_bonus(cases[c], 0, 1, y) for c in ("case1", "case3", "case2")]
            assert b[0] >= b[1] >= b[2], (y, b)
        notes.append("minima 1>=3>=2>=ind, maxima ind>=2>=3>=1, bonus 1>=3>=2")


def test_closed_forms_against_quadrature(cases):
    with criterion(8) as notes:
        portfolios = [cases["case3"]]
        rng = np.random.default_rng(2024)
        portfolios += [two_component(rng, int(rng.integers(0, 3)), int(rng.integers(1, 3)))
                       for _ in range(5)]
        worst = 0.0
        for p in portfolios:
            pm, ref = product_moment(p, 0, 1), quad_product_moment(p, 0, 1)
            worst = max(worst, abs(pm - ref) / ref)
            for y in (0.5 * p.sigma[1], 2.0 * p.sigma[1]):
                beta, ref_b = solvency_bonus(p, 0, 1, y), solvency_bonus_quad(p, 0, 1, y)
                worst = max(worst, abs(beta - ref_b) / abs(ref_b))
        assert worst <= 1e-4
        notes.append(f"max rel gap {worst:.1e}")


def test_end_to_end_verification(tmp_path):
    with criterion(9) as notes:
        rng = np.random.default_rng(9)
        spec = RandomPortfolioSpec(max_components=5, max_factors=8)
        start = time.perf_counter()
        failed = []
        for j in range(5):
            p = random_portfolio(rng, spec)
            assert p.n <= 5 and p.l + p.m <= 8
            cfg = tmp_path / f"p{j}.json"
            cfg.write_text(json.dumps({"portfolio": p.to_dict(), "mc": {"samples": MC_N}}))
            code = cli.main(["verify", "--config", str(cfg), "--out", str(tmp_path / f"v{j}")])
            rep = json.loads((tmp_path / f"v{j}" / "verify.json").read_text())
            worst = max(abs(c["z"]) for c in rep["checks"])
            notes.append(f"n={p.n} {len(rep['checks'])} checks max|z|={worst:.2f}")
            if code != cli.EXIT_OK:
                failed.append(j)
        elapsed = time.perf_counter() - start
        assert not failed, f"verification failed for portfolios {failed}: {notes}"
        assert elapsed < 300, elapsed
