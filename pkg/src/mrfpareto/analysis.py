"""Scenario evaluation, Monte Carlo verification and case-study reproduction.

Component indices are 1-based in scenario files and reports, 0-based in
the library calls.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .config import config_hash, validate_scenario
from .errors import EmptyTail, InfiniteMean, ValidationError
from .extremes import last_default_ddf, minima_law, simultaneous_default_prob
from .mc import (
    McEstimate,
    estimate_corr,
    estimate_ddf,
    estimate_equal_mass,
    estimate_solvency_bonus,
    estimate_tail_mean,
    draws,
)
from .model import MrfPortfolio, aggregate_powers, joint_ddf, marginal
from .moments import pearson_corr, product_moment
from .risk import (
    cte_marginal,
    cte_maxima,
    cte_minima,
    solvency_bonus,
    var_marginal,
    var_maxima,
    var_minima,
)
from .scenarios import (
    BASE_MU,
    CASE_NAMES,
    CORRELATION_TARGETS,
    HORIZON,
    MU_SWEEP,
    case_portfolio,
)
from .special import DEFAULT_REL_TOL

DEFAULT_SEED = 20161
DEFAULT_SAMPLES = 1_000_000
SE_BAND = 3.0


@dataclass(frozen=True)
class Queries:
    ddf_points: tuple[tuple[float, ...], ...]
    pairs: tuple[tuple[int, int], ...]
    levels: tuple[float, ...]
    minima_subsets: tuple[tuple[int, ...], ...]
    bonus_thresholds: tuple[float, ...]
    sample_count: int = 10_000


def _default_pairs(p: MrfPortfolio) -> list[tuple[int, int]]:
    pairs = list(itertools.combinations(range(1, p.n + 1), 2))
    if len(pairs) <= 2:
        return pairs
    # first pair plus the most strongly linked one
    def shared(pair):
        agg = aggregate_powers(p, (pair[0] - 1, pair[1] - 1))
        return (agg.xi_common, -pair[0], -pair[1])
    best = max(pairs[1:], key=shared)
    return [pairs[0], best]


def default_queries(p: MrfPortfolio) -> Queries:
    sig = np.array(p.sigma)
    points = tuple(tuple(float(v) for v in t * sig) for t in (0.05, 0.2, 0.5))
    return Queries(
        ddf_points=points,
        pairs=tuple(_default_pairs(p)),
        levels=(0.5,),
        minima_subsets=(tuple(range(1, p.n + 1)),),
        bonus_thresholds=(float(np.mean(sig)),),
    )


def parse_scenario(data: dict) -> tuple[MrfPortfolio, Queries, dict]:
    """Split a scenario (or a bare portfolio) into model, queries and settings."""
    if "portfolio" not in data and "sigma" in data:
        data = {"portfolio": data}
    validate_scenario(data)
    p = MrfPortfolio.from_dict(data["portfolio"])
    q = data.get("queries", {})
    base = default_queries(p)
    queries = Queries(
        ddf_points=tuple(tuple(map(float, x)) for x in q.get("ddf_points", base.ddf_points)),
        pairs=tuple(tuple(x) for x in q.get("pairs", base.pairs)),
        levels=tuple(q.get("levels", base.levels)),
        minima_subsets=tuple(tuple(s) for s in q.get("minima_subsets", base.minima_subsets)),
        bonus_thresholds=tuple(q.get("bonus_thresholds", base.bonus_thresholds)),
        sample_count=int(q.get("sample_count", base.sample_count)),
    )
    settings = {
        "samples": data.get("mc", {}).get("samples", DEFAULT_SAMPLES),
        "seed": data.get("mc", {}).get("seed", DEFAULT_SEED),
        "tolerance": data.get("tolerance", DEFAULT_REL_TOL),
        "output": data.get("output"),
    }
    return p, queries, settings


def _fmt_set(idx) -> str:
    return ",".join(str(i) for i in idx)


def _finite(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _zero_based(p: MrfPortfolio, idx):
    out = tuple(int(i) - 1 for i in idx)
    if any(not 0 <= i < p.n for i in out):
        raise ValidationError(f"component indices {list(idx)} outside 1..{p.n}")
    return out


def evaluate(p: MrfPortfolio, queries: Queries, rel_tol: float = DEFAULT_REL_TOL) -> dict:
    """Closed-form analytics keyed by query id; non-existent moments map to ``None``."""
    out: dict = {}
    for i in range(p.n):
        law = marginal(p, i)
        out[f"marginal_power[{i + 1}]"] = law.shape
        out[f"mean[{i + 1}]"] = _finite(law.mean)
        out[f"variance[{i + 1}]"] = _finite(law.variance)
    for x in queries.ddf_points:
        out[f"ddf[{_fmt_set(x)}]"] = joint_ddf(p, x)
    for a, b in queries.pairs:
        i, k = _zero_based(p, (a, b))
        tag = f"{a},{b}"
        out[f"product_moment[{tag}]"] = _finite(product_moment(p, i, k, rel_tol))
        out[f"correlation[{tag}]"] = pearson_corr(p, i, k, rel_tol)
        out[f"simultaneous_mass[{tag}]"] = simultaneous_default_prob(p, (i, k))
        for y in queries.bonus_thresholds:
            try:
                out[f"solvency_bonus[{tag}]@y={y!r}"] = solvency_bonus(p, i, k, y, rel_tol)
            except InfiniteMean:
                out[f"solvency_bonus[{tag}]@y={y!r}"] = None
    for s in queries.minima_subsets:
        idx = _zero_based(p, s)
        tag = _fmt_set(s)
        rl = minima_law(p, idx)
        out[f"minima_scale[{tag}]"] = rl.scale
        out[f"minima_power[{tag}]"] = rl.base_shape
        for q in queries.levels:
            out[f"var_minima[{tag}]@q={q!r}"] = var_minima(p, idx, q)
            try:
                out[f"cte_minima[{tag}]@q={q!r}"] = cte_minima(p, idx, q)
            except InfiniteMean:
                out[f"cte_minima[{tag}]@q={q!r}"] = None
    for q in queries.levels:
        for i in range(p.n):
            out[f"var_marginal[{i + 1}]@q={q!r}"] = var_marginal(p, i, q)
            try:
                out[f"cte_marginal[{i + 1}]@q={q!r}"] = cte_marginal(p, i, q)
            except InfiniteMean:
                out[f"cte_marginal[{i + 1}]@q={q!r}"] = None
        out[f"var_maxima@q={q!r}"] = var_maxima(p, q)
        try:
            out[f"cte_maxima@q={q!r}"] = cte_maxima(p, q)
        except InfiniteMean:
            out[f"cte_maxima@q={q!r}"] = None
    return out


@dataclass(frozen=True)
class Check:
    id: str
    analytic: float
    mc: float
    std_error: float
    passed: bool
    note: str = ""

    @property
    def z(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.analytic == self.mc else math.inf
        return (self.mc - self.analytic) / self.std_error


def _check(cid, analytic, est) -> Check:
    ok = abs(est.estimate - analytic) <= SE_BAND * est.std_error
    return Check(cid, float(analytic), est.estimate, est.std_error, bool(ok))


def verify(p: MrfPortfolio, queries: Queries, samples: int, seed: int,
           rel_tol: float = DEFAULT_REL_TOL) -> list[Check]:
    """Pair each closed form with its Monte Carlo oracle on one shared sample."""
    checks: list[Check] = []
    n, s = samples, seed
    for x in queries.ddf_points:
        checks.append(_check(f"ddf[{_fmt_set(x)}]", joint_ddf(p, x), estimate_ddf(p, x, n, s)))
    x_all = draws(p, n, s)
    t = float(np.median(p.sigma))
    est = _frequency(x_all.max(axis=1) > t, n, s)
    checks.append(_check(f"last_default_ddf@x={t!r}", last_default_ddf(p, t), est))
    for sub in queries.minima_subsets:
        idx = _zero_based(p, sub)
        tag = _fmt_set(sub)
        rl = minima_law(p, idx)
        x0 = 0.1 * rl.scale
        est = _frequency(x_all[:, list(idx)].min(axis=1) > x0, n, s)
        checks.append(_check(f"minima_ddf[{tag}]@x={x0!r}", rl.ddf(x0), est))
        for q in queries.levels:
            try:
                value = cte_minima(p, idx, q)
            except InfiniteMean:
                continue
            checks.append(_tail_check(f"cte_minima[{tag}]@q={q!r}", value, p,
                                      ("minima", idx), var_minima(p, idx, q), n, s))
    for a, b in queries.pairs:
        i, k = _zero_based(p, (a, b))
        tag = f"{a},{b}"
        rho = pearson_corr(p, i, k, rel_tol)
        if rho is not None:
            checks.append(_check(f"correlation[{tag}]", rho, estimate_corr(p, i, k, n, s)))
        checks.append(_check(f"simultaneous_mass[{tag}]", simultaneous_default_prob(p, (i, k)),
                             estimate_equal_mass(p, (i, k), n, s)))
        for y in queries.bonus_thresholds:
            try:
                beta = solvency_bonus(p, i, k, y, rel_tol)
                est = estimate_solvency_bonus(p, i, k, y, n, s)
            except (InfiniteMean, EmptyTail):
                continue
            checks.append(_check(f"solvency_bonus[{tag}]@y={y!r}", beta, est))
    for q in queries.levels:
        try:
            value = cte_maxima(p, q)
        except InfiniteMean:
            continue
        checks.append(_tail_check(f"cte_maxima@q={q!r}", value, p, ("maxima", ()),
                                  var_maxima(p, q), n, s))
    return checks


def _frequency(hits: np.ndarray, n: int, seed: int) -> McEstimate:
    freq = float(np.count_nonzero(hits)) / n
    return McEstimate(freq, math.sqrt(freq * (1 - freq) / n), n, seed)


def _tail_check(cid, analytic, p, target, threshold, n, seed) -> Check:
    try:
        est = estimate_tail_mean(p, target, threshold, n, seed)
    except EmptyTail as err:
        return Check(cid, analytic, math.nan, math.nan, False, str(err))
    return _check(cid, analytic, est)


def report(command: str, config: dict, body: dict) -> dict:
    return {"version": __version__, "command": command,
            "config_hash": config_hash(config), **body}


def write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")


def checks_to_dict(checks: list[Check]) -> list[dict]:
    out = []
    for c in checks:
        d = asdict(c)
        for key in ("mc", "std_error"):
            d[key] = _finite(d[key])
        d["z"] = _finite(c.z)
        out.append(d)
    return out


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


CTE_LEVELS = tuple(round(0.01 * j, 2) for j in range(1, 100))
BONUS_THRESHOLDS = tuple(float(y) for y in range(1, 61))


def reproduce_section6(out_dir: str, samples: int = DEFAULT_SAMPLES,
                       seed: int = DEFAULT_SEED) -> dict:
    """Write the case-study tables and curves; return a summary dictionary."""
    os.makedirs(os.path.join(out_dir, "portfolios"), exist_ok=True)
    cases = {name: case_portfolio(name) for name in CASE_NAMES}
    for name, p in cases.items():
        write_json(os.path.join(out_dir, "portfolios", f"{name}.json"), p.to_dict())

    corr_rows = []
    summary_cases = {}
    for name, p in cases.items():
        rho = pearson_corr(p, 0, 1)
        est = estimate_corr(p, 0, 1, samples, seed)
        corr_rows.append((name, rho, CORRELATION_TARGETS[name], est.estimate, est.std_error))
        summary_cases[name] = {
            "correlation": rho,
            "correlation_mc": est.estimate,
            "correlation_mc_std_error": est.std_error,
            "default_probability": 1.0 - marginal(p, 0).ddf(HORIZON),
            "marginal_mean": marginal(p, 0).mean,
            "simultaneous_mass": simultaneous_default_prob(p, (0, 1)),
        }
    _write_csv(os.path.join(out_dir, "correlations.csv"),
               ["portfolio", "correlation", "target", "mc_estimate", "mc_std_error"], corr_rows)

    _write_csv(os.path.join(out_dir, "cte_minima.csv"), ["portfolio", "q", "value"],
               [(name, q, cte_minima(p, (0, 1), q)) for name, p in cases.items() for q in CTE_LEVELS])
    _write_csv(os.path.join(out_dir, "cte_maxima.csv"), ["portfolio", "q", "value"],
               [(name, q, cte_maxima(p, q)) for name, p in cases.items() for q in CTE_LEVELS])
    _write_csv(os.path.join(out_dir, "solvency_bonus.csv"), ["portfolio", "y", "value"],
               [(name, y, solvency_bonus(p, 0, 1, y))
                for name, p in cases.items() for y in BONUS_THRESHOLDS])

    sweep_min, sweep_bonus = [], []
    for name in CASE_NAMES:
        for mu in MU_SWEEP:
            p = case_portfolio(name, mu)
            sweep_min += [(name, mu, q, cte_minima(p, (0, 1), q)) for q in CTE_LEVELS]
            sweep_bonus += [(name, mu, y, solvency_bonus(p, 0, 1, y)) for y in BONUS_THRESHOLDS]
    _write_csv(os.path.join(out_dir, "cte_minima_mu_sweep.csv"),
               ["portfolio", "mu", "q", "value"], sweep_min)
    _write_csv(os.path.join(out_dir, "solvency_bonus_mu_sweep.csv"),
               ["portfolio", "mu", "y", "value"], sweep_bonus)

    summary = {"mu": BASE_MU, "sigma": cases["case1"].sigma[0], "horizon": HORIZON,
               "samples": samples, "seed": seed, "cases": summary_cases}
    return summary


__all__ = [
    "Check",
    "Queries",
    "default_queries",
    "evaluate",
    "parse_scenario",
    "reproduce_section6",
    "verify",
]
