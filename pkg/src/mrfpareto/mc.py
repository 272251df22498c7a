"""Monte Carlo estimators used to check the closed forms.

Every estimator draws from :func:`sample_latent` with an explicit seed, so
results are bit-reproducible.  Standard errors are plug-in binomial or
sample-variance formulas, except for correlations, which use a bootstrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyTail, ValidationError
from .model import MrfPortfolio, _subset, sample_latent

MIN_SAMPLES = 10_000
DEFAULT_SAMPLES = 1_000_000
BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    n_samples: int
    seed: int

    def within(self, value: float, k: float = 3.0) -> bool:
        """True when ``value`` lies within ``k`` standard errors of the estimate."""
        return abs(self.estimate - value) <= k * self.std_error

    def z_score(self, value: float) -> float:
        diff = self.estimate - value
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.std_error


def _check_n(n: int) -> None:
    if n < MIN_SAMPLES:
        raise ValidationError(f"Monte Carlo needs at least {MIN_SAMPLES} samples, got {n}")


@lru_cache(maxsize=2)
def _latent(p: MrfPortfolio, n: int, seed: int) -> np.ndarray:
    u = sample_latent(p, n, seed)
    u.setflags(write=False)
    return u


def draws(p: MrfPortfolio, n: int, seed: int) -> np.ndarray:
    """Default times ``X`` for ``n`` replications (cached per portfolio/seed)."""
    return _latent(p, n, seed) * np.array(p.sigma)


def _binomial(hits: np.ndarray, n: int, seed: int) -> McEstimate:
    freq = float(np.count_nonzero(hits)) / n
    return McEstimate(freq, math.sqrt(freq * (1 - freq) / n), n, seed)


def estimate_ddf(p: MrfPortfolio, x: Sequence[float], n: int = DEFAULT_SAMPLES,
                 seed: int = 0) -> McEstimate:
    """Empirical ``P[X_i > x_i for all i]``."""
    _check_n(n)
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValidationError(f"expected {p.n} coordinates")
    return _binomial(np.all(draws(p, n, seed) > x, axis=1), n, seed)


def _corr_from_sums(sums: np.ndarray, total: float) -> float:
    sx, sy, sxx, syy, sxy = sums / total
    return float((sxy - sx * sy) / math.sqrt((sxx - sx * sx) * (syy - sy * sy)))


def estimate_corr(p: MrfPortfolio, i: int, k: int, n: int = DEFAULT_SAMPLES,
                  seed: int = 0, resamples: int = BOOTSTRAP_RESAMPLES) -> McEstimate:
    """Sample Pearson correlation with a nonparametric bootstrap standard error.

    Each bootstrap replicate reweights the original draws by multinomial
    counts, so only five weighted sums are needed per replicate.
    """
    _check_n(n)
    x = draws(p, n, seed)
    xi = x[:, i] - x[:, i].mean()
    xk = x[:, k] - x[:, k].mean()
    stats = np.stack([xi, xk, xi * xi, xk * xk, xi * xk])
    est = _corr_from_sums(stats.sum(axis=1), n)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xB007])))
    reps = np.empty(resamples)
    for r in range(resamples):
        w = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
        reps[r] = _corr_from_sums(stats @ w, n)
    return McEstimate(est, float(reps.std(ddof=1)), n, seed)


def estimate_equal_mass(p: MrfPortfolio, subset: Iterable[int], n: int = DEFAULT_SAMPLES,
                        seed: int = 0) -> McEstimate:
    """Frequency of exactly equal scaled default times across ``subset``.

    Ties come only from a shared comonotone draw and are compared on the
    unscaled latent times, so floating equality is exact by construction.
    """
    _check_n(n)
    s = list(_subset(p, subset))
    if len(s) < 2:
        raise ValidationError("ties need at least two components")
    u = _latent(p, n, seed)[:, s]
    return _binomial(np.all(u == u[:, :1], axis=1), n, seed)


def target_values(p: MrfPortfolio, x: np.ndarray, kind: str, components=()) -> np.ndarray:
    """Column of ``x`` selected by a marginal, minima or maxima target."""
    if kind == "marginal":
        (i,) = components
        return x[:, i]
    if kind == "minima":
        s = list(_subset(p, components)) if components else list(range(p.n))
        return x[:, s].min(axis=1)
    if kind == "maxima":
        return x.max(axis=1)
    raise ValidationError(f"unknown target {kind!r}")


def estimate_tail_mean(p: MrfPortfolio, target, t: float, n: int = DEFAULT_SAMPLES,
                       seed: int = 0) -> McEstimate:
    """Mean of the target beyond ``t``; ``target`` is ``(kind, components)``.

    Raises
    ------
    EmptyTail
        No replication exceeded ``t``.
    """
    _check_n(n)
    kind, comps = target if isinstance(target, tuple) else (target, ())
    v = target_values(p, draws(p, n, seed), kind, tuple(comps))
    tail = v[v > t]
    if tail.size == 0:
        raise EmptyTail(f"no replications beyond t={t}; raise n or lower t")
    se = float(tail.std(ddof=1) / math.sqrt(tail.size)) if tail.size > 1 else math.inf
    return McEstimate(float(tail.mean()), se, n, seed)


def estimate_solvency_bonus(p: MrfPortfolio, i: int, k: int, y: float,
                            n: int = DEFAULT_SAMPLES, seed: int = 0) -> McEstimate:
    """``mean(X_i | X_k > y) - mean(X_i)`` with an influence-function standard error."""
    _check_n(n)
    x = draws(p, n, seed)
    xi = x[:, i]
    cond = x[:, k] > y
    m = int(np.count_nonzero(cond))
    if m == 0:
        raise EmptyTail(f"no replications with component {k} beyond y={y}")
    mu = xi.mean()
    mu_c = xi[cond].mean()
    infl = cond * (xi - mu_c) * (n / m) - (xi - mu)
    return McEstimate(float(mu_c - mu), float(infl.std(ddof=1) / math.sqrt(n)), n, seed)


def kolmogorov_distance(sample: np.ndarray, cdf, grid: np.ndarray) -> float:
    """Largest gap between the empirical and model c.d.f. over ``grid``."""
    s = np.sort(sample)
    emp = np.searchsorted(s, grid, side="right") / s.size
    return float(np.max(np.abs(emp - cdf(grid))))


__all__ = [
    "BOOTSTRAP_RESAMPLES",
    "DEFAULT_SAMPLES",
    "McEstimate",
    "draws",
    "estimate_corr",
    "estimate_ddf",
    "estimate_equal_mass",
    "estimate_solvency_bonus",
    "estimate_tail_mean",
    "kolmogorov_distance",
    "target_values",
]
