"""Two-obligor case-study portfolios and random test portfolios.

Each obligor faces six factors of power ``mu`` (the mean factor rate),
so every marginal has power ``6 mu``.  The scale is calibrated so that
the 15-year default probability is 0.3198; at ``mu = 1/1.8`` this gives
the rounded scale 122.39.  The portfolios differ only in how the four
shared factors act:

* ``case1``: four shared comonotone factors;
* ``case2``: four shared conditionally independent factors;
* ``case3``: two of each;
* ``independent``: no shared factor (six idiosyncratic factors each).

Idiosyncratic factors hit a single obligor, so their block is immaterial
for the law; ``case1`` keeps them in the comonotone block (a purely
comonotone model), the others in the conditional block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import MrfPortfolio

BASE_MU = 1 / 1.8
BASE_SIGMA = 122.39
HORIZON = 15.0
DEFAULT_PROB = 0.3198
MU_SWEEP = (1 / 1.8, 1 / 2.0, 1 / 2.2, 1 / 2.4, 1 / 2.6)
CASE_NAMES = ("case1", "case2", "case3", "independent")
CORRELATION_TARGETS = {"case1": 0.36, "case2": 0.14, "case3": 0.23, "independent": 0.0}


def calibrated_sigma(mu: float, prob: float = DEFAULT_PROB, horizon: float = HORIZON) -> float:
    """Scale giving ``P[X <= horizon] = prob`` for marginal power ``6 mu``."""
    return horizon / math.expm1(-math.log1p(-prob) / (6 * mu))


def case_portfolio(name: str, mu: float = BASE_MU, sigma: float | None = None) -> MrfPortfolio:
    if sigma is None:
        sigma = BASE_SIGMA if mu == BASE_MU else calibrated_sigma(mu)
    both = [0, 1]
    own = [(mu, [0])] * 2 + [(mu, [1])] * 2
    if name == "case1":
        return MrfPortfolio.from_factors([sigma, sigma], comonotone=[(mu, both)] * 4 + own)
    if name == "case2":
        return MrfPortfolio.from_factors([sigma, sigma], conditional=[(mu, both)] * 4 + own)
    if name == "case3":
        return MrfPortfolio.from_factors([sigma, sigma], comonotone=[(mu, both)] * 2,
                                         conditional=[(mu, both)] * 2 + own)
    if name == "independent":
        solo = [(mu, [0])] * 6 + [(mu, [1])] * 6
        return MrfPortfolio.from_factors([sigma, sigma], conditional=solo)
    raise KeyError(f"unknown case {name!r}; expected one of {CASE_NAMES}")


@dataclass(frozen=True)
class RandomPortfolioSpec:
    max_components: int = 5
    max_factors: int = 8
    min_marginal_power: float = 4.5
    power_range: tuple[float, float] = (0.5, 3.0)
    scale_range: tuple[float, float] = (0.5, 3.0)


def random_portfolio(rng: np.random.Generator,
                     spec: RandomPortfolioSpec = RandomPortfolioSpec(),
                     n: int | None = None) -> MrfPortfolio:
    """Random valid portfolio whose marginals have powers above ``min_marginal_power``.

    Every component gets an idiosyncratic factor, which keeps every row
    non-empty and is used to top up the marginal power; shared factors
    are split at random between the two blocks.
    """
    if n is None:
        n = int(rng.integers(2, spec.max_components + 1))
    if n > spec.max_factors:
        raise ValueError("need at least one factor per component")
    shared = int(rng.integers(1, spec.max_factors - n + 1)) if spec.max_factors > n else 0
    lo, hi = spec.power_range
    como, cond = [], []
    power_sum = np.zeros(n)
    for _ in range(shared):
        size = int(rng.integers(2, n + 1))
        comps = sorted(rng.choice(n, size=size, replace=False).tolist())
        power = float(rng.uniform(lo, hi))
        power_sum[comps] += power
        (como if rng.random() < 0.5 else cond).append((power, comps))
    for i in range(n):
        power = max(float(rng.uniform(lo, hi)), spec.min_marginal_power - power_sum[i] + 0.1)
        (como if rng.random() < 0.5 else cond).append((power, [i]))
    sigma = rng.uniform(*spec.scale_range, size=n).tolist()
    return MrfPortfolio.from_factors(sigma, comonotone=como, conditional=cond)


__all__ = [
    "BASE_MU",
    "BASE_SIGMA",
    "CASE_NAMES",
    "CORRELATION_TARGETS",
    "MU_SWEEP",
    "RandomPortfolioSpec",
    "calibrated_sigma",
    "case_portfolio",
    "random_portfolio",
]
