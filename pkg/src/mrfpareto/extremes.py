"""First and last default times, simultaneous defaults, bivariate decomposition."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DegeneratePair, PortfolioTooLarge, SubsetTooSmall
from .gammaconv import (
    DEFAULT_TAIL_TOL,
    GammaComponent,
    RandomizedLomax,
    moschopoulos_pmf,
)
from .model import MrfPortfolio, _subset, aggregate_powers, joint_ddf

MAX_COMPONENTS = 20


def minima_components(p: MrfPortfolio, subset: Iterable[int]) -> list[GammaComponent]:
    """Gamma rates whose sum is the hazard of ``min_{i in S} X_i``.

    A comonotone factor contributes its shared exponential scaled by the
    smallest ``σ_i`` it hits inside ``S``; a conditionally independent factor
    contributes the minimum of independent copies, whose rate adds up
    ``1/σ_i`` over the members it hits.
    """
    s = _subset(p, subset)
    ex = p.exposure
    out = []
    for j in range(ex.d):
        hit = [i for i in ex.hit_components(j) if i in s]
        if not hit:
            continue
        if ex.is_comonotone(j):
            rate = min(p.sigma[i] for i in hit)
        else:
            rate = 1.0 / math.fsum(1.0 / p.sigma[i] for i in hit)
        out.append(GammaComponent(p.xi[j], rate))
    return out


@lru_cache(maxsize=4096)
def _minima_cached(p: MrfPortfolio, subset: tuple[int, ...], tail_tol: float):
    conv = moschopoulos_pmf(minima_components(p, subset), tail_tol)
    return RandomizedLomax.from_convolution(conv)


def minima_law(p: MrfPortfolio, subset: Iterable[int],
               tail_tol: float = DEFAULT_TAIL_TOL) -> RandomizedLomax:
    """Law of the first default time in ``subset``: ``Pa(II)(σ₊, ξ* + K)``."""
    return _minima_cached(p, _subset(p, subset), float(tail_tol))


def _check_size(p: MrfPortfolio) -> None:
    if p.n > MAX_COMPONENTS:
        raise PortfolioTooLarge(
            f"{p.n} components: subset enumeration is capped at {MAX_COMPONENTS}"
        )


def nonempty_subsets(n: int):
    """All non-empty index subsets, ordered by size then lexicographically."""
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def last_default_ddf(p: MrfPortfolio, x, tail_tol: float = DEFAULT_TAIL_TOL):
    """``P[max_i X_i > x]`` by inclusion-exclusion over first-default laws.

    Truncated mixing laws carry slightly less than unit mass, so the sum
    may leave ``[0, 1]`` by at most ``2**n * tail_tol``; it is not clipped,
    which keeps the inclusion-exclusion identity exact.
    """
    _check_size(p)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for s in nonempty_subsets(p.n):
        sign = 1.0 if len(s) % 2 else -1.0
        total = total + sign * minima_law(p, s, tail_tol).ddf(x)
    return float(total) if total.ndim == 0 else total


@dataclass(frozen=True, eq=False)
class TieMixture:
    """Pieces of the simultaneous-default formula for one subset.

    ``pmf`` is the law of ``K`` against unit rate, ``base_shape`` the union
    power sum and ``weight`` the power shared by every member.
    """

    weight: float
    base_shape: float
    pmf: np.ndarray
    tail_tol: float

    @property
    def shapes(self) -> np.ndarray:
        return self.base_shape + np.arange(len(self.pmf))

    @property
    def probability(self) -> float:
        if self.weight == 0:
            return 0.0
        return float(self.weight * np.dot(self.pmf, 1.0 / self.shapes))

    @property
    def error_bound(self) -> float:
        """Upper bound on the mass dropped by truncating ``K``."""
        return self.weight * self.tail_tol / self.base_shape

    def tail(self, m):
        """``a · P[common value > m | tie]`` for scaled threshold ``m``."""
        m = np.asarray(m, dtype=float)
        surv = np.exp(-np.log1p(m)[..., None] * self.shapes)
        return self.weight * (surv @ (self.pmf / self.shapes))

    def conditional_tail(self, m):
        """``P[common value > m | tie]``; defined by continuity when no tie is possible."""
        m = np.asarray(m, dtype=float)
        w = self.pmf / self.shapes
        surv = np.exp(-np.log1p(m)[..., None] * self.shapes)
        return (surv @ w) / w.sum()


def tie_mixture(p: MrfPortfolio, subset: Iterable[int],
                tail_tol: float = DEFAULT_TAIL_TOL) -> TieMixture:
    s = _subset(p, subset)
    if len(s) < 2:
        raise SubsetTooSmall("simultaneous default needs at least two components")
    ex = p.exposure
    agg = aggregate_powers(p, s)
    comps = []
    if agg.alpha_union > 0:
        comps.append(GammaComponent(agg.alpha_union, 1.0))
    for j in range(ex.l, ex.d):
        h = sum(1 for i in ex.hit_components(j) if i in s)
        if h:
            comps.append(GammaComponent(p.xi[j], 1.0 / h))
    # rates are 1 and 1/h; pin the reference at 1 even when no rate-1 term exists
    conv = moschopoulos_pmf(comps, tail_tol, reference_rate=1.0)
    return TieMixture(agg.alpha_common, agg.xi_union, conv.pmf, tail_tol)


def simultaneous_default_prob(p: MrfPortfolio, subset: Iterable[int],
                              tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``P[X_i/σ_i`` all equal over ``subset]``."""
    return tie_mixture(p, subset, tail_tol).probability


@dataclass(frozen=True, eq=False)
class BivariateDecomposition:
    """``F̄ = a F̄_s + (1 - a) F̄_ac`` for the pair ``(i, k)``."""

    portfolio: MrfPortfolio
    i: int
    k: int
    singular_mass: float
    mixture: TieMixture

    def _scaled_max(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.maximum(x / self.portfolio.sigma[self.i], y / self.portfolio.sigma[self.k])

    def joint_ddf(self, x, y):
        return bivariate_ddf(self.portfolio, self.i, self.k, x, y)

    def singular_ddf(self, x, y):
        out = self.mixture.conditional_tail(self._scaled_max(x, y))
        return float(out) if np.ndim(out) == 0 else out

    def ac_ddf(self, x, y):
        joint = self.joint_ddf(x, y)
        a = self.singular_mass
        if a >= 1.0:
            return joint
        out = (joint - self.mixture.tail(self._scaled_max(x, y))) / (1.0 - a)
        return float(out) if np.ndim(out) == 0 else out


def bivariate_ddf(p: MrfPortfolio, i: int, k: int, x, y):
    """``P[X_i > x, X_k > y]`` with the other coordinates at zero."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    pts = np.zeros(x.shape + (p.n,))
    pts[..., i] = x
    pts[..., k] = y
    return joint_ddf(p, pts)


def bivariate_decompose(p: MrfPortfolio, i: int, k: int,
                        tail_tol: float = DEFAULT_TAIL_TOL) -> BivariateDecomposition:
    if i == k:
        raise DegeneratePair("decomposition needs two distinct components")
    mix = tie_mixture(p, (i, k), tail_tol)
    return BivariateDecomposition(p, i, k, mix.probability, mix)


__all__ = [
    "BivariateDecomposition",
    "MAX_COMPONENTS",
    "TieMixture",
    "bivariate_ddf",
    "bivariate_decompose",
    "last_default_ddf",
    "minima_components",
    "minima_law",
    "nonempty_subsets",
    "simultaneous_default_prob",
    "tie_mixture",
]
