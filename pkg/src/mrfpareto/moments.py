"""Product moments and Pearson correlations of component pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegeneratePair, PreconditionViolated
from .model import AggregatedPowers, MrfPortfolio, aggregate_powers
from .special import DEFAULT_REL_TOL, h_fun, hyp3f2


@dataclass(frozen=True)
class PairMoments:
    product_moment: float
    correlation: Optional[float]
    finite_flags: tuple[bool, bool, bool]

    @property
    def covariance_defined(self) -> bool:
        return all(self.finite_flags)


def _pair_powers(p: MrfPortfolio, i: int, k: int) -> AggregatedPowers:
    if i == k:
        raise DegeneratePair("moments need two distinct components")
    # keep (i, k) order: aggregate_powers sorts the subset
    agg = aggregate_powers(p, (i, k))
    if i > k:
        agg = AggregatedPowers(
            subset=(i, k),
            xi_c=agg.xi_c[::-1], alpha_c=agg.alpha_c[::-1], gamma_c=agg.gamma_c[::-1],
            xi_union=agg.xi_union, alpha_union=agg.alpha_union,
            gamma_union=agg.gamma_union, xi_common=agg.xi_common,
            alpha_common=agg.alpha_common, gamma_common=agg.gamma_common,
            xi_own=agg.xi_own[::-1],
        )
    return agg


def _h_terms(agg: AggregatedPowers, rel_tol: float) -> tuple[float, float]:
    xi_i, xi_k = agg.xi_c
    g = agg.gamma_common
    b = agg.xi_union
    return h_fun(xi_i, g, b, rel_tol), h_fun(xi_k, g, b, rel_tol)


def product_moment(p: MrfPortfolio, i: int, k: int,
                   rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``E[X_i X_k]``; ``inf`` when the moment does not exist.

    The moment is finite iff both marginal means exist and the union power
    ``ξ_{c,i,k}`` exceeds 2.
    """
    agg = _pair_powers(p, i, k)
    xi_i, xi_k = agg.xi_c
    xi_ik = agg.xi_union
    if xi_i <= 1 or xi_k <= 1 or xi_ik <= 2:
        return math.inf
    h_i, h_k = _h_terms(agg, rel_tol)
    num = (xi_k - 1) * h_i + (xi_i - 1) * h_k
    return p.sigma[i] * p.sigma[k] * num / ((xi_ik - 2) * (xi_i - 1) * (xi_k - 1))


def _sqrt_factor(xi_i: float, xi_k: float) -> float:
    return math.sqrt((xi_i - 2) * (xi_k - 2) / (xi_i * xi_k))


def pearson_corr(p: MrfPortfolio, i: int, k: int,
                 rel_tol: float = DEFAULT_REL_TOL) -> Optional[float]:
    """Closed-form correlation; ``None`` unless both variances are finite."""
    agg = _pair_powers(p, i, k)
    xi_i, xi_k = agg.xi_c
    if xi_i <= 2 or xi_k <= 2:
        return None
    xi_ik = agg.xi_union
    h_i, h_k = _h_terms(agg, rel_tol)
    bracket = (xi_k - 1) * h_i + (xi_i - 1) * h_k - xi_ik + 2
    return _sqrt_factor(xi_i, xi_k) * bracket / (xi_ik - 2)


def pair_moments(p: MrfPortfolio, i: int, k: int,
                 rel_tol: float = DEFAULT_REL_TOL) -> PairMoments:
    agg = _pair_powers(p, i, k)
    flags = (agg.xi_c[0] > 2, agg.xi_c[1] > 2, agg.xi_union > 2)
    return PairMoments(product_moment(p, i, k, rel_tol), pearson_corr(p, i, k, rel_tol), flags)


def corr_special_su(powers: AggregatedPowers, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Correlation for a pair sharing only conditionally independent factors."""
    if len(powers.subset) != 2:
        raise PreconditionViolated("expected powers of a component pair")
    if powers.alpha_common != 0:
        raise PreconditionViolated("pair shares a comonotone factor")
    xi_i, xi_k = powers.xi_c
    if xi_i <= 2 or xi_k <= 2:
        raise PreconditionViolated("both power sums must exceed 2")
    g = powers.gamma_common
    return _sqrt_factor(xi_i, xi_k) * (hyp3f2(g, 1.0, 1.0, xi_i, xi_k, 1.0, rel_tol) - 1.0)


def corr_special_cs(powers: AggregatedPowers) -> float:
    """Correlation for a pair sharing only comonotone factors."""
    if len(powers.subset) != 2:
        raise PreconditionViolated("expected powers of a component pair")
    if powers.gamma_common != 0:
        raise PreconditionViolated("pair shares a conditionally independent factor")
    xi_i, xi_k = powers.xi_c
    if xi_i <= 2 or xi_k <= 2:
        raise PreconditionViolated("both power sums must exceed 2")
    return _sqrt_factor(xi_i, xi_k) * powers.alpha_common / (powers.xi_union - 2)


__all__ = [
    "PairMoments",
    "corr_special_cs",
    "corr_special_su",
    "pair_moments",
    "pearson_corr",
    "product_moment",
]
