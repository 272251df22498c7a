"""VaR and CTE of marginals, first and last default times; solvency bonus."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, optimize

from .errors import InfiniteMean, NoConvergence, RootNotBracketed, ValidationError
from .extremes import _check_size, bivariate_ddf, last_default_ddf, minima_law, nonempty_subsets
from .gammaconv import DEFAULT_TAIL_TOL, RandomizedLomax
from .model import MrfPortfolio, _subset, _worker_count, aggregate_powers, marginal
from .special import DEFAULT_REL_TOL, hyp2f1

ROOT_XTOL = 1e-10


def _check_level(q: float) -> None:
    if not 0.0 <= q < 1.0:
        raise ValidationError(f"level q={q} must lie in [0, 1)")


@dataclass(frozen=True)
class RiskQuery:
    """A VaR/CTE request: ``kind`` is ``marginal``, ``minima`` or ``maxima``."""

    level: float
    kind: str
    components: tuple[int, ...] = ()

    def __post_init__(self):
        _check_level(self.level)
        if self.kind not in ("marginal", "minima", "maxima"):
            raise ValidationError(f"unknown risk target {self.kind!r}")
        if self.kind == "marginal" and len(self.components) != 1:
            raise ValidationError("a marginal query names exactly one component")


def var_marginal(p: MrfPortfolio, i: int, q: float) -> float:
    _check_level(q)
    law = marginal(p, i)
    return law.scale * math.expm1(-math.log1p(-q) / law.shape)


def cte_marginal(p: MrfPortfolio, i: int, q: float) -> float:
    _check_level(q)
    law = marginal(p, i)
    if law.shape <= 1:
        raise InfiniteMean(f"component {i} has power {law.shape} <= 1")
    return law.mean + var_marginal(p, i, q) * law.shape / (law.shape - 1)


def cte_marginal_weighted(p: MrfPortfolio, i: int, q: float) -> float:
    """Same quantity via ``E[X] P[X* > VaR] / (1 - q) + VaR`` with ``X* ~ Pa(σ, ξ-1)``."""
    _check_level(q)
    law = marginal(p, i)
    if law.shape <= 1:
        raise InfiniteMean(f"component {i} has power {law.shape} <= 1")
    t = var_marginal(p, i, q)
    tilted = (1 + t / law.scale) ** -(law.shape - 1)
    return law.mean * tilted / (1 - q) + t


@dataclass(frozen=True, eq=False)
class TiltedMixing:
    """Size-biased mixing law ``q_k ∝ p_k / (ξ* + k - 1)`` and its Lomax."""

    pmf: np.ndarray = field(repr=False)
    law: RandomizedLomax

    @property
    def total_mass(self) -> float:
        return float(self.pmf.sum())


def tilted_mixing(rl: RandomizedLomax) -> TiltedMixing:
    if rl.base_shape <= 1:
        raise InfiniteMean(f"power parameter {rl.base_shape} <= 1")
    w = rl.pmf / (rl.shapes - 1.0)
    # the truncated mass is spread proportionally so Σ q_k tracks Σ p_k
    qk = w / w.sum() * rl.pmf.sum()
    return TiltedMixing(qk, RandomizedLomax(rl.scale, rl.base_shape - 1.0, qk))


def _solve_ddf(ddf: Callable[[float], float], q: float, scale: float) -> float:
    if q == 0:
        return 0.0
    target = 1.0 - q
    if ddf(0.0) <= target:
        # only possible through truncation of the mixing law
        return 0.0
    hi = scale
    for _ in range(2000):
        if ddf(hi) < target:
            break
        hi *= 2.0
    else:
        raise RootNotBracketed(f"d.d.f. never fell below {target}")
    root, info = optimize.brentq(lambda t: ddf(t) - target, 0.0, hi,
                                 xtol=ROOT_XTOL * scale, full_output=True)
    if not info.converged:
        raise NoConvergence(f"root search for level {q} did not converge")
    return float(root)


def var_minima(p: MrfPortfolio, subset: Iterable[int], q: float,
               tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    _check_level(q)
    rl = minima_law(p, subset, tail_tol)
    return _solve_ddf(rl.ddf, q, rl.scale)


def cte_minima(p: MrfPortfolio, subset: Iterable[int], q: float,
               tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``E[X_{S-} | X_{S-} > VaR_q]`` through the tilted mixing law."""
    _check_level(q)
    rl = minima_law(p, subset, tail_tol)
    tilt = tilted_mixing(rl)
    t = _solve_ddf(rl.ddf, q, rl.scale)
    return rl.mean() * tilt.law.ddf(t) / (1.0 - q) + t


def var_maxima(p: MrfPortfolio, q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    _check_level(q)
    _check_size(p)
    return _solve_ddf(lambda t: last_default_ddf(p, t, tail_tol), q, max(p.sigma))


def cte_maxima(p: MrfPortfolio, q: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``E[X_+ | X_+ > VaR_q]`` by inclusion-exclusion of per-subset tail moments."""
    _check_level(q)
    _check_size(p)
    subsets = list(nonempty_subsets(p.n))
    laws = [minima_law(p, s, tail_tol) for s in subsets]
    if any(rl.base_shape <= 1 for rl in laws):
        raise InfiniteMean("some first-default time has an infinite mean")
    t = var_maxima(p, q, tail_tol)

    def term(idx):
        sign = 1.0 if len(subsets[idx]) % 2 else -1.0
        return sign * laws[idx].tail_moment(t)

    workers = min(_worker_count(), len(subsets))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            terms = list(pool.map(term, range(len(subsets))))
    else:
        terms = [term(idx) for idx in range(len(subsets))]
    return math.fsum(terms) / (1.0 - q)


def _ordered_pair(p: MrfPortfolio, i: int, k: int):
    if i == k:
        raise ValidationError("solvency bonus needs two distinct components")
    _subset(p, (i, k))
    agg = aggregate_powers(p, (i, k))
    xi_i = agg.xi_c[0] if i < k else agg.xi_c[1]
    return xi_i, agg.alpha_common, agg.gamma_common


def solvency_bonus(p: MrfPortfolio, i: int, k: int, y: float,
                   rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``E[X_i | X_k > y] - E[X_i]`` in closed form.

    With ``w = y/σ_k``, ``ξ̄`` the power of factors hitting ``i`` alone,
    ``γ``/``α`` the shared conditional/comonotone powers and ``c = ξ̄ + γ``,
    the conditional mean splits at ``x = σ_i w`` into pieces that are
    Gauss functions of ``w/(1+w)`` and ``w/(1+2w)``.  When ``c <= 1`` the
    first two pieces diverge separately and their finite difference is
    integrated numerically.
    """
    if y < 0:
        raise ValidationError("threshold y must be non-negative")
    xi_i, alpha, gamma = _ordered_pair(p, i, k)
    if xi_i <= 1:
        raise InfiniteMean(f"component {i} has power {xi_i} <= 1")
    if y == 0:
        return 0.0
    w = y / p.sigma[k]
    bar = xi_i - alpha - gamma
    c = bar + gamma
    lead = (1 + w) ** (1 - bar + gamma) * (1 + 2 * w) ** -gamma
    z1 = w / (1 + w)
    z2 = w / (1 + 2 * w)
    try:
        if c > 1:
            a_part = hyp2f1(gamma, 1.0, c, z1, rel_tol) / (c - 1)
            b_part = lead * hyp2f1(gamma, 1.0, c, z2, rel_tol) / (c - 1)
            near = a_part - b_part
        else:
            near = _near_piece(bar, gamma, w)
        far = lead * hyp2f1(gamma, 1.0, xi_i, z2, rel_tol) / (xi_i - 1)
    except NoConvergence:
        return solvency_bonus_quad(p, i, k, y)
    return p.sigma[i] * (near + far - 1.0 / (xi_i - 1))


def _near_piece(bar: float, gamma: float, w: float) -> float:
    f = lambda u: (1 + u) ** -bar * (1 + u / (1 + w)) ** -gamma
    val, _ = integrate.quad(f, 0.0, w, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def solvency_bonus_quad(p: MrfPortfolio, i: int, k: int, y: float) -> float:
    """Quadrature of ``P[X_i > x | X_k > y] - P[X_i > x]`` over ``x``."""
    if y < 0:
        raise ValidationError("threshold y must be non-negative")
    xi_i, _, _ = _ordered_pair(p, i, k)
    if xi_i <= 1:
        raise InfiniteMean(f"component {i} has power {xi_i} <= 1")
    fk = marginal(p, k).ddf(y)
    fi = marginal(p, i)

    def f(x):
        return float(bivariate_ddf(p, i, k, x, y)) / fk - fi.ddf(x)

    split = p.sigma[i] * y / p.sigma[k]
    opts = dict(epsabs=1e-13 * p.sigma[i], epsrel=1e-11, limit=400)
    left = integrate.quad(f, 0.0, split, **opts)[0] if split > 0 else 0.0
    right = integrate.quad(f, split, np.inf, **opts)[0]
    return left + right


def risk_measure(p: MrfPortfolio, query: RiskQuery, measure: str = "cte") -> float:
    """Dispatch a :class:`RiskQuery` to the matching VaR/CTE routine."""
    q = query.level
    if query.kind == "marginal":
        fn = cte_marginal if measure == "cte" else var_marginal
        return fn(p, query.components[0], q)
    if query.kind == "minima":
        subset = query.components or tuple(range(p.n))
        fn = cte_minima if measure == "cte" else var_minima
        return fn(p, subset, q)
    fn = cte_maxima if measure == "cte" else var_maxima
    return fn(p, q)


__all__ = [
    "RiskQuery",
    "TiltedMixing",
    "cte_marginal",
    "cte_marginal_weighted",
    "cte_maxima",
    "cte_minima",
    "risk_measure",
    "solvency_bonus",
    "solvency_bonus_quad",
    "tilted_mixing",
    "var_marginal",
    "var_maxima",
    "var_minima",
]
