"""Generalized hypergeometric series for real parameters.

Only the regions needed by the moment and risk formulas are supported:
``|z| < 1`` and the unit circle points ``z = +1`` / ``z = -1`` under the
usual convergence margin ``d = sum(lower) - sum(upper)``.  Terms are built
with the term-ratio recurrence so raw Pochhammer products never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .errors import DivergentSeries, NoConvergence, ValidationError

DEFAULT_REL_TOL = 1e-10
MAX_TERMS = 1_000_000
# consecutive terms that must satisfy the stopping rule
STOP_STREAK = 3


@dataclass(frozen=True)
class HyperParams:
    upper: tuple[float, ...]
    lower: tuple[float, ...]
    argument: float

    def __post_init__(self):
        object.__setattr__(self, "upper", tuple(float(a) for a in self.upper))
        object.__setattr__(self, "lower", tuple(float(b) for b in self.lower))
        object.__setattr__(self, "argument", float(self.argument))
        if len(self.upper) != len(self.lower) + 1:
            raise ValidationError(
                f"need exactly one more upper than lower parameter, got "
                f"{len(self.upper)} and {len(self.lower)}"
            )
        for b in self.lower:
            if b <= 0 and b == math.floor(b):
                raise ValidationError(f"lower parameter {b} is a pole of the series")

    @property
    def margin(self) -> float:
        return sum(self.lower) - sum(self.upper)

    @property
    def terminating(self) -> bool:
        """True when some upper parameter is a non-positive integer."""
        return any(a <= 0 and a == math.floor(a) for a in self.upper)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def pochhammer_ratio_step(prev_term: float, params: HyperParams, k: int) -> float:
    """Return term ``k + 1`` of the series given term ``k``."""
    num = 1.0
    for a in params.upper:
        num *= a + k
    den = 1.0
    for b in params.lower:
        den *= b + k
    return prev_term * params.argument * num / den / (k + 1)


def _check_convergence(params: HyperParams) -> None:
    z = params.argument
    if params.terminating or abs(z) < 1:
        return
    d = params.margin
    if abs(z) > 1:
        raise DivergentSeries(f"|z| = {abs(z)} lies outside the unit disk")
    if z == 1 and d <= 0:
        raise DivergentSeries(f"z = 1 requires margin d > 0, got d = {d}")
    if d <= -1:
        raise DivergentSeries(f"|z| = 1 requires margin d > -1, got d = {d}")


def _tail_estimates(terms, next_ratios, z, margin, index):
    """Estimated truncation error after each partial sum in a chunk."""
    t = np.abs(terms)
    r = np.abs(next_ratios)
    est = np.full_like(t, np.inf)
    if z < 0:
        # alternating: first omitted term, valid once magnitudes decrease
        dec = r < 1
        est[dec] = t[dec] * r[dec]
    if abs(z) < 1:
        rho = np.maximum(r, abs(z))
        geo = np.where(rho < 1, t * rho / np.where(rho < 1, 1 - rho, 1.0), np.inf)
        est = np.minimum(est, geo)
    est[t == 0] = 0.0
    return est


def _unit_tail_shift(params: HyperParams) -> float:
    # With log r_k = -(1+d)/k + e/k^2 + ..., the tail from index k is
    # t_k (k + shift) / d up to O(t_k / k).
    d = params.margin
    e = (sum(b * b for b in params.lower) - sum(a * a for a in params.upper) + 1) / 2
    return (e + (1 + d) ** 2 / 2) / (1 + d) - 1


def hyp_pfq(params: HyperParams, rel_tol: float = DEFAULT_REL_TOL,
            max_terms: int = MAX_TERMS) -> SeriesResult:
    """Sum ``q+1Fq(upper; lower; z)`` to relative accuracy ``rel_tol``.

    Summation stops once the estimated tail is below ``rel_tol * |sum|``
    for three consecutive terms.  The tail estimate is the first omitted
    term for alternating series and a ratio-test geometric majorant inside
    the unit disk.  At ``z = 1`` the terms decay only algebraically, so the
    partial sum carries a telescoping tail correction ``t_k (k + s) / d``
    and the reported error is the change of the corrected sum between two
    successive chunk ends.

    Raises
    ------
    DivergentSeries
        The convergence margin is violated.
    NoConvergence
        ``max_terms`` terms were summed without meeting ``rel_tol``.
    """
    if rel_tol <= 0:
        raise ValidationError("rel_tol must be positive")
    _check_convergence(params)
    z = params.argument
    a = np.asarray(params.upper)[:, None]
    b = np.asarray(params.lower)[:, None]
    if z == 0 or any(x == 0 for x in params.upper):
        return SeriesResult(1.0, 1, 0.0)
    margin = params.margin
    unit = z == 1 and not params.terminating
    shift = _unit_tail_shift(params) if unit else 0.0

    total = 1.0
    term = 1.0
    k = 0
    streak = 0
    chunk = 32
    corrected_prev = None
    while k < max_terms:
        ks = np.arange(k, k + chunk + 1, dtype=float)
        ratios = z * np.prod(a + ks, axis=0) / np.prod(b + ks, axis=0) / (ks + 1)
        # terms[j] is term k+1+j; ratios[j+1] maps it to the next one
        terms = term * np.cumprod(ratios[:-1])
        partial = total + np.cumsum(terms)
        if not np.all(np.isfinite(partial)):
            raise NoConvergence(f"series overflowed after {k} terms")
        index = ks[1:]
        if unit:
            last = float(index[-1])
            t_next = float(terms[-1] * ratios[-1])
            corrected = float(partial[-1]) + t_next * (last + 1 + shift) / margin
            if t_next == 0:
                return SeriesResult(float(partial[-1]), int(last) + 1, 0.0)
            if corrected_prev is not None:
                err = abs(corrected - corrected_prev)
                if err <= rel_tol * abs(corrected):
                    streak += 1
                    if streak >= 2:
                        return SeriesResult(corrected, int(last) + 1, err)
                else:
                    streak = 0
            corrected_prev = corrected
        else:
            est = _tail_estimates(terms, ratios[1:], z, margin, index)
            ok = est <= rel_tol * np.abs(partial)
            run = streak
            for j, flag in enumerate(ok):
                run = run + 1 if flag else 0
                if run >= STOP_STREAK:
                    return SeriesResult(float(partial[j]), int(index[j]) + 1,
                                        float(est[j]))
            streak = run
        term = float(terms[-1])
        total = float(partial[-1])
        k += chunk
        chunk = min(2 * chunk, 65536)
    raise NoConvergence(
        f"series did not reach rel_tol={rel_tol} within {max_terms} terms"
    )


def hyp2f1(a: float, b: float, c: float, z: float,
           rel_tol: float = DEFAULT_REL_TOL) -> float:
    return hyp_pfq(HyperParams((a, b), (c,), z), rel_tol).value


def hyp3f2(a1: float, a2: float, a3: float, b1: float, b2: float, z: float,
           rel_tol: float = DEFAULT_REL_TOL) -> float:
    return hyp_pfq(HyperParams((a1, a2, a3), (b1, b2), z), rel_tol).value


def _h_transformed(x: float, a: float, b: float, rel_tol: float) -> float:
    # h = (x-1) * int_0^1 t^(x-2) 2F1(1, a; c; -t) dt with c = b - 1.  A Pfaff
    # transformation turns the inner function into a series in t/(1+t) <= 1/2:
    #   h = (x-1) * sum_n (c-a)_n/(c)_n * J_n,
    #   J_n = int_0^1 t^(x-2+n) (1+t)^(-1-n) dt,
    # and J_n obeys (n+1) J_{n+1} = (x-1+n) J_n - 2^-(n+1), run backwards for
    # stability.
    c = b - 1.0
    n_terms = 64
    while True:
        top = n_terms + 60
        J = np.zeros(top + 1)
        for n in range(top - 1, -1, -1):
            J[n] = ((n + 1) * J[n + 1] + 0.5 ** (n + 1)) / (x - 1.0 + n)
        coef = 1.0
        total = 0.0
        last = np.inf
        for n in range(n_terms):
            term = coef * J[n]
            total += term
            last = abs(term)
            coef *= (c - a + n) / (c + n)
        if last <= rel_tol * abs(total) * 1e-2 or n_terms >= 4096:
            break
        n_terms *= 2
    if not math.isfinite(total) or last > rel_tol * abs(total):
        raise NoConvergence(f"transformed h({x}; {a}, {b}) did not converge")
    return (x - 1.0) * total


def h_fun(x: float, a: float, b: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``3F2(x-1, 1, a; x, b-1; -1)``, the helper in the product-moment formula.

    The alternating series is summed directly when it converges within the
    term budget.  Near or past the boundary of convergence
    (``b - 1 - a <= 0``) the analytic continuation is evaluated through an
    exactly transformed series in powers of 1/2, which is also what the
    underlying moment integral equals.
    """
    if not x > 1:
        raise ValidationError(f"h requires x > 1, got {x}")
    if not b > 2:
        raise ValidationError(f"h requires b > 2, got {b}")
    if a == 0:
        return 1.0
    try:
        return hyp_pfq(HyperParams((x - 1.0, 1.0, a), (x, b - 1.0), -1.0), rel_tol).value
    except (DivergentSeries, NoConvergence):
        return _h_transformed(x, a, b, rel_tol)


def pochhammer(p: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= p + i
    return out


def direct_term(params: HyperParams, k: int) -> float:
    """Term ``k`` from explicit Pochhammer products (for cross-checking)."""
    num = 1.0
    for a in params.upper:
        num *= pochhammer(a, k)
    den = 1.0
    for b in params.lower:
        den *= pochhammer(b, k)
    return num / den * params.argument ** k / math.factorial(k)


def partial_sums(params: HyperParams, count: int) -> np.ndarray:
    """The first ``count`` partial sums, built with the ratio recurrence."""
    out = np.empty(count)
    term = 1.0
    total = 0.0
    for k in range(count):
        total += term
        out[k] = total
        term = pochhammer_ratio_step(term, params, k)
    return out


__all__ = [
    "DEFAULT_REL_TOL",
    "HyperParams",
    "SeriesResult",
    "direct_term",
    "h_fun",
    "hyp2f1",
    "hyp3f2",
    "hyp_pfq",
    "partial_sums",
    "pochhammer",
    "pochhammer_ratio_step",
]
