"""Sums of independent gamma variables as gammas with a random integer shape.

A sum of independent ``Ga(shape_i, rate_i)`` variables has the law of
``Ga(shape_total + K, max_rate)`` where ``K`` is a non-negative integer
variable whose p.m.f. follows from the Moschopoulos recursion.  An
exponential whose rate is such a sum is a Lomax variable with power
parameter ``shape_total + K``, the "randomized Lomax" law used for
first-default times.

Rates follow the density convention ``f(x) ∝ exp(-rate * x) x**(shape - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InfiniteMean, TruncationBudgetExceeded, ValidationError

DEFAULT_TAIL_TOL = 1e-10
MAX_K = 100_000


@dataclass(frozen=True)
class GammaComponent:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValidationError(
                f"gamma component needs positive shape and rate, got "
                f"({self.shape}, {self.rate})"
            )


@dataclass(frozen=True, eq=False)
class GammaConvolution:
    """Mixture representation of a finite gamma convolution.

    ``pmf[k] = c_plus * delta[k]`` is the probability that the random shape
    offset equals ``k``; the arrays are truncated once the accumulated mass
    reaches ``1 - tail_tol``.
    """

    components: tuple[GammaComponent, ...]
    sigma_plus: float
    gamma_star: float
    c_plus: float
    delta: np.ndarray = field(repr=False)
    pmf: np.ndarray = field(repr=False)
    tail_tol: float = DEFAULT_TAIL_TOL

    @property
    def k_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def residual_mass(self) -> float:
        """Probability mass beyond ``k_max`` (at most ``tail_tol``)."""
        return max(0.0, 1.0 - math.fsum(self.pmf))

    def cdf(self, x):
        """C.d.f. of the convolution itself, as a gamma mixture."""
        from scipy.special import gammainc

        x = np.asarray(x, dtype=float)
        shapes = self.gamma_star + np.arange(len(self.pmf))
        vals = gammainc(shapes, self.sigma_plus * x[..., None])
        return vals @ self.pmf


def moschopoulos_pmf(components: Sequence[GammaComponent],
                     tail_tol: float = DEFAULT_TAIL_TOL,
                     k_cap: int = MAX_K,
                     reference_rate: float | None = None) -> GammaConvolution:
    """Build the random-shape representation of ``sum_i Ga(shape_i, rate_i)``.

    ``delta`` follows ``k delta_k = sum_{l<=k} rho_l delta_{k-l}`` with
    ``rho_l = sum_i shape_i (1 - rate_i / sigma_plus)**l`` and
    ``delta_0 = 1``.  ``reference_rate`` replaces the default
    ``sigma_plus = max(rate_i)`` by any larger value, which changes the
    representation but not the law.

    Raises
    ------
    TruncationBudgetExceeded
        The mass target ``1 - tail_tol`` was not reached within ``k_cap``
        terms; this happens when some rate is tiny relative to the largest.
    """
    comps = tuple(components)
    if not comps:
        raise ValidationError("need at least one gamma component")
    if not tail_tol > 0:
        raise ValidationError("tail_tol must be positive")
    shapes = np.array([c.shape for c in comps])
    rates = np.array([c.rate for c in comps])
    sigma_plus = float(rates.max())
    if reference_rate is not None:
        if reference_rate < sigma_plus:
            raise ValidationError("reference rate must be at least the largest rate")
        sigma_plus = float(reference_rate)
    gamma_star = float(shapes.sum())

    if np.all(rates == sigma_plus):
        one = np.ones(1)
        return GammaConvolution(comps, sigma_plus, gamma_star, 1.0, one, one.copy(), tail_tol)

    ratio = rates / sigma_plus
    c_plus = math.exp(float(np.sum(shapes * np.log(ratio))))
    theta = 1.0 - ratio
    active = theta > 0
    shapes_a = shapes[active]
    theta_a = theta[active]

    size = 256
    rho = np.zeros(size + 1)
    delta = np.zeros(size + 1)
    delta[0] = 1.0
    power = np.ones_like(theta_a)
    mass = c_plus
    k = 0
    while mass < 1.0 - tail_tol:
        k += 1
        if k > k_cap:
            raise TruncationBudgetExceeded(
                f"p.m.f. mass {mass:.12f} short of 1 - {tail_tol} after {k_cap} terms"
            )
        if k > size:
            size *= 2
            rho = np.resize(rho, size + 1)
            delta = np.resize(delta, size + 1)
            delta[k:] = 0.0
        power *= theta_a
        rho[k] = float(np.dot(shapes_a, power))
        delta[k] = float(np.dot(rho[1:k + 1], delta[k - 1::-1][:k])) / k
        if not math.isfinite(delta[k]):
            raise TruncationBudgetExceeded("delta recursion overflowed")
        mass += c_plus * delta[k]
    delta = delta[:k + 1].copy()
    pmf = c_plus * delta
    return GammaConvolution(comps, sigma_plus, gamma_star, c_plus, delta, pmf, tail_tol)


def rho_sequence(conv: GammaConvolution) -> np.ndarray:
    """``rho_l`` for ``l = 0..k_max`` (``rho_0`` is unused and set to 0)."""
    out = np.zeros(conv.k_max + 1)
    for c in conv.components:
        th = 1.0 - c.rate / conv.sigma_plus
        out[1:] += c.shape * th ** np.arange(1, conv.k_max + 1)
    return out


@dataclass(frozen=True, eq=False)
class RandomizedLomax:
    """Lomax law with scale ``scale`` and power ``base_shape + K``."""

    scale: float
    base_shape: float
    pmf: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError("scale must be positive")
        if not self.base_shape > 0:
            raise ValidationError("base shape must be positive")

    @classmethod
    def from_convolution(cls, conv: GammaConvolution) -> "RandomizedLomax":
        return cls(conv.sigma_plus, conv.gamma_star, conv.pmf)

    @property
    def shapes(self) -> np.ndarray:
        return self.base_shape + np.arange(len(self.pmf))

    def ddf(self, x):
        return randomized_lomax_ddf(self, x)

    def mean(self) -> float:
        return randomized_lomax_mean(self)

    def tail_moment(self, t: float) -> float:
        """``E[X 1{X > t}]``, summed atom by atom."""
        if self.base_shape <= 1:
            raise InfiniteMean(f"power parameter {self.base_shape} <= 1")
        s = self.scale
        shapes = self.shapes
        surv = np.exp(-shapes * math.log1p(t / s))
        return float(np.dot(self.pmf, surv * (t + (t + s) / (shapes - 1.0))))

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        k = rng.choice(len(self.pmf), size=size, p=self.pmf / self.pmf.sum())
        lam = rng.gamma(self.base_shape + k, 1.0 / self.scale)
        return rng.standard_exponential(size) / lam


def randomized_lomax_ddf(rl: RandomizedLomax, x):
    """``sum_k p_k (1 + x/scale)**-(base_shape + k)``; accepts arrays."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("d.d.f. argument must be non-negative")
    logs = np.log1p(x / rl.scale)[..., None]
    vals = np.exp(-logs * rl.shapes) @ rl.pmf
    return float(vals) if vals.ndim == 0 else vals


def randomized_lomax_mean(rl: RandomizedLomax) -> float:
    if rl.base_shape <= 1:
        raise InfiniteMean(f"power parameter {rl.base_shape} <= 1: mean is infinite")
    return float(rl.scale * np.dot(rl.pmf, 1.0 / (rl.shapes - 1.0)))


__all__ = [
    "DEFAULT_TAIL_TOL",
    "GammaComponent",
    "GammaConvolution",
    "RandomizedLomax",
    "moschopoulos_pmf",
    "randomized_lomax_ddf",
    "randomized_lomax_mean",
    "rho_sequence",
]
