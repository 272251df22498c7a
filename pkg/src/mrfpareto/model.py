"""Multiple risk factor portfolios: exposure bookkeeping, joint law, sampling.

A portfolio has ``n`` components (obligors) and ``l + m`` risk factors.
The first ``l`` exposure columns are comonotone factors: every component a
comonotone factor hits sees the *same* exponential hitting time.  The last
``m`` columns are conditionally independent factors: each hit component
gets its own exponential copy, sharing only the gamma-distributed rate.
Factor rates are ``Λ_j ~ Ga(ξ_j, 1)`` (unit rate), and component ``i``
defaults at ``σ_i`` times the earliest hitting time among its factors.

Component indices are 0-based in the Python API and 1-based in the JSON
format.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptySubset, ValidationError

SAMPLE_BLOCK = 1 << 16


@dataclass(frozen=True)
class ExposureMatrix:
    """Binary ``n x (l + m)`` exposure matrix, comonotone block first."""

    entries: tuple[tuple[int, ...], ...]
    l: int

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        if not rows or not rows[0]:
            raise ValidationError("exposure matrix must be non-empty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValidationError("exposure matrix rows have unequal length")
        if not 0 <= self.l <= width:
            raise ValidationError(f"comonotone block size {self.l} outside [0, {width}]")
        if any(v not in (0, 1) for r in rows for v in r):
            raise ValidationError("exposure entries must be 0 or 1")
        for i, r in enumerate(rows):
            if not any(r):
                raise ValidationError(f"component {i + 1} is hit by no risk factor")
        for j in range(width):
            if not any(r[j] for r in rows):
                raise ValidationError(f"risk factor {j + 1} hits no component")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def m(self) -> int:
        return len(self.entries[0]) - self.l

    @property
    def d(self) -> int:
        return len(self.entries[0])

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=bool)

    def hit_components(self, j: int) -> tuple[int, ...]:
        """``RC_j``: components hit by factor ``j``."""
        return tuple(i for i in range(self.n) if self.entries[i][j])

    def factors_of(self, i: int) -> tuple[int, ...]:
        """``RF_i``: factors hitting component ``i``."""
        return tuple(j for j in range(self.d) if self.entries[i][j])

    def is_comonotone(self, j: int) -> bool:
        return j < self.l


@dataclass(frozen=True)
class MrfPortfolio:
    sigma: tuple[float, ...]
    xi: tuple[float, ...]
    exposure: ExposureMatrix

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(float(s) for s in self.sigma))
        object.__setattr__(self, "xi", tuple(float(x) for x in self.xi))
        if len(self.sigma) != self.exposure.n:
            raise DimensionMismatch(
                f"{len(self.sigma)} scales for {self.exposure.n} components"
            )
        if len(self.xi) != self.exposure.d:
            raise DimensionMismatch(f"{len(self.xi)} powers for {self.exposure.d} factors")
        if not all(s > 0 and math.isfinite(s) for s in self.sigma):
            raise ValidationError("scale parameters must be positive and finite")
        if not all(x > 0 and math.isfinite(x) for x in self.xi):
            raise ValidationError("power parameters must be positive and finite")

    @classmethod
    def from_factors(cls, sigma: Sequence[float],
                     comonotone: Iterable[tuple[float, Iterable[int]]] = (),
                     conditional: Iterable[tuple[float, Iterable[int]]] = ()):
        """Build from ``(power, components)`` pairs with 0-based components."""
        n = len(sigma)
        cols, powers = [], []
        como = list(comonotone)
        for power, comps in como + list(conditional):
            col = [0] * n
            for i in comps:
                if not 0 <= i < n:
                    raise ValidationError(f"component index {i} out of range")
                col[i] = 1
            cols.append(col)
            powers.append(power)
        if not cols:
            raise ValidationError("portfolio needs at least one risk factor")
        entries = tuple(tuple(col[i] for col in cols) for i in range(n))
        return cls(tuple(sigma), tuple(powers), ExposureMatrix(entries, len(como)))

    @property
    def n(self) -> int:
        return self.exposure.n

    @property
    def l(self) -> int:
        return self.exposure.l

    @property
    def m(self) -> int:
        return self.exposure.m

    @property
    def alpha(self) -> tuple[float, ...]:
        return self.xi[: self.l]

    @property
    def gamma(self) -> tuple[float, ...]:
        return self.xi[self.l:]

    def scaled(self, factor: float) -> "MrfPortfolio":
        return MrfPortfolio(tuple(factor * s for s in self.sigma), self.xi, self.exposure)

    def to_dict(self) -> dict:
        ex = self.exposure

        def factor(j):
            return {"power": self.xi[j], "components": [i + 1 for i in ex.hit_components(j)]}

        return {
            "sigma": list(self.sigma),
            "comonotone_factors": [factor(j) for j in range(ex.l)],
            "conditional_factors": [factor(j) for j in range(ex.l, ex.d)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MrfPortfolio":
        from .config import validate_portfolio

        validate_portfolio(data)
        n = len(data["sigma"])
        for key in ("comonotone_factors", "conditional_factors"):
            for j, f in enumerate(data.get(key, [])):
                bad = [c for c in f["components"] if c > n]
                if bad:
                    raise ValidationError(f"invalid portfolio at $.{key}[{j}].components: "
                                          f"index {bad[0]} exceeds the {n} components in sigma")

        def pairs(key):
            return [(f["power"], [c - 1 for c in f["components"]]) for f in data.get(key, [])]

        return cls.from_factors(data["sigma"], pairs("comonotone_factors"),
                                pairs("conditional_factors"))


def _subset(p: MrfPortfolio, subset: Iterable[int]) -> tuple[int, ...]:
    s = tuple(sorted(set(int(i) for i in subset)))
    if not s:
        raise EmptySubset("subset must contain at least one component")
    if s[0] < 0 or s[-1] >= p.n:
        raise ValidationError(f"subset {s} has indices outside 0..{p.n - 1}")
    return s


@dataclass(frozen=True)
class AggregatedPowers:
    """Power sums over the factor sets attached to a component subset.

    ``*_union`` sums over factors hitting at least one member, ``*_common``
    over factors hitting every member, and ``*_own[h]`` over factors
    hitting member ``h`` but not every member.  Per-member marginal sums
    are in ``xi_c``, ``alpha_c`` and ``gamma_c``.
    """

    subset: tuple[int, ...]
    xi_c: tuple[float, ...]
    alpha_c: tuple[float, ...]
    gamma_c: tuple[float, ...]
    xi_union: float
    alpha_union: float
    gamma_union: float
    xi_common: float
    alpha_common: float
    gamma_common: float
    xi_own: tuple[float, ...]

    @property
    def xi_not_common(self) -> float:
        return self.xi_union - self.xi_common


def aggregate_powers(p: MrfPortfolio, subset: Iterable[int]) -> AggregatedPowers:
    s = _subset(p, subset)
    ex = p.exposure
    c = ex.array()
    xi = np.array(p.xi)
    como = np.arange(ex.d) < ex.l
    rows = c[list(s)]
    union = rows.any(axis=0)
    common = rows.all(axis=0)

    def total(mask):
        return math.fsum(xi[mask])

    return AggregatedPowers(
        subset=s,
        xi_c=tuple(total(c[i]) for i in s),
        alpha_c=tuple(total(c[i] & como) for i in s),
        gamma_c=tuple(total(c[i] & ~como) for i in s),
        xi_union=total(union),
        alpha_union=total(union & como),
        gamma_union=total(union & ~como),
        xi_common=total(common),
        alpha_common=total(common & como),
        gamma_common=total(common & ~como),
        xi_own=tuple(total(c[i] & ~common) for i in s),
    )


def joint_ddf(p: MrfPortfolio, x):
    """``P[X_1 > x_1, ..., X_n > x_n]``; ``x`` may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (p.n,):
        raise DimensionMismatch(f"expected {p.n} coordinates, got shape {x.shape}")
    if np.any(x < 0):
        raise ValidationError("d.d.f. arguments must be non-negative")
    u = x / np.array(p.sigma)
    c = p.exposure.array()
    l = p.l
    xi = np.array(p.xi)
    log_s = 0.0
    if l:
        peaks = np.max(np.where(c[:, :l], u[..., :, None], 0.0), axis=-2)
        log_s = log_s - np.log1p(peaks) @ xi[:l]
    if p.m:
        sums = u @ c[:, l:].astype(float)
        log_s = log_s - np.log1p(sums) @ xi[l:]
    out = np.exp(log_s)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Lomax:
    """``Pa(II)(scale, shape)`` with d.d.f. ``(1 + x/scale)**-shape``."""

    scale: float
    shape: float

    def ddf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-self.shape * np.log1p(x / self.scale))
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        return 1.0 - self.ddf(x)

    @property
    def mean(self) -> float:
        return self.scale / (self.shape - 1) if self.shape > 1 else math.inf

    @property
    def variance(self) -> float:
        a = self.shape
        if a <= 2:
            return math.inf
        return self.scale ** 2 * a / ((a - 1) ** 2 * (a - 2))


def marginal(p: MrfPortfolio, i: int) -> Lomax:
    s = _subset(p, [i])
    return Lomax(p.sigma[i], aggregate_powers(p, s).xi_c[0])


@dataclass(frozen=True, eq=False)
class SampleBatch:
    draws: np.ndarray = field(repr=False)
    seed: int
    count: int

    def to_csv(self, target) -> None:
        """Write ``rep,x1..xn`` rows; ``target`` is a path or a text stream."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        n = self.draws.shape[1]
        fh.write("rep," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for r, row in enumerate(self.draws, start=1):
            fh.write(f"{r}," + ",".join(repr(float(v)) for v in row) + "\n")


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("MRF_THREADS", "1")))
    except ValueError:
        return 1


def _latent_block(p: MrfPortfolio, rows: int, rng: np.random.Generator) -> np.ndarray:
    ex = p.exposure
    l = ex.l
    lam = rng.gamma(np.array(p.xi), 1.0, size=(rows, ex.d))
    # one column per comonotone factor, then one per hit (component, factor) pair
    pairs = [(i, j) for j in range(l, ex.d) for i in ex.hit_components(j)]
    times = np.empty((rows, l + len(pairs)))
    if l:
        times[:, :l] = rng.standard_exponential((rows, l)) / lam[:, :l]
    if pairs:
        cols = np.array([j for _, j in pairs])
        times[:, l:] = rng.standard_exponential((rows, len(pairs))) / lam[:, cols]
    out = np.empty((rows, ex.n))
    for i in range(ex.n):
        sel = [j for j in ex.factors_of(i) if j < l]
        sel += [l + idx for idx, (c, _) in enumerate(pairs) if c == i]
        out[:, i] = times[:, sel].min(axis=1)
    return out


def sample_latent(p: MrfPortfolio, count: int, seed: int) -> np.ndarray:
    """Unscaled default times ``X_i / σ_i`` (rows = replications).

    Ties between columns arise only through a shared comonotone draw, so
    they are exact floating-point equalities.  Replications are split into
    fixed-size blocks, each with its own counter-based Philox stream
    spawned from ``seed``; the result does not depend on ``MRF_THREADS``.
    """
    if count < 1:
        raise ValidationError("sample count must be at least 1")
    blocks = [(b, min(SAMPLE_BLOCK, count - b)) for b in range(0, count, SAMPLE_BLOCK)]
    streams = np.random.SeedSequence(seed).spawn(len(blocks))
    out = np.empty((count, p.n))

    def run(idx):
        start, rows = blocks[idx]
        rng = np.random.Generator(np.random.Philox(streams[idx]))
        out[start:start + rows] = _latent_block(p, rows, rng)

    workers = min(_worker_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, range(len(blocks))))
    else:
        for idx in range(len(blocks)):
            run(idx)
    return out


def sample(p: MrfPortfolio, count: int, seed: int) -> SampleBatch:
    draws = sample_latent(p, count, seed) * np.array(p.sigma)
    return SampleBatch(draws, seed, count)


__all__ = [
    "AggregatedPowers",
    "ExposureMatrix",
    "Lomax",
    "MrfPortfolio",
    "SampleBatch",
    "aggregate_powers",
    "joint_ddf",
    "marginal",
    "sample",
    "sample_latent",
]
