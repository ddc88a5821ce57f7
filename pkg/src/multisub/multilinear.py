"""Monte-Carlo multilinear extension and swap rounding over the cardinality polytope."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import TOL, ElementSet, ValueOracle

# samples per independent random stream; results do not depend on how blocks are scheduled
BLOCK = 4096


@dataclass
class FractionalPoint:
    coords: np.ndarray
    l1: float = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1:
            raise ValueError("coords must be a vector")
        if np.any(c < -TOL) or np.any(c > 1 + TOL):
            raise ValueError("coordinates must lie in [0, 1]")
        self.coords = np.clip(c, 0.0, 1.0)
        self.l1 = float(self.coords.sum())

    @property
    def n(self) -> int:
        return len(self.coords)

    @classmethod
    def from_set(cls, S, n: int) -> "FractionalPoint":
        x = np.zeros(n)
        x[list(S)] = 1.0
        return cls(x)

    def scaled(self, theta: float) -> "FractionalPoint":
        return FractionalPoint(theta * self.coords)

    def join(self, other: "FractionalPoint") -> "FractionalPoint":
        return FractionalPoint(np.maximum(self.coords, other.coords))


@dataclass
class ConvexCombination:
    bases: list
    weights: np.ndarray

    def __post_init__(self):
        self.bases = [b if isinstance(b, ElementSet) else ElementSet(b) for b in self.bases]
        w = np.asarray(self.weights, dtype=float)
        if not self.bases:
            raise ValueError("need at least one base")
        if len(w) != len(self.bases):
            raise ValueError("need one weight per base")
        if np.any(w <= 0) or abs(w.sum() - 1) > TOL:
            raise ValueError("weights must be positive and sum to 1")
        if len({len(b) for b in self.bases}) != 1:
            raise ValueError("all bases must have the same size")
        self.weights = w

    @classmethod
    def uniform(cls, bases: Sequence) -> "ConvexCombination":
        return cls(list(bases), np.full(len(bases), 1.0 / len(bases)))

    def point(self, n: int) -> FractionalPoint:
        x = np.zeros(n)
        for w, b in zip(self.weights, self.bases):
            x[list(b)] += w
        return FractionalPoint(np.minimum(x, 1.0))


@dataclass
class EstimatorConfig:
    samples: int = 10_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


class Estimate(NamedTuple):
    value: float
    stderr: float


def _uniform_blocks(seed: int, samples: int, n: int):
    """Yield uniform draws in fixed-size blocks, each from its own spawned stream."""
    for b, lo in enumerate(range(0, samples, BLOCK)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        yield rng.random((min(BLOCK, samples - lo), n))


def _mean_stderr(values: np.ndarray) -> Estimate:
    s = len(values)
    if s < 2:
        return Estimate(float(values.mean()), 0.0)
    return Estimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(s)))


def estimate_multilinear(f: ValueOracle, x: FractionalPoint, cfg: EstimatorConfig | None = None) -> Estimate:
    """Sample mean of ``f`` on random sets that include element ``i`` w.p. ``x_i``."""
    cfg = cfg or EstimatorConfig()
    vals = [f.eval_many(u < x.coords) for u in _uniform_blocks(cfg.rng_seed, cfg.samples, x.n)]
    return _mean_stderr(np.concatenate(vals))


def estimate_multilinear_gain(
    f: ValueOracle, x: FractionalPoint, y: FractionalPoint, cfg: EstimatorConfig | None = None
) -> Estimate:
    """Coupled estimate of ``F(x v y) - F(y)``: both sets come from the same uniforms."""
    cfg = cfg or EstimatorConfig()
    top = np.maximum(x.coords, y.coords)
    diffs = []
    for u in _uniform_blocks(cfg.rng_seed, cfg.samples, x.n):
        diffs.append(f.eval_many(u < top) - f.eval_many(u < y.coords))
    return _mean_stderr(np.concatenate(diffs))


def exact_multilinear(f: ValueOracle, x: FractionalPoint) -> float:
    """Multilinear extension by enumerating all 2^n sets; for n <= 16 only."""
    n = x.n
    if n > 16:
        raise ValueError("exact enumeration limited to n <= 16")
    masks = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(bool)
    p = np.where(masks, x.coords, 1 - x.coords).prod(axis=1)
    return float(p @ f.eval_many(masks))


def swap_round(comb: ConvexCombination, rng_seed=0) -> ElementSet:
    """Merge equal-size bases pairwise into one random base.

    Bases are merged in index order. While the running base C (weight w)
    differs from the next base B (weight theta), take the lowest-id
    ``i`` in C - B and ``j`` in B - C; with probability ``w / (w + theta)``
    B swaps j for i, otherwise C swaps i for j. Each element ends up in the
    output with probability equal to its coordinate in the combination.
    """
    rng = np.random.default_rng(rng_seed)
    current = set(comb.bases[0])
    w = float(comb.weights[0])
    for base, theta in zip(comb.bases[1:], comb.weights[1:]):
        other = set(base)
        only_c = sorted(current - other)
        only_b = sorted(other - current)
        # C - B and B - C shrink by one each swap, in lockstep
        for i, j in zip(only_c, only_b):
            if rng.random() < w / (w + theta):
                other.discard(j)
                other.add(i)
            else:
                current.discard(i)
                current.add(j)
        w += theta
    return ElementSet(sorted(current), n=comb.bases[0].n)


def concavity_check(
    f: ValueOracle, x: FractionalPoint, theta: float, cfg: EstimatorConfig | None = None
) -> bool:
    """Test ``F(theta x) >= theta F(x)`` up to three combined standard errors."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    cfg = cfg or EstimatorConfig()
    if theta == 1:
        return True
    small = estimate_multilinear(f, x.scaled(theta), cfg)
    full = estimate_multilinear(f, x, EstimatorConfig(cfg.samples, cfg.rng_seed + 1))
    se = np.hypot(small.stderr, theta * full.stderr)
    return small.value >= theta * full.value - 3 * se - TOL
