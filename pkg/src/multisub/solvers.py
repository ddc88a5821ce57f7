"""Single-objective cardinality-constrained greedy solvers.

All solvers break ties toward the lowest element id (gains within ``TOL`` of
the best count as ties) and return exactly ``k`` elements, padding with the
lowest unused ids once every marginal is zero.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import TOL, ElementSet, ValueOracle

VARIANTS = ("standard_greedy", "lazy_greedy", "threshold_greedy")


@dataclass
class SolverConfig:
    variant: str = "standard_greedy"
    k: int | None = None
    delta_prime: float = 0.1
    rng_seed: int = 0  # unused by the deterministic variants

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown solver variant {self.variant!r}")
        if not 0 < self.delta_prime < 1:
            raise ValueError("delta_prime must lie in (0, 1)")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def alpha(self) -> float:
        """Approximation guarantee of the configured variant."""
        a = 1 - 1 / math.e
        return a - self.delta_prime if self.variant == "threshold_greedy" else a


def _available(f: ValueOracle, k: int, exclude) -> np.ndarray:
    free = np.ones(f.n, dtype=bool)
    if exclude is not None:
        free[list(exclude)] = False
    if k < 0 or k > free.sum():
        raise ValueError(f"cardinality k={k} must lie in [0, {int(free.sum())}] (n={f.n})")
    return free


def standard_greedy(f: ValueOracle, k: int, exclude=None) -> ElementSet:
    """Classic greedy: each step adds the element of largest marginal gain.

    ``exclude`` removes elements from consideration (also from padding).
    """
    unused = _available(f, k, exclude)
    chosen: list[int] = []
    for _ in range(k):
        cand = np.flatnonzero(unused)
        gains = f.marginals(chosen, cand)
        best = gains.max()
        e = int(cand[np.flatnonzero(gains >= best - TOL)[0]])
        chosen.append(e)
        unused[e] = False
    return ElementSet(chosen, n=f.n)


def lazy_greedy(f: ValueOracle, k: int, exclude=None) -> ElementSet:
    """Accelerated greedy with stale upper bounds kept in a heap.

    Produces the same set as :func:`standard_greedy`: once the heap top is
    fresh, every entry whose bound is within ``TOL`` of it is refreshed so the
    lowest-id tie wins.
    """
    free = np.flatnonzero(_available(f, k, exclude))
    chosen: list[int] = []
    if k == 0:
        return ElementSet(chosen, n=f.n)
    gains = f.marginals(chosen, free)
    heap = [(-float(g), int(e)) for e, g in zip(free, gains)]
    heapq.heapify(heap)
    stamp = [0] * f.n  # |chosen| at which the bound was computed

    while len(chosen) < k:
        step = len(chosen)
        while stamp[heap[0][1]] != step:
            _, e = heapq.heappop(heap)
            heapq.heappush(heap, (-f.marginal(e, chosen), e))
            stamp[e] = step
        top = -heap[0][0]
        ties = []
        stale = []
        while heap and -heap[0][0] >= top - TOL:
            neg, e = heapq.heappop(heap)
            g = -neg
            if stamp[e] != step:
                g = f.marginal(e, chosen)
                stamp[e] = step
            (ties if g >= top - TOL else stale).append((g, e))
        for g, e in stale:
            heapq.heappush(heap, (-g, e))
        ties.sort(key=lambda t: t[1])
        pick = ties[0][1]
        for g, e in ties[1:]:
            heapq.heappush(heap, (-g, e))
        chosen.append(pick)
    return ElementSet(chosen, n=f.n)


def threshold_greedy(f: ValueOracle, k: int, delta_prime: float = 0.1, exclude=None) -> ElementSet:
    """Decreasing-threshold greedy.

    Thresholds start at the best singleton value ``d`` and shrink by a factor
    ``1 - delta_prime`` per pass; passes stop below ``delta_prime * d / n``.
    Any element whose current marginal clears the threshold is taken.
    Marginals only shrink as the set grows, so a stored gain below the
    threshold rules an element out without a fresh query.
    """
    taken = ~_available(f, k, exclude)
    if not 0 < delta_prime < 1:
        raise ValueError("delta_prime must lie in (0, 1)")
    chosen: list[int] = []
    if k > 0:
        free = np.flatnonzero(~taken)
        gains = np.full(f.n, -np.inf)
        gains[free] = f.marginals(chosen, free)
        stamp = np.zeros(f.n, dtype=np.int64)  # len(chosen) when gains[e] was computed
        d = float(gains.max())
        w = d
        floor = delta_prime * d / f.n
        while d > 0 and w >= floor and len(chosen) < k:
            for e in np.flatnonzero(~taken & (gains >= w - TOL)).tolist():
                if stamp[e] != len(chosen):
                    gains[e] = f.marginal(e, chosen)
                    stamp[e] = len(chosen)
                if gains[e] >= w - TOL:
                    chosen.append(e)
                    taken[e] = True
                    if len(chosen) == k:
                        break
            w *= 1 - delta_prime
    for e in np.flatnonzero(~taken)[: k - len(chosen)]:
        chosen.append(int(e))
    return ElementSet(chosen, n=f.n)


def solve(f: ValueOracle, k: int, config: SolverConfig | None = None, exclude=None) -> ElementSet:
    """Dispatch to the variant named in ``config``."""
    config = config or SolverConfig()
    if config.variant == "standard_greedy":
        return standard_greedy(f, k, exclude)
    if config.variant == "lazy_greedy":
        return lazy_greedy(f, k, exclude)
    return threshold_greedy(f, k, config.delta_prime, exclude)
