"""Ground sets, element sets and monotone submodular value oracles.

Every oracle counts the logical queries made against it. ``eval`` costs one
query. ``marginal`` costs one query on oracles with a native incremental
marginal (coverage, modular and the wrappers built from them) and two
``eval`` calls otherwise. Batched ``marginals``/``eval_many`` cost one query
per candidate/sample.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

TOL = 1e-9


@dataclass(frozen=True)
class GroundSet:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")

    def __iter__(self):
        return iter(range(self.n))

    def __len__(self):
        return self.n

    def full(self) -> "ElementSet":
        return ElementSet(range(self.n), n=self.n)


class ElementSet:
    """Immutable set of element ids with insertion order.

    Membership is held in a Python integer used as a bitset, so union and
    containment are word operations regardless of ``n``.
    """

    __slots__ = ("members", "bits", "n")

    def __init__(self, members: Iterable[int] = (), n: int | None = None):
        ids = []
        bits = 0
        for e in members:
            e = int(e)
            if e < 0 or (n is not None and e >= n):
                raise ValueError(f"element id {e} outside ground set of size {n}")
            if bits >> e & 1:
                raise ValueError(f"duplicate element id {e}")
            bits |= 1 << e
            ids.append(e)
        self.members = tuple(ids)
        self.bits = bits
        self.n = n

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, e) -> bool:
        return e >= 0 and bool(self.bits >> int(e) & 1)

    def __eq__(self, other):
        if isinstance(other, ElementSet):
            return self.bits == other.bits
        if isinstance(other, (set, frozenset)):
            return set(self.members) == other
        return NotImplemented

    def __hash__(self):
        return hash(self.bits)

    def __repr__(self):
        return f"ElementSet({sorted(self.members)})"

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def add(self, e: int) -> "ElementSet":
        return ElementSet(self.members + (int(e),), n=self.n)

    def union(self, other: Iterable[int]) -> "ElementSet":
        extra = [e for e in other if e not in self]
        return ElementSet(self.members + tuple(extra), n=self.n)

    def issubset(self, other: "ElementSet") -> bool:
        return self.bits & ~other.bits == 0

    def indicator(self, n: int | None = None) -> np.ndarray:
        n = self.n if n is None else n
        x = np.zeros(n, dtype=bool)
        if self.members:
            x[list(self.members)] = True
        return x


def as_ids(S) -> np.ndarray:
    """Element ids of any set-like as an int array."""
    if isinstance(S, np.ndarray):
        return S.astype(np.intp, copy=False).reshape(-1)
    if isinstance(S, ElementSet):
        S = S.members
    elif not isinstance(S, (list, tuple)):
        S = list(S)
    return np.array(S, dtype=np.intp).reshape(-1)


class ValueOracle:
    """Base class for monotone submodular set functions on ``{0..n-1}``.

    Subclasses implement ``_eval``. Overriding ``_marginals`` and
    ``_eval_many`` gives vectorised access; the defaults loop.
    """

    native_marginal = False

    def __init__(self, n: int):
        self.n = int(n)
        self._queries = 0
        self._lock = threading.Lock()

    # query accounting
    @property
    def query_count(self) -> int:
        return self._queries

    def reset_queries(self) -> None:
        with self._lock:
            self._queries = 0

    def _count(self, q: int) -> None:
        with self._lock:
            self._queries += q

    # public interface
    def eval(self, S) -> float:
        self._count(1)
        return self._eval(as_ids(S))

    def marginal(self, e: int, S) -> float:
        ids = as_ids(S)
        if self.native_marginal:
            self._count(1)
            return float(self._marginals(ids, np.array([e], dtype=np.intp))[0])
        if e in set(ids.tolist()):
            return self.eval(ids) - self.eval(ids)
        return self.eval(np.append(ids, e)) - self.eval(ids)

    def marginals(self, S, candidates=None) -> np.ndarray:
        """Marginal gain of every candidate (default: all elements) on top of ``S``."""
        ids = as_ids(S)
        cand = np.arange(self.n, dtype=np.intp) if candidates is None else as_ids(candidates)
        if self.native_marginal:
            self._count(len(cand))
            return self._marginals(ids, cand)
        return np.array([self.marginal(int(e), ids) for e in cand], dtype=float)

    def eval_many(self, masks: np.ndarray) -> np.ndarray:
        """Values of a batch of sets given as rows of a boolean (s, n) array."""
        masks = np.asarray(masks, dtype=bool)
        self._count(masks.shape[0])
        return self._eval_many(masks)

    # hooks
    def _eval(self, ids: np.ndarray) -> float:
        raise NotImplementedError

    def _marginals(self, ids: np.ndarray, cand: np.ndarray) -> np.ndarray:
        base = self._eval(ids)
        present = set(ids.tolist())
        out = np.empty(len(cand))
        for j, e in enumerate(cand):
            out[j] = 0.0 if int(e) in present else self._eval(np.append(ids, e)) - base
        return out

    def _eval_many(self, masks: np.ndarray) -> np.ndarray:
        return np.array([self._eval(np.flatnonzero(row)) for row in masks], dtype=float)


class FunctionOracle(ValueOracle):
    """Wraps a plain callable ``fn(ids) -> float``. No submodularity promised."""

    def __init__(self, n: int, fn: Callable[[np.ndarray], float]):
        super().__init__(n)
        self.fn = fn

    def _eval(self, ids):
        return float(self.fn(ids))


class ModularFunction(ValueOracle):
    native_marginal = True

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("modular weights must be non-negative")
        super().__init__(len(w))
        self.weights = w

    def _eval(self, ids):
        return float(self.weights[np.unique(ids)].sum()) if len(ids) else 0.0

    def _marginals(self, ids, cand):
        out = self.weights[cand].copy()
        if len(ids):
            out[np.isin(cand, ids)] = 0.0
        return out

    def _eval_many(self, masks):
        return masks.astype(float) @ self.weights


class CoverageFunction(ValueOracle):
    """``f(S) = |union of cover_sets[e] for e in S|`` over a finite universe."""

    native_marginal = True

    def __init__(self, cover_sets: Sequence[Iterable[int]], universe_size: int | None = None):
        sets = [sorted({int(v) for v in c}) for c in cover_sets]
        if universe_size is None:
            universe_size = 1 + max((c[-1] for c in sets if c), default=-1)
        super().__init__(len(sets))
        self.universe_size = int(universe_size)
        cover = np.zeros((len(sets), max(self.universe_size, 1)), dtype=bool)
        for e, c in enumerate(sets):
            if c and (c[0] < 0 or c[-1] >= self.universe_size):
                raise ValueError(f"cover set of element {e} leaves the universe")
            cover[e, c] = True
        self.cover = cover
        self.cover_sets = [tuple(c) for c in sets]
        self._cover_f = cover.astype(np.float32)

    def covered(self, ids) -> np.ndarray:
        if len(ids) == 0:
            return np.zeros(self.cover.shape[1], dtype=bool)
        return self.cover[ids].any(axis=0)

    def _eval(self, ids):
        return float(np.count_nonzero(self.covered(ids)))

    def _marginals(self, ids, cand):
        uncovered = (~self.covered(ids)).astype(np.float32)
        return (self._cover_f[cand] @ uncovered).astype(float)

    def _eval_many(self, masks, chunk: int = 4096):
        out = np.empty(masks.shape[0])
        for lo in range(0, masks.shape[0], chunk):
            block = masks[lo:lo + chunk].astype(np.float32)
            out[lo:lo + chunk] = np.count_nonzero(block @ self._cover_f > 0, axis=1)
        return out


class CappedOracle(ValueOracle):
    """``min(inner(S), cap)``; stays monotone submodular."""

    native_marginal = True

    def __init__(self, inner: ValueOracle, cap: float):
        if not cap > 0:
            raise ValueError(f"cap must be positive, got {cap}")
        super().__init__(inner.n)
        self.inner = inner
        self.cap = float(cap)

    def _eval(self, ids):
        return min(self.inner.eval(ids), self.cap)

    def _marginals(self, ids, cand):
        base = self.inner.eval(ids)
        gains = self.inner.marginals(ids, cand)
        return np.minimum(base + gains, self.cap) - min(base, self.cap)

    def _eval_many(self, masks):
        return np.minimum(self.inner.eval_many(masks), self.cap)


class ScaledResidualOracle(ValueOracle):
    """``(inner(base | S) - inner(base)) / denom``.

    With ``inner`` capped at a target V and ``denom = V - inner(base)`` the
    range is [0, 1].
    """

    native_marginal = True

    def __init__(self, inner: ValueOracle, base, denom: float):
        if not denom > 0:
            raise ValueError(f"denominator must be positive, got {denom}")
        super().__init__(inner.n)
        self.inner = inner
        self.base = ElementSet(sorted(as_ids(base).tolist()), n=inner.n)
        self._base_ids = as_ids(self.base)
        self._base_mask = self.base.indicator(inner.n)
        self.denom = float(denom)
        self.base_value = inner.eval(self._base_ids)

    def _join(self, ids):
        if len(ids) == 0:
            return self._base_ids
        return np.union1d(self._base_ids, ids)

    def _eval(self, ids):
        return (self.inner.eval(self._join(ids)) - self.base_value) / self.denom

    def _marginals(self, ids, cand):
        return self.inner.marginals(self._join(ids), cand) / self.denom

    def _eval_many(self, masks):
        return (self.inner.eval_many(masks | self._base_mask) - self.base_value) / self.denom


class ConvexCombinationOracle(ValueOracle):
    """``sum_i weights[i] * oracles[i](S)`` for non-negative weights.

    Weights need not sum to one (the truncated sum used by saturate has unit
    weights).
    """

    native_marginal = True

    def __init__(self, oracles: Sequence[ValueOracle], weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if len(oracles) != len(w) or len(oracles) == 0:
            raise ValueError("need one weight per oracle and at least one oracle")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        super().__init__(oracles[0].n)
        self.oracles = list(oracles)
        self.weights = w
        live = [(wi, f) for wi, f in zip(w, self.oracles) if wi > 0]
        self._stack = _CoverageStack.build([f for _, f in live], [wi for wi, _ in live])

    def _live(self):
        return [(w, f) for w, f in zip(self.weights, self.oracles) if w > 0]

    def _eval(self, ids):
        if self._stack is not None:
            return self._stack.eval(ids)
        return float(sum(w * f.eval(ids) for w, f in self._live()))

    def _marginals(self, ids, cand):
        if self._stack is not None:
            return self._stack.marginals(ids, cand)
        out = np.zeros(len(cand))
        for w, f in self._live():
            out += w * f.marginals(ids, cand)
        return out

    def _eval_many(self, masks):
        out = np.zeros(masks.shape[0])
        for w, f in self._live():
            out += w * f.eval_many(masks)
        return out


def _coverage_chain(f: ValueOracle):
    """Unwrap ``[ScaledResidual](Capped(Coverage))``-style chains, else ``None``."""
    layers = [f]
    scaled = None
    if isinstance(f, ScaledResidualOracle):
        scaled, f = f, f.inner
        layers.append(f)
    cap = math.inf
    capped = isinstance(f, CappedOracle)
    if capped:
        cap, f = f.cap, f.inner
        layers.append(f)
    if not isinstance(f, CoverageFunction):
        return None
    if scaled is None:
        return layers, f, np.zeros(f.n, dtype=bool), cap, 0.0, 1.0, capped
    return layers, f, scaled._base_mask, cap, scaled.base_value, scaled.denom, capped


class _CoverageStack:
    """Fused ``sum_l w_l (min(cov_l(B_l + S), cap_l) - off_l) / den_l`` over coverage chains.

    Gives the same values and the same per-layer query counts as evaluating
    each chain separately, with one batched matmul per call.
    """

    CELL_LIMIT = 2**25

    def __init__(self, chains, weights):
        self.layers = [c[0] for c in chains]
        self.covs = [c[1] for c in chains]
        n = self.covs[0].n
        U = max(cov.cover.shape[1] for cov in self.covs)
        cover = np.zeros((len(chains), n, U), dtype=bool)
        for l, cov in enumerate(self.covs):
            cover[l, :, : cov.cover.shape[1]] = cov.cover
        self.cover = cover
        self.cover_f = cover.astype(np.float32)
        base = np.array([c[2] for c in chains])
        self.base_cov = np.einsum("ln,lnu->lu", base.astype(np.float32), self.cover_f) > 0
        self.cap = np.array([c[3] for c in chains], dtype=float)
        self.offset = np.array([c[4] for c in chains], dtype=float)
        self.scale = np.asarray(weights, dtype=float) / np.array([c[5] for c in chains])
        self.extra = [c[6] for c in chains]

    @classmethod
    def build(cls, oracles, weights):
        if not oracles:
            return None
        chains = [_coverage_chain(f) for f in oracles]
        if any(c is None for c in chains):
            return None
        n = oracles[0].n
        U = max(c[1].cover.shape[1] for c in chains)
        if len(chains) * n * U > cls.CELL_LIMIT:
            return None
        return cls(chains, weights)

    def _covered(self, ids):
        if len(ids) == 0:
            return self.base_cov
        return self.base_cov | self.cover[:, ids, :].any(axis=1)

    def eval(self, ids):
        for layers in self.layers:
            for f in layers:
                f._count(1)
        val = self._covered(ids).sum(axis=1)
        return float(self.scale @ (np.minimum(val, self.cap) - self.offset))

    def marginals(self, ids, cand):
        c = len(cand)
        for layers, extra in zip(self.layers, self.extra):
            for f in layers:
                f._count(c)
            if extra:
                layers[-1]._count(1)
        covered = self._covered(ids)
        val = covered.sum(axis=1).astype(float)
        unc = (~covered).astype(np.float32)[:, :, None]
        gains = np.matmul(self.cover_f, unc)[:, :, 0][:, cand].astype(float)
        capped = np.minimum(val[:, None] + gains, self.cap[:, None]) - np.minimum(val, self.cap)[:, None]
        return self.scale @ capped


class MinOracle(ValueOracle):
    """``min_i f_i(S)``. Monotone but in general NOT submodular."""

    native_marginal = True

    def __init__(self, oracles: Sequence[ValueOracle]):
        super().__init__(oracles[0].n)
        self.oracles = list(oracles)

    def _eval(self, ids):
        return min(f.eval(ids) for f in self.oracles)

    def _marginals(self, ids, cand):
        bases = [f.eval(ids) for f in self.oracles]
        after = np.min([b + f.marginals(ids, cand) for b, f in zip(bases, self.oracles)], axis=0)
        return after - min(bases)

    def _eval_many(self, masks):
        return np.min([f.eval_many(masks) for f in self.oracles], axis=0)


def greedy_fraction(ratio: float) -> float:
    """``1 - exp(-ratio)`` for ratio in [0, 1].

    Greedy's guarantee when its budget is ``ratio`` times the optimum's size.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must lie in [0, 1], got {ratio}")
    return 1.0 - math.exp(-ratio)


def marginal_of_set(f: ValueOracle, X, A) -> float:
    """``f(A + X) - f(A)``, the value ``X`` adds on top of ``A``."""
    a = as_ids(A)
    joined = np.union1d(a, as_ids(X))
    return f.eval(joined) - f.eval(a)


@dataclass
class SubmodularityReport:
    ok: bool
    counterexample: tuple | None = None  # (B, A, e, gain_on_A, gain_on_B)

    def __bool__(self):
        return self.ok


def check_submodular(f: ValueOracle, trials: int = 1000, rng_seed=0, tol: float = TOL) -> SubmodularityReport:
    """Randomised spot check of diminishing returns on ``(B subset A, e not in A)`` triples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    n = f.n
    if n < 2:
        return SubmodularityReport(True)
    for _ in range(trials):
        e = int(rng.integers(n))
        rest = np.delete(np.arange(n), e)
        a_size = int(rng.integers(1, n))
        A = rng.choice(rest, size=a_size, replace=False)
        B = A[rng.random(a_size) < rng.random()]
        gain_a = f.eval(np.append(A, e)) - f.eval(A)
        gain_b = f.eval(np.append(B, e)) - f.eval(B)
        if gain_a > gain_b + tol:
            return SubmodularityReport(
                False, (sorted(B.tolist()), sorted(A.tolist()), e, gain_a, gain_b)
            )
    return SubmodularityReport(True)
