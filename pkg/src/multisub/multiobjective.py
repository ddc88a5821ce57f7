"""Multi-objective cardinality-constrained maximisation.

The decision form asks for a set of size ``k`` with ``f_i(S) >= target_i`` for
all objectives; the max-min form maximises ``min_i f_i(S)``. The fast
pipeline is a single-pass filter, a multiplicative-weights stage over scaled
residual objectives, then swap rounding of the averaged point. The greedy
baselines and the tuple-greedy variant live here too.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    TOL,
    CappedOracle,
    ConvexCombinationOracle,
    ElementSet,
    MinOracle,
    ScaledResidualOracle,
)
from .instances import MultiObjectiveInstance, _subset_masks
from .multilinear import ConvexCombination, FractionalPoint, swap_round
from .solvers import SolverConfig, solve, standard_greedy

E1 = 1 - 1 / math.e


class Stage1Exhausted(RuntimeError):
    """The filter used up the whole cardinality budget."""

    def __init__(self, fixed: ElementSet, k: int):
        super().__init__(f"stage-1 filter picked {len(fixed)} elements with k={k}")
        self.filtered = fixed


def default_epsilon(m: int, k: int) -> float:
    """``min(1/(8 ln m), (m/k)**0.25)`` clamped to [0.05, 0.5]."""
    raw = (m / k) ** 0.25
    if m > 1:
        raw = min(raw, 1 / (8 * math.log(m)))
    return min(max(raw, 0.05), 0.5)


def mwu_rounds(m: int, delta: float) -> int:
    if m <= 1:
        return 1
    return math.ceil(2 * math.log(m) / delta**2)


@dataclass
class MwuConfig:
    delta: float = 0.2
    alpha: float | None = None  # None: the configured solver's own guarantee
    epsilon: float | None = None  # None: default_epsilon(m, k)
    rounds_override: int | None = None
    best_of_trajectory: bool = False
    skip_stage1: bool = False
    solver: SolverConfig = field(default_factory=lambda: SolverConfig("threshold_greedy", delta_prime=0.1))
    repetitions: int | None = None  # swap-rounding repeats; None: ceil(log2 m) + 1

    def __post_init__(self):
        if not 0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 0.5]")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.rounds_override is not None and self.rounds_override < 1:
            raise ValueError("rounds_override must be >= 1")

    @classmethod
    def benchmark(cls, delta: float = 0.2, **kw) -> "MwuConfig":
        """Heuristic mode: no filter, best of trajectory and rounded sets, plain greedy."""
        kw.setdefault("solver", SolverConfig("standard_greedy"))
        return cls(delta=delta, best_of_trajectory=True, skip_stage1=True, **kw)

    def rounds(self, m: int) -> int:
        return self.rounds_override or mwu_rounds(m, self.delta)

    def alpha_for(self, solver: SolverConfig) -> float:
        return solver.alpha if self.alpha is None else self.alpha

    def reps(self, m: int) -> int:
        if self.repetitions:
            return self.repetitions
        return math.ceil(math.log2(m)) + 1 if m > 1 else 1


@dataclass
class MwuTrace:
    weights: list  # per-round weight vectors, one more than the round count
    sets: list  # solver output per round
    values: np.ndarray  # (T, m) scaled residual values; NaN for satisfied objectives
    costs: np.ndarray  # (T, m) value - alpha
    potentials: np.ndarray  # total weight before each round, plus the final total
    g_values: np.ndarray  # weighted objective value of each round's set
    active: np.ndarray
    filtered: ElementSet  # elements fixed by the filter
    k: int
    budget: int  # k minus the filtered count
    alpha: float
    delta: float
    mean_point: FractionalPoint | None = None
    rounded: ElementSet | None = None
    output: ElementSet | None = None

    @property
    def rounds(self) -> int:
        return len(self.sets)

    def average_values(self) -> np.ndarray:
        return np.nanmean(self.values, axis=0) if self.rounds else np.zeros(len(self.active))

    def mixed_costs(self) -> np.ndarray:
        """Per-round cost averaged under the normalised weights."""
        lam = np.array(self.weights[:-1])
        p = lam / lam.sum(axis=1, keepdims=True)
        return np.nansum(p * np.nan_to_num(self.costs), axis=1)


def _capped(inst: MultiObjectiveInstance):
    if inst.targets is None:
        raise ValueError("this operation needs per-objective targets")
    return [CappedOracle(f, v) for f, v in zip(inst.oracles, inst.targets)]


def stage1_filter(inst: MultiObjectiveInstance, epsilon: float):
    """One ascending pass; keep ``e`` if some capped gain on top of the kept
    elements reaches ``eps**3`` times that objective's target.

    Returns ``(fixed, k - len(fixed))``. Raises :class:`Stage1Exhausted` when no
    budget is left.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    capped = _capped(inst)
    thresholds = epsilon**3 * inst.targets
    fixed: list[int] = []
    for e in range(inst.n):
        if any(f.marginal(e, fixed) >= th - TOL for f, th in zip(capped, thresholds)):
            fixed.append(e)
    fixed = ElementSet(fixed, n=inst.n)
    budget = inst.k - len(fixed)
    if budget <= 0:
        raise Stage1Exhausted(fixed, inst.k)
    return fixed, budget


def mwu_stage2(
    inst: MultiObjectiveInstance,
    fixed,
    cfg: MwuConfig | None = None,
    solver: SolverConfig | None = None,
    rng_seed=0,
) -> MwuTrace:
    """Multiplicative weights over the scaled residuals ``f_i(. | fixed) / (target_i - f_i(fixed))``.

    Each round solves the weighted sum with the single-objective solver on
    the unfixed elements with the remaining budget, then shrinks each objective's
    weight by ``1 - delta * (scaled value - alpha)``. Objectives that ``fixed`` already
    satisfies carry weight zero throughout.
    """
    cfg = cfg or MwuConfig()
    solver = solver or cfg.solver
    fixed = fixed if isinstance(fixed, ElementSet) else ElementSet(fixed, n=inst.n)
    capped = _capped(inst)
    m = inst.m
    budget = inst.k - len(fixed)
    if budget < 1:
        raise ValueError("no budget left after the fixed elements")
    alpha = cfg.alpha_for(solver)
    base = np.array([f.eval(fixed) for f in capped])
    denom = inst.targets - base
    active = denom > TOL * np.maximum(1.0, inst.targets)
    scaled = [ScaledResidualOracle(f, fixed, d) if a else None for f, d, a in zip(capped, denom, active)]

    lam = np.where(active, 1.0 / m, 0.0)
    T = cfg.rounds(m) if active.any() else 0
    weights, sets, values, costs, pots, gvals = [lam.copy()], [], [], [], [lam.sum()], []
    live = np.flatnonzero(active)
    for _ in range(T):
        g = ConvexCombinationOracle([scaled[i] for i in live], lam[live])
        X = solve(g, budget, solver, exclude=fixed.members)
        v = np.full(m, np.nan)
        v[live] = [scaled[i].eval(X) for i in live]
        c = v - alpha
        gvals.append(float(lam[live] @ v[live]))
        lam = lam.copy()
        lam[live] *= 1 - cfg.delta * c[live]
        sets.append(X)
        values.append(v)
        costs.append(c)
        weights.append(lam.copy())
        pots.append(lam.sum())

    trace = MwuTrace(
        weights=weights,
        sets=sets,
        values=np.array(values).reshape(T, m),
        costs=np.array(costs).reshape(T, m),
        potentials=np.array(pots),
        g_values=np.array(gvals),
        active=active,
        filtered=fixed,
        k=inst.k,
        budget=budget,
        alpha=alpha,
        delta=cfg.delta,
    )
    if sets:
        trace.mean_point = ConvexCombination.uniform(sets).point(inst.n)
    return trace


@dataclass
class DecisionResult:
    status: str  # "feasible_set" or "infeasible_certificate"
    set: ElementSet  # best set found (kept on infeasible verdicts for the max-min search)
    achieved: np.ndarray
    ratio: float
    guarantee: float
    trace: MwuTrace | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible_set"


def _pad(S: ElementSet, k: int, n: int) -> ElementSet:
    extra = [e for e in range(n) if e not in S][: k - len(S)]
    return S.union(extra)


def _seeds(rng_seed, count: int) -> list:
    if not isinstance(rng_seed, np.random.SeedSequence):
        rng_seed = np.random.SeedSequence(rng_seed)
    return rng_seed.spawn(count)


def solve_targets(inst: MultiObjectiveInstance, cfg: MwuConfig | None = None, rng_seed=0) -> DecisionResult:
    """Filter, multiplicative weights, swap rounding; returns the best candidate set.

    Candidates are the fixed set plus a swap-rounded set, once per repetition,
    plus the fixed set with each round's solver output when
    ``best_of_trajectory`` is set. The best one maximises
    ``min_i min(f_i, target_i) / target_i``. The verdict is infeasible
    when that ratio falls below the guarantee
    ``(1 - eps)(1 - 1/e)(alpha budget/k - delta)``.
    """
    cfg = cfg or MwuConfig()
    capped = _capped(inst)
    m, k, n = inst.m, inst.k, inst.n
    eps = cfg.epsilon or default_epsilon(m, k)
    fixed = ElementSet((), n=n)
    if not cfg.skip_stage1:
        try:
            fixed, _ = stage1_filter(inst, eps)
        except Stage1Exhausted:
            fixed = ElementSet((), n=n)
    seed_mwu, seed_round = _seeds(rng_seed, 2)
    trace = mwu_stage2(inst, fixed, cfg, rng_seed=seed_mwu)

    candidates = []
    if trace.rounds:
        comb = ConvexCombination.uniform(trace.sets)
        for s in _seeds(seed_round, cfg.reps(m)):
            candidates.append(fixed.union(swap_round(comb, s)))
        if cfg.best_of_trajectory:
            candidates.extend(fixed.union(X) for X in trace.sets)
    else:
        candidates.append(_pad(fixed, k, n))

    masks = np.array([c.indicator(n) for c in candidates])
    ratios = np.min([f.eval_many(masks) / v for f, v in zip(capped, inst.targets)], axis=0)
    j = int(np.flatnonzero(ratios >= ratios.max() - TOL)[0])
    best = candidates[j]
    if trace.rounds:
        trace.rounded = ElementSet([e for e in candidates[0] if e not in fixed], n=n)
        trace.output = best

    achieved = inst.values(best)
    ratio = float(np.min(achieved / inst.targets))
    guarantee = (1 - eps) * E1 * (trace.alpha * (k - len(fixed)) / k - cfg.delta)
    status = "feasible_set" if min(ratio, 1.0) >= guarantee - TOL else "infeasible_certificate"
    return DecisionResult(status, best, achieved, ratio, guarantee, trace)


def _bisect(inst: MultiObjectiveInstance, probe, iters: int, lo: float, hi: float | None):
    """Binary search on the common target ``t``; keeps the best set over all probes."""
    if hi is None:
        hi = inst.min_value(range(inst.n))
    best_set, best_val = None, -math.inf
    for it in range(iters):
        if hi - lo <= TOL:
            break
        t = (lo + hi) / 2
        S = probe(t, it)
        val = inst.min_value(S)
        if val > best_val + TOL:
            best_set, best_val = S, val
        if val >= t - TOL:
            lo = min(max(t, val), hi)
        else:
            hi = t
    if best_set is None:
        best_set = standard_greedy(MinOracle(inst.oracles), inst.k)
        best_val = inst.min_value(best_set)
    return best_set, best_val


def solve_max_min(
    inst: MultiObjectiveInstance,
    cfg: MwuConfig | None = None,
    iters: int = 12,
    lo: float = 0.0,
    hi: float | None = None,
    rng_seed=0,
):
    """Max-min via binary search over a common target ``t`` with capped objectives."""
    cfg = cfg or MwuConfig()
    seeds = _seeds(rng_seed, iters)

    def probe(t, it):
        return solve_targets(inst.with_targets(np.full(inst.m, t)), cfg, seeds[it]).set

    return _bisect(inst, probe, iters, lo, hi)


def round_robin_greedy(inst: MultiObjectiveInstance) -> ElementSet:
    """Greedy that cycles through the objectives, one element per step."""
    chosen: list[int] = []
    unused = np.ones(inst.n, dtype=bool)
    for step in range(inst.k):
        f = inst.oracles[step % inst.m]
        cand = np.flatnonzero(unused)
        gains = f.marginals(chosen, cand)
        e = int(cand[np.flatnonzero(gains >= gains.max() - TOL)[0]])
        chosen.append(e)
        unused[e] = False
    return ElementSet(chosen, n=inst.n)


def saturate(inst: MultiObjectiveInstance, t: float) -> ElementSet:
    """Greedy on the truncated sum ``sum_i min(f_i, t)`` up to ``k`` elements."""
    if not t > 0:
        raise ValueError("t must be positive")
    g = ConvexCombinationOracle([CappedOracle(f, t) for f in inst.oracles], np.ones(inst.m))
    return standard_greedy(g, inst.k)


def saturate_with_search(inst: MultiObjectiveInstance, iters: int = 12, lo: float = 0.0, hi=None):
    S, _ = _bisect(inst, lambda t, it: saturate(inst, t), iters, lo, hi)
    return S


def convex_combination_greedy(inst: MultiObjectiveInstance, weights=None) -> ElementSet:
    w = np.full(inst.m, 1.0 / inst.m) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (inst.m,) or np.any(w < 0) or abs(w.sum() - 1) > TOL:
        raise ValueError("weights must be m non-negative reals summing to 1")
    return standard_greedy(ConvexCombinationOracle(inst.oracles, w), inst.k)


def naive_min_greedy(inst: MultiObjectiveInstance) -> ElementSet:
    """Greedy on ``min_i f_i``; no guarantee since the minimum is not submodular."""
    return standard_greedy(MinOracle(inst.oracles), inst.k)


def tuple_min_greedy(inst: MultiObjectiveInstance, tuple_size: int, budget: int = 40**3) -> ElementSet:
    """Greedy over ``tuple_size``-subsets w.r.t. ``min_i f_i``.

    Runs ``k // tuple_size`` full steps; a last, smaller tuple covers the
    remainder so the output always has ``k`` elements. Enumeration order is
    lexicographic and the first maximiser wins.
    """
    n, k = inst.n, inst.k
    if not 1 <= tuple_size <= k:
        raise ValueError("tuple_size must lie in [1, k]")
    need = n**tuple_size
    if need > budget:
        raise ValueError(f"tuple enumeration needs n^t = {n}^{tuple_size} = {need} > budget {budget}")
    h = MinOracle(inst.oracles)
    chosen: list[int] = []
    while len(chosen) < k:
        size = min(tuple_size, k - len(chosen))
        unused = [e for e in range(n) if e not in chosen]
        combos = list(itertools.combinations(unused, size))
        masks = _subset_masks(n, combos)
        masks[:, chosen] = True
        vals = h.eval_many(masks)
        j = int(np.flatnonzero(vals >= vals.max() - TOL)[0])
        chosen.extend(combos[j])
    return ElementSet(chosen, n=n)


def check_subset_variation(inst: MultiObjectiveInstance, base_set, kprime: int, epsilon: float, max_size: int = 16):
    """Search the ``kprime``-subsets of ``base_set`` for one keeping ``(1-eps) kprime/|base_set|`` of every objective.

    Returns ``(exists, witness)``; the witness is the lexicographically first
    qualifying subset (or ``None``).
    """
    base_set = sorted(base_set)
    size = len(base_set)
    if size > max_size:
        raise ValueError(f"base set size {size} exceeds the enumeration limit {max_size}")
    if not 1 <= kprime <= size:
        raise ValueError("kprime must lie in [1, len(base_set)]")
    full = inst.values(base_set)
    need = (1 - epsilon) * kprime / size * full
    combos = list(itertools.combinations(base_set, kprime))
    masks = _subset_masks(inst.n, combos)
    vals = np.array([f.eval_many(masks) for f in inst.oracles])  # (m, C)
    ok = np.all(vals >= need[:, None] - TOL, axis=0)
    hits = np.flatnonzero(ok)
    if len(hits) == 0:
        return False, None
    return True, ElementSet(combos[hits[0]], n=inst.n)
