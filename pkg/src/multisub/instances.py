"""Instance generators, brute-force optima and the JSON instance format."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import TOL, CoverageFunction, ElementSet, ValueOracle

FORMAT_NAME = "multisub-instance"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class InitiatorMatrix:
    entries: tuple  # ((a, b), (c, d))

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.shape != (2, 2) or np.any(a < 0) or np.any(a > 1):
            raise ValueError("initiator must be a 2x2 matrix with entries in [0, 1]")
        if a.sum() < 1:
            raise ValueError(f"initiator entries sum to {a.sum():.4f} < 1; discarded")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    @classmethod
    def draw(cls, rng: np.random.Generator) -> "InitiatorMatrix":
        """Uniform entries, redrawn until they sum to at least one."""
        while True:
            a = rng.random((2, 2))
            if a.sum() >= 1:
                return cls(tuple(map(tuple, a.tolist())))


def kronecker_power(initiator: InitiatorMatrix, power: int) -> np.ndarray:
    p = np.ones((1, 1))
    for _ in range(power):
        p = np.kron(p, initiator.array)
    return p


@dataclass
class Graph:
    n_vertices: int
    edges: np.ndarray  # (E, 2) with u < v, lexicographically sorted
    initiator: InitiatorMatrix | None = None
    seed: int | None = None
    adjacency: list = field(init=False, repr=False)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= self.n_vertices):
            raise ValueError("edge endpoint outside vertex range")
        nbrs = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges.tolist():
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adjacency = [np.array(sorted(set(a)), dtype=np.int64) for a in nbrs]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "edges": self.edges.tolist(),
            "initiator": None if self.initiator is None else [list(r) for r in self.initiator.entries],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        init = d.get("initiator")
        return cls(
            d["n_vertices"],
            np.array(d["edges"], dtype=np.int64),
            None if init is None else InitiatorMatrix(tuple(map(tuple, init))),
            d.get("seed"),
        )


def kronecker_generate(power: int, rng_seed=0, initiator: InitiatorMatrix | None = None) -> Graph:
    """Stochastic Kronecker graph on ``2**power`` vertices.

    Each pair ``u < v`` becomes an edge independently with probability equal
    to the ``(u, v)`` entry of the initiator's Kronecker power (capped at 1).
    """
    if not 1 <= power <= 12:
        raise ValueError("power must lie in [1, 12]")
    rng = np.random.default_rng(rng_seed)
    if initiator is None:
        initiator = InitiatorMatrix.draw(rng)
    p = np.minimum(kronecker_power(initiator, power), 1.0)
    n = p.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p[iu, ju]
    edges = np.column_stack([iu[keep], ju[keep]])
    seed = rng_seed if isinstance(rng_seed, (int, np.integer)) else None
    return Graph(n, edges, initiator, None if seed is None else int(seed))


def expected_edges(initiator: InitiatorMatrix, power: int) -> tuple[float, float]:
    """Mean and variance of the realised edge count."""
    p = np.minimum(kronecker_power(initiator, power), 1.0)
    up = p[np.triu_indices(p.shape[0], k=1)]
    return float(up.sum()), float((up * (1 - up)).sum())


def max_cover_objectives(graphs: Sequence[Graph]) -> list[CoverageFunction]:
    """One coverage function per graph; vertex ``e`` covers its closed neighbourhood."""
    if not graphs:
        raise ValueError("need at least one graph")
    n = graphs[0].n_vertices
    if any(g.n_vertices != n for g in graphs):
        raise ValueError("all graphs must share the same vertex count")
    return [
        CoverageFunction([[e, *g.adjacency[e].tolist()] for e in range(n)], universe_size=n)
        for g in graphs
    ]


@dataclass
class MultiObjectiveInstance:
    oracles: list
    k: int
    targets: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.oracles:
            raise ValueError("need at least one objective")
        n = self.oracles[0].n
        if any(f.n != n for f in self.oracles):
            raise ValueError("objectives disagree on ground set size")
        if not 1 <= self.k <= n:
            raise ValueError(f"k={self.k} must lie in [1, n={n}]")
        if self.targets is not None:
            t = np.asarray(self.targets, dtype=float)
            if t.shape != (len(self.oracles),) or np.any(t <= 0):
                raise ValueError("targets must be one positive value per objective")
            self.targets = t

    @property
    def n(self) -> int:
        return self.oracles[0].n

    @property
    def m(self) -> int:
        return len(self.oracles)

    def values(self, S) -> np.ndarray:
        return np.array([f.eval(S) for f in self.oracles])

    def min_value(self, S) -> float:
        return float(self.values(S).min())

    def with_k(self, k: int) -> "MultiObjectiveInstance":
        return MultiObjectiveInstance(self.oracles, k, self.targets, dict(self.provenance))

    def with_targets(self, targets) -> "MultiObjectiveInstance":
        return MultiObjectiveInstance(self.oracles, self.k, targets, dict(self.provenance))

    def query_count(self) -> int:
        return sum(f.query_count for f in self.oracles)


def planted_instance(n: int, m: int, k: int, rng_seed=0, block: int = 4):
    """Coverage instance with a known set ``S_star`` meeting every target exactly.

    Each objective's universe is ``k`` blocks of ``block`` vertices. The
    planted elements (at random ids) each cover one block in full in every
    objective. Every other element covers random halves of two or three
    blocks, so it looks at least as attractive as a planted one to a myopic
    greedy step. Targets are ``f_i(S_star)``, the whole universe.
    """
    if not 1 <= k <= n // 2:
        raise ValueError("planted instance needs 1 <= k <= n/2")
    rng = np.random.default_rng(rng_seed)
    planted = np.sort(rng.choice(n, size=k, replace=False))
    owner = {int(e): j for j, e in enumerate(planted)}
    half = max(1, block // 2)
    oracles = []
    for _ in range(m):
        cover = []
        for e in range(n):
            if e in owner:
                j = owner[e]
                cover.append(range(j * block, (j + 1) * block))
            else:
                blocks = rng.choice(k, size=min(k, int(rng.integers(2, 4))), replace=False)
                cover.append(
                    [int(b) * block + int(v) for b in blocks for v in rng.choice(block, half, replace=False)]
                )
        oracles.append(CoverageFunction(cover, universe_size=k * block))
    s_star = ElementSet(planted.tolist(), n=n)
    targets = np.array([f.eval(s_star) for f in oracles])
    for f in oracles:
        f.reset_queries()
    inst = MultiObjectiveInstance(oracles, k, targets, {"generator": "planted", "seed": rng_seed})
    return inst, s_star


def random_coverage(n: int, universe: int, rng, density: float = 0.2) -> CoverageFunction:
    """Each element covers every universe vertex independently w.p. ``density``."""
    rng = np.random.default_rng(rng)
    cover = rng.random((n, universe)) < density
    return CoverageFunction([np.flatnonzero(r) for r in cover], universe_size=universe)


def small_marginal_instance(k: int, m: int, rng_seed=0, universe: int = 60, per_element: int = 3):
    """``k`` elements whose sets are each a small slice of every objective's total coverage.

    Used as the base set for subset-variation checks.
    """
    rng = np.random.default_rng(rng_seed)
    oracles = []
    for _ in range(m):
        cover = [rng.choice(universe, size=per_element, replace=False) for _ in range(k)]
        oracles.append(CoverageFunction(cover, universe_size=universe))
    inst = MultiObjectiveInstance(oracles, k, provenance={"generator": "small_marginal", "seed": rng_seed})
    return inst, ElementSet(range(k), n=k)


def _subset_masks(n: int, combos: Sequence[tuple]) -> np.ndarray:
    masks = np.zeros((len(combos), n), dtype=bool)
    if combos:
        idx = np.array(combos, dtype=np.intp)
        np.put_along_axis(masks, idx, True, axis=1)
    return masks


def brute_force_max_min(inst: MultiObjectiveInstance, budget: int = 10**6, chunk: int = 20000):
    """Exact ``max_{|S|=k} min_i f_i(S)``; ties go to the lexicographically smallest set."""
    n, k = inst.n, inst.k
    total = math.comb(n, k)
    if total > budget:
        raise ValueError(f"brute force needs C({n},{k}) = {total} evaluations > budget {budget}")
    best_val, best = -math.inf, None
    combos = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        masks = _subset_masks(n, block)
        vals = np.min([f.eval_many(masks) for f in inst.oracles], axis=0)
        j = int(np.argmax(vals))
        if vals[j] > best_val + TOL:
            best_val, best = float(vals[j]), block[j]
    return ElementSet(best, n=n), best_val


def brute_force_single(f: ValueOracle, k: int, budget: int = 10**6):
    return brute_force_max_min(MultiObjectiveInstance([f], k), budget)


# serialization ---------------------------------------------------------------


def instance_to_dict(inst: MultiObjectiveInstance, k: int | None = None) -> dict:
    for f in inst.oracles:
        if not isinstance(f, CoverageFunction):
            raise TypeError("only coverage instances are serialisable")
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": inst.n,
        "m": inst.m,
        "k": inst.k if k is None else k,
        "universe_sizes": [f.universe_size for f in inst.oracles],
        "cover_sets": [[list(c) for c in f.cover_sets] for f in inst.oracles],
        "targets": None if inst.targets is None else [float(v) for v in inst.targets],
        "provenance": inst.provenance,
    }


def instance_from_dict(d: dict) -> MultiObjectiveInstance:
    if d.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported instance format version {d.get('version')}")
    oracles = [
        CoverageFunction(sets, universe_size=u) for sets, u in zip(d["cover_sets"], d["universe_sizes"])
    ]
    if len(oracles) != d["m"] or any(f.n != d["n"] for f in oracles):
        raise ValueError("instance header disagrees with its cover sets")
    targets = d.get("targets")
    return MultiObjectiveInstance(
        oracles, d["k"], None if targets is None else np.array(targets), d.get("provenance") or {}
    )


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_instance(inst: MultiObjectiveInstance, path, k: int | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(instance_to_dict(inst, k)))


def load_instance(path) -> MultiObjectiveInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
