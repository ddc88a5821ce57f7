"""End-to-end acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`. ``run_all`` prints one
PASS/FAIL line per criterion. The ``fast`` level divides instance and trial
counts by five; sample sizes and tolerances stay the same.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bench import (
    REFERENCE_GAINS,
    ExperimentConfig,
    cmd_gen,
    cmd_run,
    max_gain_over_saturate,
    mean_values,
    read_results,
)
from .core import TOL, CoverageFunction, ElementSet
from .instances import (
    MultiObjectiveInstance,
    brute_force_single,
    expected_edges,
    kronecker_generate,
    planted_instance,
    random_coverage,
    small_marginal_instance,
)
from .multilinear import (
    ConvexCombination,
    EstimatorConfig,
    FractionalPoint,
    concavity_check,
    estimate_multilinear,
    swap_round,
)
from .multiobjective import (
    E1,
    MwuConfig,
    Stage1Exhausted,
    _capped,
    check_subset_variation,
    mwu_stage2,
    stage1_filter,
)
from .solvers import SolverConfig, lazy_greedy, standard_greedy, threshold_greedy


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _count(full: int, level: str) -> int:
    return full if level == "full" else max(1, full // 5)


def greedy_guarantee(level="full") -> CriterionResult:
    start = time.perf_counter()
    worst = math.inf
    count = _count(50, level)
    for s in range(count):
        rng = np.random.default_rng(s)
        n, k = int(rng.integers(6, 17)), int(rng.integers(1, 5))
        f = random_coverage(n, 20, rng, density=0.2)
        opt = brute_force_single(f, k)[1]
        worst = min(worst, f.eval(standard_greedy(f, k)) / opt)
    secs = time.perf_counter() - start
    ok = worst >= E1 - TOL and secs < 10
    return CriterionResult(1, "greedy vs brute force", ok,
                           f"worst ratio {worst:.4f} over {count} instances (need >= {E1:.4f}), {secs:.1f}s")


def lazy_equivalence(level="full") -> CriterionResult:
    count = _count(100, level)
    same = fewer = not_more = 0
    for s in range(count):
        rng = np.random.default_rng(1000 + s)
        n, k = int(rng.integers(20, 41)), int(rng.integers(3, 9))
        a = random_coverage(n, 40, rng, density=0.1)
        b = CoverageFunction(a.cover_sets, 40)
        same += standard_greedy(a, k).members == lazy_greedy(b, k).members
        not_more += b.query_count <= a.query_count
        fewer += b.query_count < a.query_count
    ok = same == count and not_more == count and fewer >= 0.9 * count
    return CriterionResult(2, "lazy greedy equivalence", ok,
                           f"{same}/{count} identical, {not_more} not more queries, {fewer} strictly fewer")


def threshold_queries(level="full") -> CriterionResult:
    parts, ok = [], True
    for n in (64, 256, 1024):
        f = random_coverage(n, n, n, density=4 / n)
        threshold_greedy(f, n // 4, 0.2)
        bound = 3 * (n / 0.2) * math.log(n / 0.2)
        ok &= f.query_count <= bound
        parts.append(f"n={n}: {f.query_count} <= {bound:.0f}")
    return CriterionResult(3, "threshold greedy query bound", ok, "; ".join(parts))


def _planted_traces(count: int):
    """MWU traces on planted instances, with an empty and a two-element filter set."""
    solver = SolverConfig("standard_greedy")
    out = []
    for s in range(count):
        m = 4 if s % 2 == 0 else 10
        inst, s_star = planted_instance(64, m, 8, rng_seed=s)
        fixed = [] if s % 4 < 2 else list(s_star)[:2]
        out.append((inst, mwu_stage2(inst, fixed, MwuConfig(delta=0.2), solver)))
    return out


def round_value_bound(level="full", traces=None) -> CriterionResult:
    traces = traces or _planted_traces(_count(20, level))
    worst, rounds = math.inf, 0
    for _, tr in traces:
        lam = np.array(tr.weights[:-1]).sum(axis=1)
        slack = tr.g_values - tr.alpha * tr.budget / tr.k * lam
        worst = min(worst, float(slack.min()))
        rounds += tr.rounds
    return CriterionResult(4, "per-round weighted value", worst >= -1e-9,
                           f"min slack {worst:.4g} over {rounds} rounds in {len(traces)} traces")


def average_value_bound(level="full", traces=None) -> CriterionResult:
    traces = traces or _planted_traces(_count(20, level))
    worst = math.inf
    for _, tr in traces:
        need = tr.budget / tr.k * E1 - tr.delta
        avg = tr.average_values()[tr.active]
        worst = min(worst, float((avg - need).min()))
    return CriterionResult(5, "average scaled value", worst >= -TOL,
                           f"min margin {worst:.4f} over {len(traces)} traces")


def averaged_point_bound(level="full", traces=None) -> CriterionResult:
    traces = traces or _planted_traces(_count(20, level))
    cfg = EstimatorConfig(100_000, rng_seed=7)
    worst = math.inf
    for inst, tr in traces:
        for f in inst.oracles:
            avg = np.mean([f.eval(X) for X in tr.sets])
            est = estimate_multilinear(f, tr.mean_point, cfg)
            worst = min(worst, (est.value + 3 * est.stderr - E1 * avg) / max(avg, TOL))
    return CriterionResult(6, "averaged point keeps value", worst >= 0,
                           f"min relative margin {worst:.4f} over {len(traces)} traces")


def concavity(level="full") -> CriterionResult:
    count = _count(50, level)
    passed = 0
    for s in range(count):
        rng = np.random.default_rng(5000 + s)
        n = int(rng.integers(5, 21))
        f = random_coverage(n, 30, rng, density=0.15)
        x = FractionalPoint(rng.random(n))
        theta = float(rng.uniform(0.05, 0.95))
        passed += concavity_check(f, x, theta, EstimatorConfig(100_000, rng_seed=s))
    return CriterionResult(7, "scaling a point down", passed == count, f"{passed}/{count} triples pass")


def swap_marginals(level="full") -> CriterionResult:
    rng = np.random.default_rng(2024)
    bases = [rng.choice(20, 6, replace=False).tolist() for _ in range(5)]
    w = rng.random(5) + 0.2
    comb = ConvexCombination([ElementSet(sorted(b), n=20) for b in bases], w / w.sum())
    target = comb.point(20).coords
    counts = np.zeros(20)
    sizes_ok = True
    draws = 10_000
    for s in range(draws):
        R = swap_round(comb, s)
        sizes_ok &= len(R) == 6
        counts[list(R)] += 1
    dev = float(np.abs(counts / draws - target).max())
    return CriterionResult(8, "swap rounding marginals", sizes_ok and dev <= 0.03,
                           f"max deviation {dev:.4f} (need <= 0.03), sizes {'ok' if sizes_ok else 'WRONG'}")


def subset_variation(level="full") -> CriterionResult:
    count, k = _count(30, level), 12
    passed = 0
    for s in range(count):
        inst, base_set = small_marginal_instance(k, 3, rng_seed=s)
        sizes = (math.ceil(k / 2), math.ceil(3 * k / 4))
        passed += all(check_subset_variation(inst, base_set, kp, 0.2)[0] for kp in sizes)
    return CriterionResult(9, "subsets keep proportional value", passed == count, f"{passed}/{count} instances")


def stage1_postcondition(level="full") -> CriterionResult:
    count = _count(50, level)
    passed = 0
    for s in range(count):
        rng = np.random.default_rng(9000 + s)
        n, m = int(rng.integers(20, 61)), int(rng.integers(2, 6))
        fs = [random_coverage(n, 40, rng, density=0.08) for _ in range(m)]
        targets = np.array([rng.uniform(0.3, 1.0) * f.eval(range(n)) for f in fs])
        inst = MultiObjectiveInstance(fs, n // 2, targets)
        eps = float(rng.uniform(0.2, 0.5))
        try:
            fixed, _ = stage1_filter(inst, eps)
        except Stage1Exhausted as exc:
            fixed = exc.filtered
        rest = [e for e in range(n) if e not in fixed]
        small = all(
            np.all(f.marginals(fixed, rest) < eps**3 * v) if rest else True
            for f, v in zip(_capped(inst), targets)
        )
        passed += small and len(fixed) <= m / eps**3
    return CriterionResult(10, "filter leaves only small marginals", passed == count,
                           f"{passed}/{count} instances")


def benchmark_trend(level="full", jobs=1, workdir=None) -> CriterionResult:
    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(workdir or tmp) / "bench"
        cfg = ExperimentConfig(n=64, m=10, k_values=[5, 10, 15, 20], trials=_count(30, level),
                               algorithms=["mwu", "saturate", "round_robin"], output_dir=str(out))
        cmd_gen(cfg)
        rows = read_results(cmd_run(cfg, jobs))
    means = mean_values(rows)
    ks = cfg.k_values
    over_rr = all(means[(64, 10, "mwu", k)] >= means[(64, 10, "round_robin", k)] for k in ks)
    over_sat = sum(means[(64, 10, "mwu", k)] >= means[(64, 10, "saturate", k)] for k in ks)
    secs = time.perf_counter() - start
    k_max, gain = max_gain_over_saturate(rows)[(64, 10)]
    table = ", ".join(
        f"k={k}: {means[(64, 10, 'mwu', k)]:.2f}/{means[(64, 10, 'saturate', k)]:.2f}/"
        f"{means[(64, 10, 'round_robin', k)]:.2f}" for k in ks
    )
    ok = over_rr and over_sat >= 0.75 * len(ks) and secs < 900
    detail = (f"mean mwu/saturate/round_robin {table}; max gain over saturate {gain:.2f}% at k={k_max} "
              f"(published {REFERENCE_GAINS[(64, 10)]:.2f}%, context only); {secs:.0f}s")
    return CriterionResult(11, "benchmark trend", ok, detail)


def determinism(level="full", jobs=8) -> CriterionResult:
    with tempfile.TemporaryDirectory() as tmp:
        base = dict(n=64, m=4, k_values=[3, 6], trials=_count(5, level) + 1, algorithms=list(
            ("mwu", "saturate", "round_robin", "convex_comb", "naive_min", "tuple_min")), master_seed=42,
            output_dir=tmp, record_millis=False)
        cfg = ExperimentConfig(**base)
        cmd_gen(cfg)
        runs = []
        for j in (1, 1, max(jobs, 2)):
            runs.append(cmd_run(cfg, j).read_bytes())
        timed = ExperimentConfig(**{**base, "record_millis": True})
        with_time = cmd_run(timed, 1).read_text()
    same = runs[0] == runs[1] == runs[2]
    strip = [_drop_millis(r.decode()) for r in (runs[0],)] + [_drop_millis(with_time)]
    return CriterionResult(12, "byte-identical reruns", same and strip[0] == strip[1],
                           f"jobs 1 vs 1 vs {max(jobs, 2)}: {'identical' if same else 'DIFFER'}; "
                           f"timed run matches outside millis: {strip[0] == strip[1]}")


def _drop_millis(text: str) -> list:
    rows = [r.split(",") for r in text.splitlines()]
    col = rows[0].index("millis")
    return [r[:col] + r[col + 1:] for r in rows]


def kronecker_edges(level="full") -> CriterionResult:
    inside = 0
    for s in range(30):
        g = kronecker_generate(6, 70_000 + s)
        mean, var = expected_edges(g.initiator, 6)
        inside += abs(g.n_edges - mean) <= 3 * math.sqrt(var) + TOL
    return CriterionResult(13, "Kronecker edge counts", inside >= 28, f"{inside}/30 within 3 sigma")


def run_all(level="full", jobs=1, echo=True) -> list[CriterionResult]:
    traces = _planted_traces(_count(20, level))
    checks = [
        lambda: greedy_guarantee(level),
        lambda: lazy_equivalence(level),
        lambda: threshold_queries(level),
        lambda: round_value_bound(level, traces),
        lambda: average_value_bound(level, traces),
        lambda: averaged_point_bound(level, traces),
        lambda: concavity(level),
        lambda: swap_marginals(level),
        lambda: subset_variation(level),
        lambda: stage1_postcondition(level),
        lambda: benchmark_trend(level, jobs),
        lambda: determinism(level, max(jobs, 8)),
        lambda: kronecker_edges(level),
    ]
    results = []
    for check in checks:
        r = check()
        results.append(r)
        if echo:
            print(r.line(), flush=True)
    return results
