"""Benchmark harness: generate Kronecker max-cover instances, run the algorithm
suite over seeds, write a CSV and difference plots.

    multisub-bench gen  --config exp.json
    multisub-bench run  --config exp.json --jobs 8
    multisub-bench plot --config exp.json
    multisub-bench verify --level fast

Exit codes: 0 success, 1 failed acceptance criterion, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .instances import (
    MultiObjectiveInstance,
    dumps,
    kronecker_generate,
    load_instance,
    max_cover_objectives,
    save_instance,
)
from .multiobjective import (
    MwuConfig,
    convex_combination_greedy,
    naive_min_greedy,
    round_robin_greedy,
    saturate_with_search,
    solve_max_min,
    tuple_min_greedy,
)

ALGORITHMS = ("mwu", "saturate", "round_robin", "convex_comb", "naive_min", "tuple_min")
BASE_COLUMNS = ["algorithm", "n", "m", "k", "trial", "value", "queries", "millis", "seed"]

# Published max gains of MWU over SATURATE, keyed by (n, m). Context only:
# the initiators there were drawn independently of ours.
REFERENCE_GAINS = {
    (64, 10): 9.80, (64, 50): 12.14, (64, 100): 16.12,
    (512, 10): 7.95, (512, 50): 10.08, (512, 100): 10.01,
    (1024, 10): 6.89, (1024, 50): 5.02, (1024, 100): 7.4,
}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    n: int = 64
    m: int = 10
    k_values: list = field(default_factory=lambda: [5, 10, 15, 20])
    trials: int = 30
    algorithms: list = field(default_factory=lambda: ["mwu", "saturate", "round_robin"])
    delta: float = 0.2
    search_iters: int = 12
    master_seed: int = 0
    output_dir: str = "results"
    tuple_size: int = 2
    record_millis: bool = True  # False writes 0 so reruns are byte-identical

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1) or self.n > 4096:
            raise UsageError("n must be a power of two in [2, 4096]")
        if self.m < 1 or self.trials < 1 or self.search_iters < 1:
            raise UsageError("m, trials and search_iters must be positive")
        if not self.k_values or list(self.k_values) != sorted(self.k_values):
            raise UsageError("k_values must be a non-empty ascending list")
        if self.k_values[0] < 1 or self.k_values[-1] > self.n:
            raise UsageError("every k must lie in [1, n]")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown or not self.algorithms:
            raise UsageError(f"unknown algorithms {sorted(unknown)}; choose from {ALGORITHMS}")
        if not 0 < self.delta <= 0.5:
            raise UsageError("delta must lie in (0, 0.5]")
        if not 0 <= self.master_seed < 2**64:
            raise UsageError("master_seed must be an unsigned 64-bit integer")

    @property
    def power(self) -> int:
        return int(math.log2(self.n))

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


def derive_seed(master: int, *labels) -> int:
    """64-bit seed from the master seed and a tuple of labels."""
    key = "/".join(str(x) for x in (master, *labels)).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def graph_path(out: Path, trial: int, obj: int) -> Path:
    return out / "graphs" / f"trial{trial:03d}_obj{obj:03d}.json"


def instance_path(out: Path, trial: int) -> Path:
    return out / "instances" / f"trial{trial:03d}.json"


# gen -------------------------------------------------------------------------


def cmd_gen(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.output_dir)
    try:
        (out / "graphs").mkdir(parents=True, exist_ok=True)
        (out / "instances").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc}") from exc
    written = []
    for t in range(cfg.trials):
        graphs = []
        for i in range(cfg.m):
            g = kronecker_generate(cfg.power, derive_seed(cfg.master_seed, "graph", t, i))
            graphs.append(g)
            p = graph_path(out, t, i)
            p.write_text(dumps(g.to_dict()))
            written.append(p)
        prov = {
            "generator": "kronecker",
            "power": cfg.power,
            "trial": t,
            "master_seed": cfg.master_seed,
            "graph_seeds": [g.seed for g in graphs],
            "initiators": [[list(r) for r in g.initiator.entries] for g in graphs],
        }
        inst = MultiObjectiveInstance(max_cover_objectives(graphs), cfg.k_values[-1], provenance=prov)
        p = instance_path(out, t)
        save_instance(inst, p)
        written.append(p)
    return written


# run -------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _load(path: str) -> MultiObjectiveInstance:
    return load_instance(path)


def run_algorithm(name: str, inst: MultiObjectiveInstance, cfg: ExperimentConfig, seed: int):
    if name == "mwu":
        return solve_max_min(inst, MwuConfig.benchmark(cfg.delta), iters=cfg.search_iters, rng_seed=seed)[0]
    if name == "saturate":
        return saturate_with_search(inst, cfg.search_iters)
    if name == "round_robin":
        return round_robin_greedy(inst)
    if name == "convex_comb":
        return convex_combination_greedy(inst)
    if name == "naive_min":
        return naive_min_greedy(inst)
    return tuple_min_greedy(inst, min(cfg.tuple_size, inst.k), budget=max(40**3, inst.n**cfg.tuple_size))


def _run_task(task):
    cfg_doc, name, k, trial = task
    cfg = ExperimentConfig(**cfg_doc)
    inst = _load(str(instance_path(Path(cfg.output_dir), trial))).with_k(k)
    seed = derive_seed(cfg.master_seed, "run", name, k, trial)
    before = inst.query_count()
    start = time.perf_counter()
    S = run_algorithm(name, inst, cfg, seed)
    millis = int(round((time.perf_counter() - start) * 1000)) if cfg.record_millis else 0
    queries = inst.query_count() - before
    per = inst.values(S)  # evaluated after the counter snapshot
    return {
        "algorithm": name,
        "n": inst.n,
        "m": inst.m,
        "k": k,
        "trial": trial,
        "value": float(per.min()),
        "queries": queries,
        "millis": millis,
        "seed": seed,
        "per_objective": [float(v) for v in per],
    }


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def records_to_csv(records: list[dict], m: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BASE_COLUMNS + [f"v{i}" for i in range(m)])
    for r in records:
        w.writerow(
            [r["algorithm"], r["n"], r["m"], r["k"], r["trial"], _fmt(r["value"]), r["queries"],
             r["millis"], r["seed"]] + [_fmt(v) for v in r["per_objective"]]
        )
    return buf.getvalue()


def cmd_run(cfg: ExperimentConfig, jobs: int = 1) -> Path:
    out = Path(cfg.output_dir)
    missing = [instance_path(out, t) for t in range(cfg.trials) if not instance_path(out, t).exists()]
    if missing:
        raise UsageError(f"missing instance files, run gen first: {missing[0]}")
    doc = asdict(cfg)
    tasks = [(doc, a, k, t) for t in range(cfg.trials) for k in cfg.k_values for a in cfg.algorithms]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (r["algorithm"], r["k"], r["trial"]))
    path = out / "results.csv"
    path.write_text(records_to_csv(records, cfg.m))
    return path


# plot ------------------------------------------------------------------------


def read_results(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not rows or any(c not in rows[0] for c in BASE_COLUMNS):
        raise UsageError(f"{path} is not a results CSV")
    try:
        for r in rows:
            for c in ("n", "m", "k", "trial", "queries", "millis"):
                r[c] = int(r[c])
            r["value"] = float(r["value"])
    except ValueError as exc:
        raise UsageError(f"malformed row in {path}: {exc}") from exc
    return rows


def difference_table(rows: list[dict], baseline: str = "round_robin") -> dict:
    """``{(n, m): {alg: [(k, mean, stderr), ...]}}`` of per-trial differences to the baseline."""
    base = {(r["n"], r["m"], r["k"], r["trial"]): r["value"] for r in rows if r["algorithm"] == baseline}
    if not base:
        raise UsageError(f"results contain no {baseline} rows")
    diffs: dict = {}
    for r in rows:
        key = (r["n"], r["m"], r["k"], r["trial"])
        if key in base:
            diffs.setdefault((r["n"], r["m"]), {}).setdefault(r["algorithm"], {}).setdefault(
                r["k"], []).append(r["value"] - base[key])
    table = {}
    for nm, per_alg in diffs.items():
        table[nm] = {}
        for alg, per_k in per_alg.items():
            pts = []
            for k in sorted(per_k):
                d = np.array(per_k[k])
                se = d.std(ddof=1) / np.sqrt(len(d)) if len(d) > 1 else 0.0
                pts.append((k, float(d.mean()), float(se)))
            table[nm][alg] = pts
    return table


def mean_values(rows: list[dict]) -> dict:
    """``{(n, m, alg, k): mean value}``."""
    acc: dict = {}
    for r in rows:
        acc.setdefault((r["n"], r["m"], r["algorithm"], r["k"]), []).append(r["value"])
    return {key: float(np.mean(v)) for key, v in acc.items()}


def max_gain_over_saturate(rows: list[dict]) -> dict:
    """``{(n, m): (k, percent)}``: largest gain of mean MWU over mean SATURATE."""
    means = mean_values(rows)
    out = {}
    for (n, m, alg, k), v in means.items():
        s = means.get((n, m, "saturate", k))
        if alg != "mwu" or not s:
            continue
        gain = 100 * (v - s) / s
        if (n, m) not in out or gain > out[(n, m)][1]:
            out[(n, m)] = (k, gain)
    return out


def cmd_plot(results_csv, out_dir) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "multisub"
    rows = read_results(results_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (n, m), per_alg in sorted(difference_table(rows).items()):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for alg in sorted(per_alg):
            k, mean, se = map(np.array, zip(*per_alg[alg]))
            ax.plot(k, mean, marker="o", label=alg)
            ax.fill_between(k, mean - se, mean + se, alpha=0.2)
        ax.axhline(0, color="grey", lw=0.5)
        ax.set_xlabel("k")
        ax.set_ylabel("vertices covered minus round_robin")
        ax.set_title(f"n={n}, m={m}")
        ax.legend()
        fig.tight_layout()
        p = out_dir / f"diff_n{n}_m{m}.svg"
        fig.savefig(p, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(p)

    lines = ["n,m,k_at_max,max_gain_pct,reference_pct"]
    for (n, m), (k, gain) in sorted(max_gain_over_saturate(rows).items()):
        ref = REFERENCE_GAINS.get((n, m))
        lines.append(f"{n},{m},{k},{gain:.2f},{'' if ref is None else f'{ref:.2f}'}")
    p = out_dir / "summary.csv"
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    print("\n".join(lines))
    return written


# entry point -----------------------------------------------------------------


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multisub-bench", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("gen", "run", "plot", "verify"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--seed", type=_u64, help="override master_seed")
        p.add_argument("--out", type=Path, help="override output_dir")
        p.add_argument("--jobs", type=_positive, default=1)
        p.add_argument("--level", choices=("fast", "full"), default="fast")
    return parser


def _config(args) -> ExperimentConfig:
    doc = {}
    if args.config is not None:
        doc = asdict(ExperimentConfig.load(args.config))
    if args.seed is not None:
        doc["master_seed"] = args.seed
    if args.out is not None:
        doc["output_dir"] = str(args.out)
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "verify":
            from .acceptance import run_all

            results = run_all(level=args.level, jobs=args.jobs)
            return 0 if all(r.passed for r in results) else 1
        cfg = _config(args)
        if args.command == "gen":
            print(f"wrote {len(cmd_gen(cfg))} files under {cfg.output_dir}")
        elif args.command == "run":
            print(f"wrote {cmd_run(cfg, args.jobs)}")
        else:
            out = Path(cfg.output_dir)
            for p in cmd_plot(out / "results.csv", out / "plots"):
                print(f"wrote {p}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
