import csv
import json

import numpy as np
import pytest

from multisub import ElementSet, acceptance, load_instance
from multisub.bench import (
    BASE_COLUMNS,
    ExperimentConfig,
    UsageError,
    cmd_gen,
    cmd_plot,
    cmd_run,
    derive_seed,
    difference_table,
    main,
    read_results,
)


def small(tmp_path, **kw):
    doc = dict(n=16, m=3, k_values=[2], trials=1, algorithms=["round_robin"], output_dir=str(tmp_path),
               record_millis=False)
    doc.update(kw)
    return ExperimentConfig(**doc)


def test_gen_counts_and_round_trip(tmp_path):
    cfg = small(tmp_path, n=64, m=10, trials=2)
    files = cmd_gen(cfg)
    assert len(list((tmp_path / "graphs").iterdir())) == 20
    assert len(list((tmp_path / "instances").iterdir())) == 2
    inst = load_instance(tmp_path / "instances" / "trial000.json")
    assert inst.n == 64 and inst.m == 10
    first = {p.name: p.read_bytes() for p in files}
    cmd_gen(cfg)
    assert {p.name: p.read_bytes() for p in files} == first


def test_seed_derivation_separates_labels():
    a = derive_seed(1, "run", "mwu", 5, 0)
    assert a == derive_seed(1, "run", "mwu", 5, 0)
    assert len({a, derive_seed(1, "run", "saturate", 5, 0), derive_seed(2, "run", "mwu", 5, 0)}) == 3
    assert 0 <= a < 2**64


def test_run_single_row(tmp_path):
    cfg = small(tmp_path)
    cmd_gen(cfg)
    text = cmd_run(cfg).read_text()
    lines = text.splitlines()
    assert lines[0] == "algorithm,n,m,k,trial,value,queries,millis,seed,v0,v1,v2"
    assert len(lines) == 2
    row = next(csv.DictReader(lines))
    assert float(row["value"]) == min(float(row[f"v{i}"]) for i in range(3))
    assert int(row["queries"]) > 0


def test_run_all_algorithms(tmp_path):
    algs = ["mwu", "saturate", "round_robin", "convex_comb", "naive_min", "tuple_min"]
    cfg = small(tmp_path, k_values=[2, 4], trials=2, algorithms=algs, search_iters=4)
    cmd_gen(cfg)
    rows = read_results(cmd_run(cfg))
    assert len(rows) == len(algs) * 2 * 2
    for r in rows:
        per = [float(r[f"v{i}"]) for i in range(3)]
        assert r["value"] == min(per) and r["queries"] > 0
    keys = [(r["algorithm"], r["k"], r["trial"]) for r in rows]
    assert keys == sorted(keys)


def test_missing_instances(tmp_path):
    with pytest.raises(UsageError):
        cmd_run(small(tmp_path))


def test_config_validation(tmp_path):
    with pytest.raises(UsageError):
        ExperimentConfig.from_dict({"n": 64, "colour": "red"})
    for bad in (dict(n=60), dict(k_values=[10, 5]), dict(algorithms=["magic"]), dict(trials=0)):
        with pytest.raises(UsageError):
            ExperimentConfig(**bad)


def test_plot_self_difference(tmp_path):
    cfg = small(tmp_path, trials=3, k_values=[1, 2], algorithms=["round_robin", "convex_comb"])
    cmd_gen(cfg)
    rows = read_results(cmd_run(cfg))
    table = difference_table(rows)[(16, 3)]
    assert all(mean == 0 and se == 0 for _, mean, se in table["round_robin"])
    written = cmd_plot(tmp_path / "results.csv", tmp_path / "plots")
    svg = written[0].read_bytes()
    cmd_plot(tmp_path / "results.csv", tmp_path / "plots")
    assert written[0].read_bytes() == svg  # pure function of the CSV


def test_identical_records_overlay():
    rows = []
    for alg in ("round_robin", "a", "b"):
        for t, v in enumerate((3.0, 5.0, 4.0)):
            rows.append({"algorithm": alg, "n": 8, "m": 1, "k": 2, "trial": t,
                         "value": v + (alg != "round_robin")})
    table = difference_table(rows)[(8, 1)]
    assert table["a"] == table["b"] == [(2, 1.0, 0.0)]


def test_cli_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps({"n": 16, "m": 2, "k_values": [2], "trials": 1,
                                    "algorithms": ["round_robin", "saturate"], "record_millis": False}))
    out = tmp_path / "out"
    assert main(["gen", "--config", str(cfg_path), "--out", str(out), "--seed", "7"]) == 0
    assert main(["run", "--config", str(cfg_path), "--out", str(out), "--seed", "7", "--jobs", "2"]) == 0
    assert main(["plot", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "plots" / "diff_n16_m2.svg").exists()
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "empty")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["run", "--jobs", "0"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 16, "unknown": 1}')
    assert main(["gen", "--config", str(bad)]) == 2


def test_verify_exit_code(monkeypatch):
    ok = acceptance.CriterionResult(1, "x", True, "")
    monkeypatch.setattr(acceptance, "run_all", lambda level, jobs: [ok])
    assert main(["verify", "--level", "fast"]) == 0
    bad = acceptance.CriterionResult(2, "y", False, "")
    monkeypatch.setattr(acceptance, "run_all", lambda level, jobs: [ok, bad])
    assert main(["verify"]) == 1


def test_inverted_swap_probability_is_caught(monkeypatch):
    def inverted(comb, rng_seed=0):
        rng = np.random.default_rng(rng_seed)
        current, w = set(comb.bases[0]), float(comb.weights[0])
        for base, theta in zip(comb.bases[1:], comb.weights[1:]):
            for i, j in zip(sorted(current - set(base)), sorted(set(base) - current)):
                if rng.random() < w / (w + theta):  # the running base should keep i here
                    current.discard(i)
                    current.add(j)
            w += theta
        return ElementSet(sorted(current), n=comb.bases[0].n)

    assert acceptance.swap_marginals().passed
    monkeypatch.setattr(acceptance, "swap_round", inverted)
    assert not acceptance.swap_marginals().passed
