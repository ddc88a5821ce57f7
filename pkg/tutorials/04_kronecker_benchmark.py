# ## Kronecker max-cover benchmark
#
# The same pipeline the command-line harness runs, driven from Python on a
# small configuration.

import tempfile
from pathlib import Path

import multisub as ms
from multisub.bench import ExperimentConfig, cmd_gen, cmd_plot, cmd_run, read_results
from multisub.instances import expected_edges

# ### One random graph

g = ms.kronecker_generate(6, rng_seed=3)
g.initiator.array, g.n_edges, expected_edges(g.initiator, 6)

# Each vertex covers itself and its neighbours.

f, = ms.max_cover_objectives([g])
f.eval([0]), f.eval(range(64))

# ### A small sweep

out = Path(tempfile.mkdtemp()) / "bench"
cfg = ExperimentConfig(n=64, m=5, k_values=[4, 8], trials=3,
                       algorithms=["mwu", "saturate", "round_robin"], output_dir=str(out))
cmd_gen(cfg)
results = cmd_run(cfg)
print(results.read_text()[:400])

# Mean value per algorithm and k.

rows = read_results(results)
{(a, k): sum(r["value"] for r in rows if r["algorithm"] == a and r["k"] == k) / cfg.trials
 for a in cfg.algorithms for k in cfg.k_values}

# Difference plots against round-robin, plus the gain summary.

cmd_plot(results, out / "plots")
