# coding: utf-8

# # How much does extra memory buy?
#
# Same 100-arm instance, growing arm memory.  With M = 100 the memory limit is
# gone and UCB-M falls back to plain UCB1 on all arms.

# %%

import numpy as np

from bandit_sim.harness import RunConfig, run_experiment

horizon, runs = 200_000, 10

for M in (2, 5, 10, 20, 50, 100):
    row = []
    for algo, eta in (("ucbm", 1.0), ("ucbm", 0.2), ("tsm", 1.0), ("mossm", 1.0)):
        agg = run_experiment(RunConfig("B100L", algo, M, horizon, runs=runs, eta=eta)).aggregate
        row.append(f"{algo}{'' if eta == 1 else '(eta=.2)'}={agg.mean:9.1f}±{agg.se:6.1f}")
    print(f"M={M:3d}  " + "  ".join(row))


# A smaller exploration weight helps UCB1 here.  That is a statement about these
# Bernoulli means, not a guarantee.

# Per-checkpoint regret is kept for every run, so growth curves come for free.

# %%

exp = run_experiment(RunConfig("B100L", "tsm", 2, horizon, runs=runs))
for t in (1000, 8000, 64000, horizon):
    print(t, exp.regret_at(t).mean().round(1))
