# coding: utf-8

# # Bandits with a small arm memory
#
# A finite instance is just a vector of Bernoulli means.  The two benchmark
# families have one clearly best arm at 0.99 and differ in how crowded the
# runner-up arms are.

# %%

import numpy as np

from bandit_sim import FiniteInstance, Policy, RegretLedger, make_alpha_instance, make_linear_instance, run_ucbm

lin = make_linear_instance(100)
crowded = make_alpha_instance(100, 0.3)
print(lin.means[:4], lin.means[-1])
print(crowded.means[:4], crowded.means[-1])


# A run needs its own generator.  Philox is counter based, so the same seed
# always gives the same rewards, shuffle and Thompson draws.

# %%

rng = np.random.Generator(np.random.Philox(0))
res = run_ucbm(lin, 2, 100_000, Policy("ucb1"), rng)
print("regret after 1e5 pulls:", res.ledger.regret_star)
print("arms held at once:", res.max_occupancy)


# The trace keeps one record per sub-phase: which arms were in the window,
# how often each was pulled, and which one was carried forward.

# %%

for rec in res.trace[:5]:
    print(rec.w, rec.j, rec.window, rec.pulls, rec.a_hat)
print("sub-phases per phase:", res.h0, " phases started:", res.phases_started)


# Swapping the allocation rule is a one word change.

# %%

for kind in ("ucb1", "moss", "thompson"):
    led = RegretLedger(lin.mu_star, checkpoints=[10**4, 10**5])
    run_ucbm(lin, 2, 100_000, Policy(kind), np.random.Generator(np.random.Philox(1)), led)
    print(f"{kind:9s}", [round(c[1], 1) for c in led.checkpoints])


# A toy instance with one perfect arm makes the window mechanics easy to read.

# %%

toy = FiniteInstance.from_means([0.0, 0.0, 1.0, 0.0, 0.0])
res = run_ucbm(toy, 2, 400, Policy("ucb1"), np.random.Generator(np.random.Philox(3)))
for rec in res.trace:
    print(f"w={rec.w} j={rec.j} window={rec.window} pulls={rec.pulls} carry={rec.a_hat}")
