# coding: utf-8

# # Schedule and bound quantities
#
# The closed forms used by the tests.  Bound constants are set to 1, so only
# shapes and ratios mean anything.

# %%

import math

from bandit_sim import oracles

print("sub-phases per phase, K=100 M=2:", oracles.h0(100, 2))
print("phase bound, T=1e6:", oracles.x0(100, 2, 10**6))

rep = oracles.finite_regret_bound(100, 2, 10**6)
print(rep.terms, rep.bound_value)
print("growth on doubling T:",
      oracles.finite_regret_bound(100, 2, 2 * 10**6).bound_value / rep.bound_value)


# The constant gamma maximises log(log x)/log x.  Calculus puts the maximiser
# at log x = e, which gives 1/(e ln 2).

# %%

g = oracles.gamma_constant()
print(g, 1 / (math.e * math.log(2)))


# From round r* on, the sampled arm set should be large enough that the top
# rho fraction is hit with high probability.

# %%

from bandit_sim.qrm import qrm_schedule

rho, alpha = 0.1, 0.347
B = qrm_schedule(alpha, 2, 1)[0]
start = oracles.r_star(rho, alpha, B)
for r in range(start, start + 4):
    _, t_r, n_r = qrm_schedule(alpha, 2, r)
    print(r, n_r, oracles.arm_set_lower_bound(rho, alpha, t_r), oracles.pr_empty(rho, n_r))
