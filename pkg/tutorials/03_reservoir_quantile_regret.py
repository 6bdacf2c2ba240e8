# coding: utf-8

# # Infinitely many arms
#
# Reservoir instances draw a fresh arm mean from a scaled Beta prior whenever
# a new arm is asked for.  QRM-UCB-M doubles its round horizon and grows the
# sampled arm set as ceil(t_r ** alpha), re-running UCB-M each round.

# %%

import numpy as np

from bandit_sim import Policy, RegretLedger, make_reservoir, quantile_mu_rho, qrm_schedule, run_qrm

for r in range(1, 6):
    print("round", r, "(B, t_r, n_r) =", qrm_schedule(0.347, 2, r))


# mu_rho is the level only a rho fraction of arms beat.  Regret against it can
# go negative once the algorithm settles on an arm above that level.

# %%

res_ = make_reservoir("I2")
for rho in (0.05, 0.1, 0.5):
    print(rho, quantile_mu_rho(res_, rho))

mu_rho = quantile_mu_rho(res_, 0.05)
led = RegretLedger(res_.mu_star, mu_rho, checkpoints=[10**4, 10**5, 10**6])
out = run_qrm(res_, 2, 10**6, 0.347, Policy("ucb1"), np.random.Generator(np.random.Philox(0)), led)
for t, star, rho in led.checkpoints:
    print(f"t={t:8d} regret={star:10.1f} quantile regret={rho:10.1f}")


# Each round adds arms and keeps the old ones with their hidden means.

# %%

for rec in out.rounds:
    print(rec.r, rec.used, rec.n_r, len(rec.new_arms), round(rec.regret_star, 1))
print("most arms held at once:", out.max_occupancy)
