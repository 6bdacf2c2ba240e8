"""Compiled forecaster loop.

This is the pull-by-pull inner loop of :func:`bandit_sim.policies.run_forecaster`
written for numba.  It consumes the caller's ``numpy.random.Generator`` exactly
like the pure-Python route (one uniform per pull, one Beta draw per arm per
Thompson decision, in slot order), and performs the same floating-point
operations in the same order, so both routes yield bit-identical traces.
"""

import math

import numba
import numpy as np

UCB1 = 0
MOSS = 1
THOMPSON = 2


@numba.njit(cache=True)
def forecast(means, pulls, succ, budget, policy, eta, moss_horizon, rng,
             mu_star, mu_rho, has_rho, acc, pos, grid, cp_star, cp_rho, log):
    n = pulls.shape[0]
    n_grid = grid.shape[0]
    logging = log.shape[0] > 0
    done = 0
    for i in range(n):
        done += pulls[i]
    for step in range(budget):
        # unpulled arms first, lowest slot (= lowest id) wins
        choice = -1
        for i in range(n):
            if pulls[i] == 0:
                choice = i
                break
        if choice < 0:
            best = -np.inf
            for i in range(n):
                u = pulls[i]
                if policy == UCB1:
                    score = succ[i] / u + eta * math.sqrt(2.0 * math.log(done) / u)
                elif policy == MOSS:
                    score = succ[i] / u + math.sqrt(max(0.0, math.log(moss_horizon / (n * u))) / u)
                else:
                    score = rng.beta(succ[i] + 1.0, (u - succ[i]) + 1.0)
                if score > best:
                    best = score
                    choice = i
        m = means[choice]
        if rng.random() < m:
            succ[choice] += 1
        pulls[choice] += 1
        done += 1
        if logging:
            log[step] = choice

        pos[0] += 1
        acc[0] += mu_star - m
        if has_rho:
            acc[1] += mu_rho - m
        k = pos[1]
        if k < n_grid and pos[0] == grid[k]:
            cp_star[k] = acc[0]
            cp_rho[k] = acc[1]
            pos[1] = k + 1
