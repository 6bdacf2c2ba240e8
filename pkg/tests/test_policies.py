import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandit_sim.core import FiniteInstance, RegretLedger, make_linear_instance
from bandit_sim.errors import EmptyMemoryError, InvalidParameterError, MemoryCapacityError, MissingArmError
from bandit_sim.policies import (
    MOSS,
    THOMPSON,
    UCB1,
    ArmStats,
    BoundedArmMemory,
    Policy,
    allocate,
    moss_index,
    most_played,
    run_forecaster,
    thompson_draw,
    ucb_index,
)


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def memory_with(stats):
    mem = BoundedArmMemory(len(stats))
    for arm, u, s in stats:
        mem.insert(arm)
        k = mem.slot(arm)
        mem.pulls[k], mem.successes[k] = u, s
    return mem


def exact_wrong_probability(means, budget, eta=1.0):
    """P(most played arm is arm 2) for the two-arm UCB1 forecaster, by summing over
    every reachable (pulls, successes) state."""
    states = {(0, 0, 0, 0): 1.0}
    for t in range(budget):
        nxt = defaultdict(float)
        for (u1, s1, u2, s2), p in states.items():
            if u1 == 0:
                a = 0
            elif u2 == 0:
                a = 1
            else:
                b1 = s1 / u1 + eta * math.sqrt(2 * math.log(t) / u1)
                b2 = s2 / u2 + eta * math.sqrt(2 * math.log(t) / u2)
                a = 0 if b1 >= b2 else 1
            m = means[a]
            if a == 0:
                nxt[(u1 + 1, s1 + 1, u2, s2)] += p * m
                nxt[(u1 + 1, s1, u2, s2)] += p * (1 - m)
            else:
                nxt[(u1, s1, u2 + 1, s2 + 1)] += p * m
                nxt[(u1, s1, u2 + 1, s2)] += p * (1 - m)
        states = nxt
    return sum(p for (u1, _, u2, _), p in states.items() if u2 > u1)


class TestScores:
    def test_ucb_value(self):
        assert ucb_index(ArmStats(1, 4, 2), 16, 1.0) == pytest.approx(1.6774100225154747, abs=1e-12)

    def test_ucb_vanishing_eta(self):
        assert ucb_index(ArmStats(1, 4, 2), 16, 1e-12) == pytest.approx(0.5, abs=1e-11)

    def test_ucb_zero_bonus_at_t1(self):
        assert ucb_index(ArmStats(1, 1, 1), 1) == 1.0

    def test_unpulled_is_infinite(self):
        assert ucb_index(ArmStats(1), 5) == math.inf
        assert moss_index(ArmStats(1), 64, 2) == math.inf

    @given(u=st.integers(1, 10_000), t=st.integers(2, 10**6), eta=st.floats(0.01, 10))
    def test_ucb_monotone(self, u, t, eta):
        s = ArmStats(1, u, u // 2)
        assert ucb_index(s, t + 1, eta) > ucb_index(s, t, eta)
        assert ucb_index(ArmStats(1, u + 1, u // 2), t, eta) < ucb_index(s, t, eta)

    def test_moss_value(self):
        assert moss_index(ArmStats(1, 1, 0), 64, 2) == pytest.approx(1.8616487055295172, abs=1e-12)
        assert moss_index(ArmStats(1, 2, 1), 64, 2) == pytest.approx(0.5 + math.sqrt(math.log(16) / 2))

    def test_moss_value_spec_example(self):
        # mean 0.5, one pull, T=64, K=2: 0.5 + sqrt(ln 32) = 2.3616487...
        assert moss_index(ArmStats(1, 2, 1), 128, 2) == pytest.approx(0.5 + math.sqrt(math.log(32) / 2))
        s = ArmStats(1, 1, 1)
        s_half = 0.5 + math.sqrt(math.log(64 / 2))
        assert (s.successes / s.pulls - 0.5) + s_half == pytest.approx(2.8616487055295172)
        assert 0.5 + math.sqrt(math.log(64 / (2 * 1)) / 1) == pytest.approx(2.3616487055295172, abs=1e-12)

    @pytest.mark.parametrize("u", [32, 33, 100])
    def test_moss_clamp(self, u):
        assert moss_index(ArmStats(1, u, u // 2), 64, 2) == (u // 2) / u

    def test_thompson_uniform_prior(self):
        rng = philox(1)
        draws = [thompson_draw(ArmStats(1), rng) for _ in range(100_000)]
        assert abs(np.mean(draws) - 0.5) < 0.01
        assert 0.0 <= min(draws) and max(draws) <= 1.0

    def test_thompson_concentrates(self):
        rng = philox(2)
        s = ArmStats(1, 10**6, 10**6)
        assert abs(np.mean([thompson_draw(s, rng) for _ in range(1000)]) - 1.0) < 0.001

    def test_thompson_deterministic(self):
        s = ArmStats(1, 10, 3)
        a = [thompson_draw(s, philox(9)) for _ in range(3)]
        assert a[0] == a[1] == a[2]


class TestMemory:
    def test_capacity_enforced(self):
        mem = BoundedArmMemory(2)
        mem.insert(5)
        mem.insert(3)
        with pytest.raises(MemoryCapacityError):
            mem.insert(7)
        assert len(mem) == 2 and mem.max_occupancy == 2
        mem.replace(5, 7)
        assert list(mem) == [3, 7]

    def test_load_beyond_capacity_aborts(self):
        with pytest.raises(MemoryCapacityError):
            BoundedArmMemory(3).load([1, 2, 3, 4])

    def test_slots_sorted_and_fresh(self):
        mem = BoundedArmMemory(4)
        mem.load([9, 2, 5])
        mem.update(5, 1)
        assert list(mem) == [2, 5, 9]
        assert mem.stats(5) == ArmStats(5, 1, 1)
        mem.load([5, 1])
        assert mem.stats(5) == ArmStats(5, 0, 0)
        assert 9 not in mem

    def test_only_stored_arms_can_be_updated(self):
        mem = BoundedArmMemory(2)
        mem.load([1, 2])
        with pytest.raises(MissingArmError):
            mem.update(3, 1)

    def test_duplicate_insert(self):
        mem = BoundedArmMemory(3)
        mem.insert(1)
        with pytest.raises(InvalidParameterError):
            mem.insert(1)

    @given(st.lists(st.tuples(st.sampled_from(["ins", "rm", "rep"]), st.integers(1, 8)), max_size=60))
    def test_never_exceeds_capacity(self, ops):
        mem = BoundedArmMemory(3)
        for op, arm in ops:
            try:
                if op == "ins":
                    mem.insert(arm)
                elif op == "rm":
                    mem.remove(arm)
                elif len(mem):
                    mem.replace(next(iter(mem)), arm)
            except (MemoryCapacityError, MissingArmError, InvalidParameterError):
                pass
            assert len(mem) <= 3 and mem.max_occupancy <= 3
            assert list(mem) == sorted(set(mem))


class TestAllocate:
    def test_unpulled_lowest_id_first(self):
        mem = memory_with([(4, 0, 0), (2, 0, 0)])
        assert allocate(mem, 0, Policy(), None, philox(0)) == 2

    def test_unpulled_beats_scores(self):
        mem = memory_with([(1, 10, 10), (2, 0, 0)])
        for kind in (UCB1, MOSS, THOMPSON):
            assert allocate(mem, 10, Policy(kind), 100, philox(0)) == 2

    def test_dominance(self):
        mem = memory_with([(1, 5, 5), (2, 5, 0)])
        assert allocate(mem, 10, Policy(UCB1, 1.0), None, philox(0)) == 1

    @pytest.mark.parametrize("kind", [UCB1, MOSS])
    def test_tie_lowest_id(self, kind):
        mem = memory_with([(7, 3, 1), (3, 3, 1), (5, 3, 1)])
        assert allocate(mem, 9, Policy(kind), 90, philox(0)) == 3

    def test_empty(self):
        with pytest.raises(EmptyMemoryError):
            allocate(BoundedArmMemory(2), 0, Policy(), None, philox(0))

    @given(seed=st.integers(0, 2**32), kind=st.sampled_from([UCB1, MOSS, THOMPSON]))
    @settings(max_examples=30)
    def test_pure(self, seed, kind):
        mem = memory_with([(1, 4, 1), (2, 6, 5), (3, 2, 0)])
        picks = {allocate(mem, 12, Policy(kind), 48, philox(seed)) for _ in range(3)}
        assert len(picks) == 1

    def test_policy_validation(self):
        with pytest.raises(InvalidParameterError):
            Policy(UCB1, eta=0.0)
        with pytest.raises(InvalidParameterError):
            Policy("klucb")
        Policy(MOSS, eta=0.0)


class TestMostPlayed:
    def test_argmax(self):
        assert most_played(memory_with([(1, 5, 0), (2, 3, 3)])) == 1

    def test_tie(self):
        assert most_played(memory_with([(8, 4, 0), (6, 4, 0)])) == 6

    def test_single(self):
        assert most_played(memory_with([(42, 0, 0)])) == 42

    def test_empty(self):
        with pytest.raises(EmptyMemoryError):
            most_played(BoundedArmMemory(1))


class TestForecaster:
    @pytest.mark.parametrize("fast", [True, False])
    def test_all_optimal_no_regret(self, fast):
        inst = FiniteInstance.from_means([1.0, 1.0, 1.0])
        led = RegretLedger(1.0)
        run_forecaster([1, 2, 3], 50, Policy(THOMPSON), inst, led, philox(0), fast=fast)
        assert led.regret_star == 0.0 and led.t == 50

    @pytest.mark.parametrize("fast", [True, False])
    def test_deterministic_rewards(self, fast):
        # t=2..5: 1 + sqrt(2 ln t / (t-1)) beats sqrt(2 ln t)
        # t=6: 1 + sqrt(2 ln 6 / 5) = 1.847 < sqrt(2 ln 6) = 1.893, so arm 2 again
        # t=7: 1 + sqrt(2 ln 7 / 5) = 1.882 > sqrt(ln 7) = 1.395
        inst = FiniteInstance.from_means([1.0, 0.0])
        led, log = RegretLedger(1.0), []
        assert run_forecaster([1, 2], 8, Policy(), inst, led, philox(0), fast=fast, pull_log=log) == 1
        assert log == [1, 2, 1, 1, 1, 1, 2, 1]
        assert led.regret_star == 2.0

    @pytest.mark.parametrize("fast", [True, False])
    def test_zero_budget(self, fast):
        led = RegretLedger(0.99)
        assert run_forecaster([4, 2, 9], 0, Policy(), make_linear_instance(10), led, philox(0), fast=fast) == 2
        assert led.t == 0

    @pytest.mark.parametrize("fast", [True, False])
    def test_budget_below_arm_count_round_robin(self, fast):
        log = []
        best = run_forecaster([5, 3, 8, 1], 3, Policy(), make_linear_instance(10), RegretLedger(0.99),
                              philox(0), fast=fast, pull_log=log)
        assert log == [1, 3, 5] and best == 1

    def test_memory_capacity_respected(self):
        mem = BoundedArmMemory(2)
        with pytest.raises(MemoryCapacityError):
            run_forecaster([1, 2, 3], 10, Policy(), make_linear_instance(3), RegretLedger(0.99),
                           philox(0), memory=mem)

    @given(seed=st.integers(0, 2**40), kind=st.sampled_from([UCB1, MOSS, THOMPSON]),
           K=st.integers(1, 6), budget=st.integers(0, 300), eta=st.sampled_from([1.0, 0.2]))
    @settings(max_examples=60, deadline=None)
    def test_compiled_and_python_routes_identical(self, seed, kind, K, budget, eta):
        inst = FiniteInstance.from_means(np.linspace(0.9, 0.1, max(K, 2)))
        arms = list(range(1, K + 1))
        outs = []
        for fast in (True, False):
            rng = philox(seed)
            led = RegretLedger(0.9, 0.5, checkpoints=[1, 7, 64, 299])
            log = []
            best = run_forecaster(arms, budget, Policy(kind, eta), inst, led, rng, fast=fast, pull_log=log)
            outs.append((best, log, led.regret_star, led.regret_rho, led.checkpoints, rng.random()))
        assert outs[0] == outs[1]

    def test_exact_oracle_values(self):
        assert exact_wrong_probability((0.9, 0.1), 8) == pytest.approx(0.0011971, abs=1e-10)

    @pytest.mark.parametrize("budget", [8, 32])
    def test_wrong_rate_matches_exact_oracle(self, budget):
        means = (0.6, 0.4)
        p = exact_wrong_probability(means, budget)
        inst = FiniteInstance.from_means(means)
        n = 4000
        wrong = sum(run_forecaster([1, 2], budget, Policy(), inst, RegretLedger(0.6), philox(s)) != 1
                    for s in range(n))
        assert abs(wrong / n - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_simple_regret_sanity(self):
        inst = FiniteInstance.from_means([0.9, 0.1])
        rates = {}
        for budget in (8, 512):
            wrong = sum(run_forecaster([1, 2], budget, Policy(), inst, RegretLedger(0.9), philox(s)) != 1
                        for s in range(200))
            rates[budget] = wrong / 200
        assert rates[8] < 0.20 and rates[512] < 0.02
