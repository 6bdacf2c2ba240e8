"""Index policies, the bounded arm memory, and the UCB-MPA style forecaster.

A forecaster alternates an *allocation* step (which in-memory arm to pull) with
a *recommendation* step (the most played arm).  Allocation supports three
scores: UCB1 with a tunable exploration weight ``eta``, MOSS, and Bernoulli
Thompson sampling.  Ties are always broken towards the lowest arm id, and arms
that were never pulled are pulled first, in id order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, MutableSequence

import numpy as np

from . import _kernels
from .core import ArmId, RegretLedger, Source, pull
from .errors import EmptyMemoryError, InvalidParameterError, MemoryCapacityError, MissingArmError

UCB1 = "ucb1"
MOSS = "moss"
THOMPSON = "thompson"

_POLICY_CODES = {UCB1: _kernels.UCB1, MOSS: _kernels.MOSS, THOMPSON: _kernels.THOMPSON}


@dataclass(frozen=True)
class Policy:
    """Allocation strategy tag. ``eta`` only affects UCB1."""

    kind: str = UCB1
    eta: float = 1.0

    def __post_init__(self):
        if self.kind not in _POLICY_CODES:
            raise InvalidParameterError(
                f"unknown policy {self.kind!r}; expected one of {sorted(_POLICY_CODES)}"
            )
        if self.kind == UCB1 and not self.eta > 0:
            raise InvalidParameterError(f"UCB1 needs eta > 0, got {self.eta}")

    @property
    def code(self) -> int:
        return _POLICY_CODES[self.kind]


@dataclass(frozen=True)
class ArmStats:
    """Snapshot of one memory slot (Bernoulli sufficient statistics)."""

    arm: ArmId
    pulls: int = 0
    successes: int = 0

    @property
    def reward_sum(self) -> float:
        return float(self.successes)

    @property
    def failures(self) -> int:
        return self.pulls - self.successes

    @property
    def mean(self) -> float:
        if self.pulls == 0:
            raise ZeroDivisionError(f"arm {self.arm} has not been pulled")
        return self.successes / self.pulls


class BoundedArmMemory:
    """At most ``capacity`` arm statistics, kept in fixed-size slot arrays.

    Slots are ordered by arm id so that slot order is the tie-breaking order.
    Every mutation re-checks the occupancy and records the running maximum in
    ``max_occupancy``; going over capacity raises :class:`MemoryCapacityError`.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidParameterError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.ids = np.zeros(capacity, dtype=np.int64)
        self.pulls = np.zeros(capacity, dtype=np.int64)
        self.successes = np.zeros(capacity, dtype=np.int64)
        self.size = 0
        self.max_occupancy = 0

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[ArmId]:
        return iter(self.ids[: self.size].tolist())

    def __contains__(self, arm) -> bool:
        return bool(np.any(self.ids[: self.size] == arm))

    def __repr__(self):
        return f"BoundedArmMemory(capacity={self.capacity}, arms={list(self)})"

    def _observe(self, size: int) -> None:
        if size > self.capacity:
            raise MemoryCapacityError(f"{size} arm statistics exceed capacity {self.capacity}")
        self.size = size
        self.max_occupancy = max(self.max_occupancy, size)

    def slot(self, arm: ArmId) -> int:
        hit = np.flatnonzero(self.ids[: self.size] == arm)
        if hit.size == 0:
            raise MissingArmError(arm)
        return int(hit[0])

    def insert(self, arm: ArmId) -> None:
        """Add fresh statistics for ``arm``; a full memory needs :meth:`replace`."""
        if arm in self:
            raise InvalidParameterError(f"arm {arm} already in memory")
        if self.size >= self.capacity:
            raise MemoryCapacityError(
                f"memory full ({self.capacity} arms); use replace() to evict an arm"
            )
        n = self.size
        k = int(np.searchsorted(self.ids[:n], arm))
        for arr in (self.ids, self.pulls, self.successes):
            arr[k + 1 : n + 1] = arr[k:n].copy()
        self.ids[k] = arm
        self.pulls[k] = 0
        self.successes[k] = 0
        self._observe(n + 1)

    def remove(self, arm: ArmId) -> None:
        k = self.slot(arm)
        n = self.size
        for arr in (self.ids, self.pulls, self.successes):
            arr[k : n - 1] = arr[k + 1 : n].copy()
        self._observe(n - 1)

    def replace(self, old: ArmId, new: ArmId) -> None:
        self.remove(old)
        self.insert(new)

    def clear(self) -> None:
        self._observe(0)

    def load(self, arms: Iterable[ArmId]) -> None:
        """Forget everything and hold fresh statistics for ``arms``."""
        self.clear()
        for arm in sorted(arms):
            self.insert(arm)

    def update(self, arm: ArmId, reward: int) -> None:
        k = self.slot(arm)
        self.pulls[k] += 1
        self.successes[k] += reward

    def stats(self, arm: ArmId) -> ArmStats:
        k = self.slot(arm)
        return ArmStats(int(self.ids[k]), int(self.pulls[k]), int(self.successes[k]))

    def all_stats(self) -> list[ArmStats]:
        return [ArmStats(int(a), int(u), int(s)) for a, u, s in
                zip(self.ids[: self.size], self.pulls[: self.size], self.successes[: self.size])]


def ucb_index(stats: ArmStats, t: int, eta: float = 1.0) -> float:
    """``mean + eta * sqrt(2 ln t / pulls)``; infinite for an unpulled arm."""
    u = stats.pulls
    if u == 0:
        return math.inf
    return stats.successes / u + eta * math.sqrt(2.0 * math.log(t) / u)


def moss_index(stats: ArmStats, remaining_budget: float, n_arms: int) -> float:
    """MOSS score ``mean + sqrt(max(0, ln(T / (K u))) / u)`` with the sub-phase budget as T."""
    u = stats.pulls
    if u == 0:
        return math.inf
    return stats.successes / u + math.sqrt(max(0.0, math.log(remaining_budget / (n_arms * u))) / u)


def thompson_draw(stats: ArmStats, rng: np.random.Generator) -> float:
    return float(rng.beta(stats.successes + 1.0, stats.failures + 1.0))


def allocate(memory: BoundedArmMemory, t: int, policy: Policy, budget_ctx: float | None,
             rng: np.random.Generator) -> ArmId:
    """Pick the next arm to pull.

    ``t`` is the number of pulls already made in the current forecaster run and
    ``budget_ctx`` is the MOSS horizon (ignored by the other policies).
    """
    if len(memory) == 0:
        raise EmptyMemoryError("cannot allocate from an empty memory")
    stats = memory.all_stats()
    for s in stats:
        if s.pulls == 0:
            return s.arm
    best, choice = -math.inf, stats[0].arm
    for s in stats:
        if policy.kind == UCB1:
            score = ucb_index(s, t, policy.eta)
        elif policy.kind == MOSS:
            score = moss_index(s, budget_ctx, len(stats))
        else:
            score = thompson_draw(s, rng)
        if score > best:
            best, choice = score, s.arm
    return choice


def most_played(memory: BoundedArmMemory) -> ArmId:
    if len(memory) == 0:
        raise EmptyMemoryError("no arm to recommend")
    n = memory.size
    return int(memory.ids[int(np.argmax(memory.pulls[:n]))])


def run_forecaster(arms: Iterable[ArmId], budget: int, policy: Policy, source: Source,
                   ledger: RegretLedger, rng: np.random.Generator, *,
                   memory: BoundedArmMemory | None = None, budget_ctx: float | None = None,
                   fast: bool = True, pull_log: MutableSequence[ArmId] | None = None) -> ArmId:
    """Run a fresh forecaster on ``arms`` for ``budget`` pulls; return the most played arm.

    The statistics of ``arms`` are loaded into ``memory`` (a new one sized to
    ``arms`` when omitted), so an engine can pass its own bounded store.  Each
    pull is charged to ``ledger``.  ``fast`` selects the compiled loop; the
    pure-Python loop is the readable reference and produces the same trace.
    """
    arms = sorted(set(arms))
    if memory is None:
        memory = BoundedArmMemory(max(1, len(arms)))
    memory.load(arms)
    if budget < 0:
        raise InvalidParameterError(f"budget must be >= 0, got {budget}")
    if budget_ctx is None:
        budget_ctx = budget
    means = np.array([source.mean(a) for a in arms], dtype=np.float64)
    for m in means:
        ledger.check_mean(m)

    if fast:
        n = memory.size
        log = np.empty(budget if pull_log is not None else 0, dtype=np.int64)
        _kernels.forecast(
            means, memory.pulls[:n], memory.successes[:n], int(budget), policy.code,
            float(policy.eta), float(budget_ctx), rng, ledger.mu_star,
            0.0 if ledger.mu_rho is None else ledger.mu_rho, ledger.mu_rho is not None,
            ledger.acc, ledger.pos, ledger.grid, ledger.cp_star, ledger.cp_rho, log,
        )
        if pull_log is not None:
            pull_log.extend(memory.ids[log].tolist())
    else:
        for t in range(budget):
            arm = allocate(memory, t, policy, budget_ctx, rng)
            memory.update(arm, pull(source, arm, rng))
            ledger.record_pull(source.mean(arm))
            if pull_log is not None:
                pull_log.append(arm)
    return most_played(memory)
