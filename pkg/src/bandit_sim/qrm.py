"""QRM-UCB-M: UCB-M restarted on a growing sample of arms from a reservoir.

Round ``r`` has horizon ``t_r = 2**r * B`` and works on ``n_r = ceil(t_r**alpha)``
arms: the arms of the previous round plus fresh draws from the reservoir.
UCB-M statistics are rebuilt from scratch every round; only the arm ids carry
over.  The last round is cut so the run makes exactly ``horizon`` pulls.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import ArmId, ArmReservoir, RegretLedger
from .errors import InvalidParameterError, UnsupportedCapacityError
from .policies import Policy
from .ucbm import UcbmResult, run_ucbm

#: Exploration exponent that minimises the quantile-regret bound.
ALPHA_THEORY = 0.205
#: Exploration exponent used in the experiments on I1..I4.
ALPHA_EMPIRICAL = 0.347


def base_horizon(alpha: float, M: int) -> float:
    """``(M**2 (M+2)) ** (1 / (1 - alpha))`` before rounding."""
    return float(M * M * (M + 2)) ** (1.0 / (1.0 - alpha))


def qrm_schedule(alpha: float, M: int, r: int) -> tuple[int, int, int]:
    """``(B, t_r, n_r)`` for round ``r``; ``B`` is ceiled to whole pulls."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if M < 2:
        raise UnsupportedCapacityError(f"QRM-UCB-M needs M >= 2, got {M}")
    if r < 1:
        raise InvalidParameterError(f"round index must be >= 1, got {r}")
    B = math.ceil(base_horizon(alpha, M))
    t_r = (1 << r) * B
    return B, t_r, math.ceil(t_r**alpha)


@dataclass(frozen=True)
class RoundRecord:
    r: int
    t_r: int  # nominal round horizon
    used: int  # pulls actually spent (< t_r only in the last round)
    n_r: int
    new_arms: tuple[ArmId, ...]
    regret_star: float  # cumulative, at the end of the round


@dataclass
class QrmResult:
    ledger: RegretLedger
    rounds: list[RoundRecord]
    arms: list[ArmId]
    round_results: list[UcbmResult]

    @property
    def max_occupancy(self) -> int:
        return max(res.max_occupancy for res in self.round_results)


def run_qrm(reservoir: ArmReservoir, M: int, horizon: int, alpha: float, policy: Policy,
            rng: np.random.Generator, ledger: RegretLedger | None = None, *,
            fast: bool = True, record_pulls: bool = False) -> QrmResult:
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    if ledger is None:
        ledger = RegretLedger(reservoir.mu_star)
    arms: list[ArmId] = []
    rounds: list[RoundRecord] = []
    results: list[UcbmResult] = []
    remaining = horizon
    r = 0
    while remaining > 0:
        r += 1
        _, t_r, n_r = qrm_schedule(alpha, M, r)
        new = [reservoir.sample(rng) for _ in range(n_r - len(arms))]
        arms.extend(new)
        n = min(t_r, remaining)
        res = run_ucbm(reservoir, M, n, policy, rng, ledger, arms=arms, fast=fast,
                       record_pulls=record_pulls)
        remaining -= n
        results.append(res)
        rounds.append(RoundRecord(r, t_r, n, n_r, tuple(new), ledger.regret_star))
    return QrmResult(ledger, rounds, arms, results)


ROUND_FIELDS = ("run_id", "r", "t_r", "n_r", "regret_star")


def write_round_csv(path: str | Path, runs: Iterable[tuple[int, Iterable[RoundRecord]]]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(ROUND_FIELDS)
        for run_id, rounds in runs:
            for rec in rounds:
                out.writerow([run_id, rec.r, rec.used, rec.n_r, format(rec.regret_star, ".17g")])
