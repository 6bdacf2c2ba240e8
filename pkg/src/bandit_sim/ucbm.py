"""UCB-M: regret minimisation on a finite instance holding at most M arm statistics.

The engine works in phases.  Each phase scans the (randomly permuted) arm list
in ``h0 = ceil((K-1)/(M-1))`` sub-phase windows.  A window holds the arm
recommended by the previous sub-phase plus up to ``M-1`` arms not yet scanned
in the phase; a fresh forecaster runs on it for ``b_w = 2**(w-1) * M(M+2)``
pulls and its most played arm is carried forward.  With ``M >= K`` the memory
constraint is void and a single forecaster runs on all arms for the whole
horizon.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import ArmId, FiniteInstance, RegretLedger, Source
from .errors import InvalidInstanceError, InvalidParameterError, ScheduleExhaustedError, UnsupportedCapacityError
from .policies import BoundedArmMemory, Policy, run_forecaster


@dataclass(frozen=True)
class SubphaseRecord:
    w: int
    j: int
    window: tuple[ArmId, ...]  # original arm ids, ascending
    budget: int  # nominal b_w
    pulls: tuple[int, ...]  # aligned with ``window``
    a_hat: ArmId | None  # None when the horizon cut the sub-phase short

    @property
    def used(self) -> int:
        return sum(self.pulls)


@dataclass
class UcbmResult:
    ledger: RegretLedger
    trace: list[SubphaseRecord]
    max_occupancy: int
    h0: int | None  # None in the unconstrained branch
    pull_log: list[ArmId] | None = None

    @property
    def unconstrained(self) -> bool:
        return self.h0 is None

    @property
    def phases_started(self) -> int:
        return max((r.w for r in self.trace), default=0)

    def completed_phases(self) -> list[list[SubphaseRecord]]:
        """Phases whose every sub-phase ran to its full budget."""
        phases: dict[int, list[SubphaseRecord]] = {}
        for rec in self.trace:
            phases.setdefault(rec.w, []).append(rec)
        return [recs for _, recs in sorted(phases.items())
                if len(recs) == self.h0 and all(r.a_hat is not None for r in recs)]


def next_budget(w: int, M: int) -> int:
    """Per-sub-phase budget of phase ``w``: ``2**(w-1) * M * (M+2)``."""
    if w < 1:
        raise InvalidParameterError(f"phase index must be >= 1, got {w}")
    return (1 << (w - 1)) * M * (M + 2)


def subphase_window(l: int, a_hat: int, K: int, M: int, *, literal: bool = False) -> tuple[tuple[int, ...], int]:
    """Window of positions for the next sub-phase and the new scan index.

    Positions ``l+1 .. min(l+M, K)`` are taken; if the carried arm ``a_hat``
    is not among them it joins the window and the last scanned position is
    handed back.  Near the end of the list the window may be short; then
    ``a_hat`` is simply added and nothing is handed back, so that every
    position is scanned within a phase.  ``literal=True`` always hands the
    last position back, which can leave the last position of a phase
    unscanned.
    """
    if not 2 <= M < K:
        raise InvalidParameterError(f"need 2 <= M < K, got M={M}, K={K}")
    if not 1 <= a_hat <= K:
        raise InvalidParameterError(f"a_hat={a_hat} outside 1..{K}")
    if l >= K:
        raise ScheduleExhaustedError(f"scan index {l} already reached K={K}")
    window = list(range(l + 1, min(l + M, K) + 1))
    last = window[-1]
    if a_hat not in window:
        if literal or len(window) == M:
            window.pop()
            last -= 1
        window.append(a_hat)
    return tuple(sorted(window)), last


def run_ucbm(source: Source, M: int, horizon: int, policy: Policy, rng: np.random.Generator,
             ledger: RegretLedger | None = None, *, arms: Sequence[ArmId] | None = None,
             fast: bool = True, record_pulls: bool = False, literal_windows: bool = False) -> UcbmResult:
    """Run UCB-M (or TS-M / Moss-M, depending on ``policy``) for ``horizon`` pulls.

    ``arms`` restricts the run to a finite subset of ``source`` (used for
    reservoirs); by default all arms of a :class:`FiniteInstance` are used.
    """
    if arms is None:
        if not isinstance(source, FiniteInstance):
            raise InvalidInstanceError("arms must be given when the source is not a FiniteInstance")
        arms = list(source.arm_ids)
    arms = [int(a) for a in arms]
    K = len(arms)
    if K < 2:
        raise InvalidInstanceError(f"need at least 2 arms, got {K}")
    if M < 2:
        raise UnsupportedCapacityError(f"UCB-M needs an arm memory of at least 2, got {M}")
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    if ledger is None:
        ledger = RegretLedger(max(source.mean(a) for a in arms))

    memory = BoundedArmMemory(M)
    pull_log: list[ArmId] | None = [] if record_pulls else None
    trace: list[SubphaseRecord] = []

    if M >= K:
        run_forecaster(arms, horizon, policy, source, ledger, rng, memory=memory,
                       fast=fast, pull_log=pull_log)
        trace.append(SubphaseRecord(1, 1, tuple(memory), horizon,
                                    tuple(memory.pulls[: memory.size].tolist()), None))
        return UcbmResult(ledger, trace, memory.max_occupancy, None, pull_log)

    order = rng.permutation(np.asarray(arms, dtype=np.int64))
    position = {int(a): p + 1 for p, a in enumerate(order)}
    h0 = math.ceil((K - 1) / (M - 1))
    a_hat = 1
    w = 1
    remaining = horizon
    while remaining > 0:
        b = next_budget(w, M)
        l = 0
        for j in range(1, h0 + 1):
            if remaining == 0:
                break
            window, l = subphase_window(l, a_hat, K, M, literal=literal_windows)
            ids = order[np.asarray(window) - 1]
            n = min(b, remaining)
            best = run_forecaster(ids, n, policy, source, ledger, rng, memory=memory,
                                  budget_ctx=b, fast=fast, pull_log=pull_log)
            remaining -= n
            full = n == b
            if full:
                a_hat = position[best]
            trace.append(SubphaseRecord(w, j, tuple(memory), b,
                                        tuple(memory.pulls[: memory.size].tolist()),
                                        best if full else None))
        w += 1
    return UcbmResult(ledger, trace, memory.max_occupancy, h0, pull_log)


SUBPHASE_FIELDS = ("run_id", "w", "j", "window", "budget", "pulls", "a_hat")


def write_subphase_csv(path: str | Path, traces: Iterable[tuple[int, Iterable[SubphaseRecord]]]) -> None:
    """One row per sub-phase; arm lists are ``;``-joined."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(SUBPHASE_FIELDS)
        for run_id, trace in traces:
            for r in trace:
                out.writerow([run_id, r.w, r.j, ";".join(map(str, r.window)), r.budget,
                              ";".join(map(str, r.pulls)), "" if r.a_hat is None else r.a_hat])
