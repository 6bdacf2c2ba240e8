"""Replicated experiments, CSV persistence and the benchmark presets.

Run ``i`` of an experiment is seeded with ``base_seed + i`` through a Philox
(counter-based) generator and builds its own instance, memory and ledger, so
any single run can be replayed in isolation and the output does not depend on
how many worker processes executed the runs.  The worker count comes from
``BANDIT_THREADS`` (default: all available CPUs).
"""

from __future__ import annotations

import csv
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    RESERVOIR_PRESETS,
    FiniteInstance,
    RegretLedger,
    checkpoint_grid,
    make_alpha_instance,
    make_linear_instance,
    make_reservoir,
    quantile_mu_rho,
)
from .errors import InvalidParameterError, UsageError
from .policies import MOSS, THOMPSON, UCB1, BoundedArmMemory, Policy, run_forecaster
from .qrm import ALPHA_EMPIRICAL, ALPHA_THEORY, run_qrm
from .ucbm import run_ucbm

#: algorithm tag -> (engine, allocation policy)
ALGORITHMS = {
    "ucbm": ("ucbm", UCB1),
    "tsm": ("ucbm", THOMPSON),
    "mossm": ("ucbm", MOSS),
    "ucb1": ("plain", UCB1),
    "qucbm": ("qrm", UCB1),
    "qtsm": ("qrm", THOMPSON),
    "qmossm": ("qrm", MOSS),
}

_LINEAR = re.compile(r"^B(\d+)L$")
_ALPHA = re.compile(r"^B(\d+)A(\d+(?:\.\d+)?)$")
INSTANCE_HELP = "B{K}L, B{K}A{alpha}, " + ", ".join(sorted(RESERVOIR_PRESETS))

PER_RUN_FIELDS = ("run_id", "seed", "instance", "algo", "M", "eta", "alpha",
                  "checkpoint_t", "regret_star", "regret_rho")
AGGREGATE_FIELDS = ("instance", "algo", "M", "eta", "alpha", "n", "mean_regret_star", "se_regret_star")


def _fmt(x: float | None) -> str:
    return "" if x is None else format(float(x), ".17g")


def is_infinite(tag: str) -> bool:
    return tag in RESERVOIR_PRESETS


def make_finite(tag: str) -> FiniteInstance:
    if m := _LINEAR.match(tag):
        return make_linear_instance(int(m.group(1)))
    if m := _ALPHA.match(tag):
        return make_alpha_instance(int(m.group(1)), float(m.group(2)))
    raise UsageError(f"unknown instance {tag!r}; valid tags: {INSTANCE_HELP}")


def finite_mu_rho(instance: FiniteInstance, rho: float) -> float:
    """``(1 - rho)`` quantile of the arm means under uniform arm sampling."""
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho}")
    means = np.sort(instance.means)
    return float(means[math.ceil((1.0 - rho) * len(means)) - 1])


@dataclass(frozen=True)
class RunConfig:
    instance: str
    algorithm: str
    M: int
    horizon: int
    runs: int = 1
    eta: float = 1.0
    alpha: float = ALPHA_EMPIRICAL
    rho: float | None = None
    base_seed: int = 0
    checkpoints: tuple[int, ...] = ()  # extra checkpoints on top of the 1000 * 2**k grid
    out: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {self.algorithm!r}; valid tags: {', '.join(ALGORITHMS)}")
        engine = ALGORITHMS[self.algorithm][0]
        if is_infinite(self.instance):
            if engine != "qrm":
                raise UsageError(f"{self.algorithm} needs a finite instance, got {self.instance}")
        else:
            make_finite(self.instance)
            if engine == "qrm":
                raise UsageError(f"{self.algorithm} needs a reservoir instance ({', '.join(RESERVOIR_PRESETS)})")
        if self.horizon < 1 or self.runs < 1 or self.M < 1:
            raise InvalidParameterError("horizon, runs and M must all be >= 1")

    @property
    def engine(self) -> str:
        return ALGORITHMS[self.algorithm][0]

    @property
    def policy(self) -> Policy:
        return Policy(ALGORITHMS[self.algorithm][1], self.eta)

    def label(self) -> str:
        return f"{self.instance}_{self.algorithm}_M{self.M}_eta{self.eta:g}" + (
            f"_alpha{self.alpha:g}" if self.engine == "qrm" else "")


@dataclass
class RunResult:
    run_id: int
    seed: int
    regret_star: float
    regret_rho: float | None
    checkpoints: list[tuple[int, float, float | None]]
    max_occupancy: int


@dataclass(frozen=True)
class AggregateStats:
    n: int
    mean: float
    se: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "AggregateStats":
        x = np.asarray(values, dtype=np.float64)
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        return cls(int(x.size), float(x.mean()), se)


@dataclass
class ExperimentResult:
    config: RunConfig
    runs: list[RunResult]
    aggregate: AggregateStats = field(init=False)

    def __post_init__(self):
        self.aggregate = AggregateStats.of([r.regret_star for r in self.runs])

    def regret_at(self, t: int) -> np.ndarray:
        """Per-run cumulative regret at checkpoint ``t``."""
        return np.array([dict((c[0], c[1]) for c in r.checkpoints)[t] for r in self.runs])


def simulate(config: RunConfig, run_id: int) -> RunResult:
    """Execute replicate ``run_id`` of ``config``."""
    seed = config.base_seed + run_id
    rng = np.random.Generator(np.random.Philox(seed))
    grid = checkpoint_grid(config.horizon, config.checkpoints)
    policy = config.policy
    if config.engine == "qrm":
        reservoir = make_reservoir(config.instance)
        mu_rho = None if config.rho is None else quantile_mu_rho(reservoir, config.rho)
        ledger = RegretLedger(reservoir.mu_star, mu_rho, grid)
        occupancy = run_qrm(reservoir, config.M, config.horizon, config.alpha, policy, rng, ledger).max_occupancy
    else:
        instance = make_finite(config.instance)
        mu_rho = None if config.rho is None else finite_mu_rho(instance, config.rho)
        ledger = RegretLedger(instance.mu_star, mu_rho, grid)
        if config.engine == "ucbm":
            occupancy = run_ucbm(instance, config.M, config.horizon, policy, rng, ledger).max_occupancy
        else:
            memory = BoundedArmMemory(instance.K)
            run_forecaster(instance.arm_ids, config.horizon, policy, instance, ledger, rng, memory=memory)
            occupancy = memory.max_occupancy
    return RunResult(run_id, seed, ledger.regret_star, ledger.regret_rho, ledger.checkpoints, occupancy)


def _simulate_args(args):
    return simulate(*args)


def default_workers() -> int:
    env = os.environ.get("BANDIT_THREADS")
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_experiment(config: RunConfig, workers: int | None = None) -> ExperimentResult:
    """Run all replicates of ``config`` and, if ``config.out`` is set, write the CSV files."""
    workers = default_workers() if workers is None else workers
    jobs = [(config, i) for i in range(config.runs)]
    if workers <= 1 or config.runs == 1:
        results = [simulate(c, i) for c, i in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, config.runs)) as pool:
            results = list(pool.map(_simulate_args, jobs))
    results.sort(key=lambda r: r.run_id)
    exp = ExperimentResult(config, results)
    if config.out is not None:
        write_csv(exp, config.out)
    return exp


def aggregate_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".aggregate" + (out.suffix or ".csv"))


def write_csv(exp: ExperimentResult, out: str | Path) -> tuple[Path, Path]:
    """Write the per-run file (one row per checkpoint per run) and the aggregate file."""
    c = exp.config
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    alpha = _fmt(c.alpha) if c.engine == "qrm" else ""
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PER_RUN_FIELDS)
        for r in exp.runs:
            for t, star, rho in r.checkpoints:
                w.writerow([r.run_id, r.seed, c.instance, c.algorithm, c.M, _fmt(c.eta), alpha,
                            t, _fmt(star), _fmt(rho)])
    agg = aggregate_path(out)
    with open(agg, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_FIELDS)
        a = exp.aggregate
        w.writerow([c.instance, c.algorithm, c.M, _fmt(c.eta), alpha, a.n, _fmt(a.mean), _fmt(a.se)])
    return out, agg


# --- presets -----------------------------------------------------------------

_FINITE_ALGOS = ("ucbm", "tsm", "mossm")
_Q_ALGOS = ("qucbm", "qtsm", "qmossm")


def _preset_fig2():
    return [RunConfig(i, a, 2, 10**6, runs=100)
            for i in ("B100L", "B100A0.3", "B100A0.6") for a in _FINITE_ALGOS]


def _preset_fig3():
    out = []
    for M in (2, 5, 10, 20, 50, 100):
        out.append(RunConfig("B100L", "ucbm", M, 10**6, runs=100, eta=1.0))
        out.append(RunConfig("B100L", "ucbm", M, 10**6, runs=100, eta=0.2))
        out.extend(RunConfig("B100L", a, M, 10**6, runs=100) for a in ("tsm", "mossm"))
    return out


def _preset_table(alpha):
    return [RunConfig(i, a, M, 10**6, runs=20, alpha=alpha)
            for i in ("I1", "I2", "I3", "I4") for a in _Q_ALGOS for M in (2, 10)]


def _preset_table_eta(alpha):
    return [RunConfig(i, "qucbm", M, 10**6, runs=20, alpha=alpha, eta=0.2)
            for i in ("I1", "I2", "I3", "I4") for M in (2, 10)]


def _preset_k10():
    return [RunConfig(i, a, 2, 10**6, runs=100)
            for i in ("B10L", "B10A0.3", "B10A0.6") for a in _FINITE_ALGOS]


PRESETS = {
    "fig2": ("K=100 instances, M=2, UCB-M / TS-M / Moss-M", _preset_fig2),
    "fig3": ("B100L with M in {2,5,10,20,50,100} incl. eta=0.2", _preset_fig3),
    "table1": ("I1..I4, alpha=0.347, M in {2,10}", lambda: _preset_table(ALPHA_EMPIRICAL)),
    "table1-eta": ("I1..I4, alpha=0.347, QUCB-M with eta=0.2", lambda: _preset_table_eta(ALPHA_EMPIRICAL)),
    "table2": ("I1..I4, alpha=0.205, M in {2,10}", lambda: _preset_table(ALPHA_THEORY)),
    "table2-eta": ("I1..I4, alpha=0.205, QUCB-M with eta=0.2", lambda: _preset_table_eta(ALPHA_THEORY)),
    "appendix-k10": ("K=10 instances, M=2, UCB-M / TS-M / Moss-M", _preset_k10),
}


def list_presets() -> dict[str, str]:
    return {name: desc for name, (desc, _) in PRESETS.items()}


def expand_preset(name: str, out_dir: str | Path | None = None, *, runs: int | None = None,
                  horizon: int | None = None, base_seed: int = 0) -> list[RunConfig]:
    """Configs of a named preset, optionally scaled down by ``runs`` / ``horizon``."""
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    configs = []
    for c in PRESETS[name][1]():
        c = replace(c, base_seed=base_seed, runs=runs or c.runs, horizon=horizon or c.horizon)
        if out_dir is not None:
            c = replace(c, out=str(Path(out_dir) / f"{c.label()}.csv"))
        configs.append(c)
    return configs


def run_preset(name: str, out_dir: str | Path, *, runs: int | None = None, horizon: int | None = None,
               base_seed: int = 0, workers: int | None = None) -> list[ExperimentResult]:
    return [run_experiment(c, workers) for c in
            expand_preset(name, out_dir, runs=runs, horizon=horizon, base_seed=base_seed)]
