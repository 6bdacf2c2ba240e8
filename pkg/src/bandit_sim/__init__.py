"""Multi-armed bandit simulation under a bounded arm memory.

UCB-M (and its Thompson / MOSS variants) for finite instances, QRM-UCB-M for
infinite arm reservoirs, closed-form schedule oracles, and an experiment
harness that writes CSV results.
"""

from .core import (
    ArmDistribution,
    ArmReservoir,
    FiniteInstance,
    RegretLedger,
    checkpoint_grid,
    make_alpha_instance,
    make_linear_instance,
    make_reservoir,
    pull,
    quantile_mu_rho,
    record_pull,
    sample_arm,
)
from .policies import (
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
from .qrm import ALPHA_EMPIRICAL, ALPHA_THEORY, qrm_schedule, run_qrm
from .ucbm import next_budget, run_ucbm, subphase_window

__version__ = "0.1.0"
