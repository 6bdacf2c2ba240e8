"""Bandit instances, Bernoulli reward generation and regret accounting.

Arms are identified by positive integers (``ArmId``).  Finite instances number
their arms ``1..K``; a reservoir hands out fresh, strictly increasing ids.  The
true means are hidden from the algorithms: engines only see rewards, and the
means are read back exclusively to charge pseudo-regret to a
:class:`RegretLedger`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import special

from .errors import (
    InconsistentInstanceError,
    InvalidInstanceError,
    InvalidParameterError,
    MissingArmError,
)

ArmId = int

#: Optimal mean shared by every finite benchmark instance.
FINITE_MU_STAR = 0.99
#: Mean of the worst arm of the finite benchmark instances.
FINITE_MU_MIN = 0.01
#: Absolute tolerance of the numeric inverse CDF.
QUANTILE_TOL = 1e-9


@dataclass(frozen=True)
class ArmDistribution:
    """Bernoulli reward distribution of a single arm."""

    mean: float
    kind: str = "bernoulli"

    def __post_init__(self):
        if self.kind != "bernoulli":
            raise InvalidParameterError(f"unsupported reward family {self.kind!r}")
        if not 0.0 <= self.mean <= 1.0:
            raise InvalidParameterError(f"arm mean {self.mean} outside [0, 1]")


@dataclass(frozen=True)
class FiniteInstance:
    """A finite set of arms with ids ``1..K``."""

    arms: tuple[ArmDistribution, ...]
    means: np.ndarray = field(init=False, repr=False, compare=False)
    mu_star: float = field(init=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        if len(arms) < 2:
            raise InvalidInstanceError(f"need at least 2 arms, got {len(arms)}")
        means = np.array([a.mean for a in arms], dtype=np.float64)
        means.flags.writeable = False
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "mu_star", float(means.max()))

    @classmethod
    def from_means(cls, means: Iterable[float]) -> "FiniteInstance":
        return cls(tuple(ArmDistribution(float(m)) for m in means))

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def arm_ids(self) -> range:
        return range(1, len(self.arms) + 1)

    def mean(self, arm: ArmId) -> float:
        if not 1 <= arm <= len(self.arms):
            raise MissingArmError(arm)
        return float(self.means[arm - 1])


def make_linear_instance(K: int) -> FiniteInstance:
    """Means linearly spaced from 0.99 down to 0.01 (arm 1 is optimal)."""
    if K < 2:
        raise InvalidInstanceError(f"need at least 2 arms, got {K}")
    i = np.arange(K, dtype=np.float64)
    means = FINITE_MU_STAR - (FINITE_MU_STAR - FINITE_MU_MIN) * i / (K - 1)
    return FiniteInstance.from_means(means)


def make_alpha_instance(K: int, alpha: float) -> FiniteInstance:
    """Power-law instance: ``mu_i = 0.01 + mu* - (mu* - 0.01) ((i-1)/(K-1))**alpha``.

    The formula is applied for ``i > 1`` only; arm 1 is pinned to ``mu* = 0.99``
    (the formula's own limit at ``i = 1`` would be 1.0).
    """
    if K < 2:
        raise InvalidInstanceError(f"need at least 2 arms, got {K}")
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    frac = np.arange(1, K, dtype=np.float64) / (K - 1)
    tail = FINITE_MU_MIN + FINITE_MU_STAR - (FINITE_MU_STAR - FINITE_MU_MIN) * frac**alpha
    if tail.max() >= FINITE_MU_STAR:
        raise InvalidInstanceError(
            f"K={K}, alpha={alpha} puts a sub-optimal mean at or above {FINITE_MU_STAR}"
        )
    return FiniteInstance.from_means(np.concatenate(([FINITE_MU_STAR], tail)))


class ArmReservoir:
    """Infinite arm pool: each fresh arm has mean ``mu_star * Beta(a, b)``.

    ``prior=None`` gives the degenerate point-mass reservoir in which every arm
    has mean ``mu_star``.  Sampled means are kept so that repeated pulls of the
    same id hit the same hidden distribution.
    """

    def __init__(self, prior: tuple[float, float] | None = (1.0, 1.0), mu_star: float = 1.0):
        if not 0.0 < mu_star <= 1.0:
            raise InvalidParameterError(f"mu_star must lie in (0, 1], got {mu_star}")
        if prior is not None:
            a, b = prior
            if a <= 0 or b <= 0:
                raise InvalidParameterError(f"Beta parameters must be positive, got {prior}")
            prior = (float(a), float(b))
        self.prior = prior
        self.mu_star = float(mu_star)
        self.next_id: ArmId = 1
        self._means: dict[ArmId, float] = {}

    @classmethod
    def point_mass(cls, mu_star: float = 1.0) -> "ArmReservoir":
        return cls(prior=None, mu_star=mu_star)

    def __repr__(self):
        return f"ArmReservoir(prior={self.prior}, mu_star={self.mu_star}, sampled={len(self._means)})"

    def __len__(self):
        return len(self._means)

    def sample(self, rng: np.random.Generator) -> ArmId:
        if self.prior is None:
            mean = self.mu_star
        else:
            mean = self.mu_star * float(rng.beta(*self.prior))
        arm = self.next_id
        self._means[arm] = mean
        self.next_id += 1
        return arm

    def mean(self, arm: ArmId) -> float:
        try:
            return self._means[arm]
        except KeyError:
            raise MissingArmError(arm) from None


#: Instances I1..I4: (Beta prior, mu_star).
RESERVOIR_PRESETS = {
    "I1": ((0.5, 2.0), 1.0),
    "I2": ((1.0, 1.0), 1.0),
    "I3": ((0.5, 2.0), 0.6),
    "I4": ((1.0, 1.0), 0.6),
}


def make_reservoir(tag: str) -> ArmReservoir:
    try:
        prior, mu_star = RESERVOIR_PRESETS[tag]
    except KeyError:
        raise InvalidInstanceError(
            f"unknown reservoir {tag!r}; expected one of {sorted(RESERVOIR_PRESETS)}"
        ) from None
    return ArmReservoir(prior, mu_star)


Source = Union[FiniteInstance, ArmReservoir]


def pull(source: Source, arm: ArmId, rng: np.random.Generator) -> int:
    """Draw one Bernoulli reward from ``arm``; consumes exactly one uniform."""
    return int(rng.random() < source.mean(arm))


def sample_arm(reservoir: ArmReservoir, rng: np.random.Generator) -> ArmId:
    return reservoir.sample(rng)


def _bisect_cdf(cdf, level: float, tol: float = QUANTILE_TOL) -> float:
    # smallest x in [0, 1] with cdf(x) >= level, to within tol
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf(mid) >= level:
            hi = mid
        else:
            lo = mid
    return hi


def quantile_mu_rho(reservoir: ArmReservoir, rho: float, *, numeric: bool = False) -> float:
    """Mean value ``mu_rho`` exceeded by a fraction ``rho`` of the reservoir's arms.

    Uniform priors use the closed form ``mu_star * (1 - rho)`` unless
    ``numeric`` is set; other Beta priors bisect the regularized incomplete
    beta function.
    """
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {rho}")
    if reservoir.prior is None:
        return reservoir.mu_star
    a, b = reservoir.prior
    if a == 1.0 and b == 1.0 and not numeric:
        return reservoir.mu_star * (1.0 - rho)
    x = _bisect_cdf(lambda x: special.betainc(a, b, x), 1.0 - rho, QUANTILE_TOL / reservoir.mu_star)
    return reservoir.mu_star * x


def checkpoint_grid(horizon: int, extra: Sequence[int] = (), base: int = 1000) -> np.ndarray:
    """Checkpoints ``base * 2**k`` up to ``horizon``, plus ``horizon`` and ``extra``."""
    points = []
    c = base
    while c <= horizon:
        points.append(c)
        c *= 2
    points.append(horizon)
    points.extend(int(e) for e in extra if 1 <= e <= horizon)
    return np.unique(np.asarray(points, dtype=np.int64))


class RegretLedger:
    """Cumulative pseudo-regret against ``mu_star`` and, optionally, ``mu_rho``.

    State lives in two small arrays so compiled kernels can update it in place:
    ``acc = [regret_star, regret_rho]`` and ``pos = [t, next checkpoint index]``.
    """

    def __init__(self, mu_star: float, mu_rho: float | None = None, checkpoints: Iterable[int] = ()):
        self.mu_star = float(mu_star)
        self.mu_rho = None if mu_rho is None else float(mu_rho)
        grid = np.unique(np.asarray(list(checkpoints), dtype=np.int64))
        if grid.size and grid[0] < 1:
            raise InvalidParameterError("checkpoints must be positive pull counts")
        self.grid = grid
        self.acc = np.zeros(2, dtype=np.float64)
        self.pos = np.zeros(2, dtype=np.int64)
        self.cp_star = np.zeros(grid.size, dtype=np.float64)
        self.cp_rho = np.zeros(grid.size, dtype=np.float64)

    @property
    def t(self) -> int:
        return int(self.pos[0])

    @property
    def regret_star(self) -> float:
        return float(self.acc[0])

    @property
    def regret_rho(self) -> float | None:
        return None if self.mu_rho is None else float(self.acc[1])

    @property
    def checkpoints(self) -> list[tuple[int, float, float | None]]:
        n = int(self.pos[1])
        rho = [None] * n if self.mu_rho is None else self.cp_rho[:n].tolist()
        return list(zip(self.grid[:n].tolist(), self.cp_star[:n].tolist(), rho))

    def check_mean(self, true_mean: float) -> None:
        if true_mean > self.mu_star:
            raise InconsistentInstanceError(
                f"pulled mean {true_mean} exceeds the instance optimum {self.mu_star}"
            )

    def record_pull(self, true_mean: float) -> None:
        self.check_mean(true_mean)
        self.pos[0] += 1
        self.acc[0] += self.mu_star - true_mean
        if self.mu_rho is not None:
            self.acc[1] += self.mu_rho - true_mean
        k = self.pos[1]
        if k < self.grid.size and self.pos[0] == self.grid[k]:
            self.cp_star[k] = self.acc[0]
            self.cp_rho[k] = self.acc[1]
            self.pos[1] = k + 1


def record_pull(ledger: RegretLedger, true_mean: float) -> RegretLedger:
    ledger.record_pull(true_mean)
    return ledger
