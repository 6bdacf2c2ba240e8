"""Closed-form schedule and bound quantities.

``log`` is base 2 and ``ln`` natural throughout.  Unknown universal constants
in the regret bounds are set to 1, so the bounds are only meaningful as shapes
(growth rates, monotonicity, ratios), never as absolute thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy import optimize

from .errors import PreconditionError


@dataclass(frozen=True)
class BoundReport:
    K: int | None
    M: int
    T: float
    terms: dict[str, float] = field(default_factory=dict)

    @property
    def bound_value(self) -> float:
        return sum(self.terms.values())


def h0(K: int, M: int) -> int:
    """Sub-phases per UCB-M phase, ``ceil((K-1)/(M-1))``."""
    if not 2 <= M < K:
        raise PreconditionError(f"h0 needs 2 <= M < K, got M={M}, K={K}")
    return -(-(K - 1) // (M - 1))


def x0(K: int, M: int, T: int) -> int:
    """Upper bound ``ceil(log(2T/(MK)))`` on the phases UCB-M starts."""
    if not T > 2 * M * K:
        raise PreconditionError(f"x0 needs T > 2MK, got T={T}, 2MK={2 * M * K}")
    # exact for powers of two: compare integers rather than trusting log2 rounding
    num, den = 2 * T, M * K
    x = max(0, math.ceil(math.log2(num / den)) - 1)
    while den << x < num:
        x += 1
    return x


def finite_regret_bound(K: int, M: int, T: float) -> BoundReport:
    """``KM + (K**1.5 / M) sqrt(T log(T/(KM)))``."""
    if K < 3:
        raise PreconditionError(f"K >= 3 required, got K={K}")
    if not 2 <= M < K:
        raise PreconditionError(f"2 <= M < K required, got M={M}, K={K}")
    if not T > K * M * M * (M + 2):
        raise PreconditionError(f"T > K M^2 (M+2) = {K * M * M * (M + 2)} required, got T={T}")
    return BoundReport(K, M, T, {
        "memory": float(K * M),
        "exploration": K**1.5 / M * math.sqrt(T * math.log2(T / (K * M))),
    })


def gamma_constant() -> float:
    """``max_x log(log x) / log x`` found numerically (substituting ``y = log x``)."""
    res = optimize.minimize_scalar(lambda y: -math.log2(y) / y, bounds=(1.0, 64.0),
                                   method="bounded", options={"xatol": 1e-12})
    return -float(res.fun)


def r_star(rho: float, alpha: float, B: float) -> int:
    """First round from which the sampled arm set is large enough; at least 1."""
    if not 0 < rho < 1 or not 0 < alpha < 1 or B < 1:
        raise PreconditionError(f"need rho, alpha in (0, 1) and B >= 1, got {rho}, {alpha}, {B}")
    inv = 1.0 / rho
    return max(1, math.ceil(math.log2(inv * math.log2(inv)) / alpha - math.log2(B)))


def pr_empty(rho: float, n: int) -> float:
    """Probability that ``n`` sampled arms all miss the top-``rho`` fraction."""
    return (1.0 - rho) ** n


def arm_set_lower_bound(rho: float, alpha: float, t: float, gamma: float | None = None) -> int:
    """``ceil(alpha log(e) / ((1+gamma) rho) * ln t)``: guaranteed arm-set size from round r*."""
    g = gamma_constant() if gamma is None else gamma
    return math.ceil(alpha * math.log2(math.e) / ((1.0 + g) * rho) * math.log(t))


def quantile_regret_bound(rho: float, M: int, T: float, alpha: float) -> BoundReport:
    inv = 1.0 / rho
    return BoundReport(None, M, T, {
        "empty_set": (inv * math.log2(inv)) ** (1.0 / alpha),
        "memory": M * T**alpha,
        "exploration": T ** ((1 + 3 * alpha) / 2) * math.sqrt(math.log2(M) / M**2 * math.log2(T / M)),
    })
