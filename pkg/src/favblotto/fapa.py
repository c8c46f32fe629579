"""Two-bidder all-pay auction with favoritism.

Bidder A values the item at ``uA``, bidder B at ``uB``; both pay their bids and
A takes the item when ``bidA > q * bidB - p`` (share ``alpha`` on a tie). The
unique equilibrium is one of six closed-form regimes, three for ``p >= 0`` and
three for ``p < 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distributions import AtomUniform, bid_win_prob_A, bid_win_prob_B


class Regime(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"


@dataclass(frozen=True)
class FapaInstance:
    uA: float
    uB: float
    p: float = 0.0
    q: float = 1.0
    alpha: float = 0.5

    def __post_init__(self) -> None:
        for name in ("uA", "uB", "p", "q", "alpha"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.uA <= 0 or self.uB <= 0:
            raise ValueError(f"valuations must be > 0, got uA={self.uA}, uB={self.uB}")
        if self.q <= 0:
            raise ValueError(f"q must be > 0, got {self.q}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class FapaEquilibrium:
    regime: Regime
    distA: AtomUniform
    distB: AtomUniform
    payoffA: float
    payoffB: float

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "distA": self.distA.to_dict(),
            "distB": self.distB.to_dict(),
            "payoffA": self.payoffA,
            "payoffB": self.payoffB,
        }


def classify(inst: FapaInstance) -> Regime:
    uA, uB, p, q = inst.uA, inst.uB, inst.p, inst.q
    if p >= 0:
        reach = q * uB - p  # B's top effective bid minus A's head start
        if reach <= 0:
            return Regime.P1
        if reach <= uA:
            return Regime.P2
        return Regime.P3
    reach = (uA + p) / q
    if reach <= 0:
        return Regime.N1
    if reach <= uB:
        return Regime.N2
    return Regime.N3


def equilibrium(inst: FapaInstance) -> FapaEquilibrium:
    uA, uB, p, q = inst.uA, inst.uB, inst.p, inst.q
    regime = classify(inst)
    zero = AtomUniform.point_mass()
    if regime is Regime.P1:
        return FapaEquilibrium(regime, zero, zero, uA, 0.0)
    if regime is Regime.N1:
        return FapaEquilibrium(regime, zero, zero, 0.0, uB)
    if regime is Regime.P2:
        top = q * uB - p
        distA = AtomUniform(p / (q * uB), 0.0, top)
        distB = AtomUniform(1.0 - top / uA, p / q, uB)
        return FapaEquilibrium(regime, distA, distB, uA - top, 0.0)
    if regime is Regime.P3:
        distA = AtomUniform(1.0 - uA / (q * uB), 0.0, uA)
        distB = AtomUniform(0.0, p / q, (uA + p) / q)
        return FapaEquilibrium(regime, distA, distB, 0.0, uB - (uA + p) / q)
    if regime is Regime.N2:
        reach = (uA + p) / q
        distA = AtomUniform(1.0 - reach / uB, -p, uA)
        distB = AtomUniform(-p / uA, 0.0, reach)
        return FapaEquilibrium(regime, distA, distB, 0.0, uB - reach)
    # N3
    distA = AtomUniform(0.0, -p, q * uB - p)
    distB = AtomUniform(1.0 - q * uB / uA, 0.0, uB)
    return FapaEquilibrium(regime, distA, distB, uA - q * uB + p, 0.0)


def bid_payoff_A(inst: FapaInstance, distB: AtomUniform, x):
    """A's expected payoff from the pure bid ``x`` (item value won minus the bid)."""
    return inst.uA * bid_win_prob_A(x, distB, inst.p, inst.q, inst.alpha) - np.asarray(x)


def bid_payoff_B(inst: FapaInstance, distA: AtomUniform, y):
    return inst.uB * bid_win_prob_B(y, distA, inst.p, inst.q, inst.alpha) - np.asarray(y)


def deviation_gap(
    inst: FapaInstance, eq: FapaEquilibrium, grid_step: float
) -> tuple[float, float]:
    """Largest gain either bidder gets from a pure bid on a grid, vs. the equilibrium payoff.

    Bids range over ``{0, grid_step, ...}`` up to the bidder's own valuation;
    beyond it every bid is a sure loss. Non-positive gaps mean no profitable
    deviation was found.
    """
    if not grid_step > 0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")
    xs = np.arange(0.0, inst.uA + grid_step / 2, grid_step)
    ys = np.arange(0.0, inst.uB + grid_step / 2, grid_step)
    gapA = float(np.max(bid_payoff_A(inst, eq.distB, xs))) - eq.payoffA
    gapB = float(np.max(bid_payoff_B(inst, eq.distA, ys))) - eq.payoffB
    return gapA, gapB
