"""Optimal univariate distributions (OUDs) indexed by kappa = (lamA, lamB).

For a pair of positive multipliers each battlefield ``i`` becomes an all-pay
auction with valuations ``w_i * lamA`` and ``w_i * lamB``; its equilibrium
marginals are the OUDs. The residual map ``G(kappa) = (gA, gB)`` vanishes
exactly when those marginals spend both budgets in expectation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import fapa
from .distributions import AtomUniform
from .game import Battlefield, GameInstance, Player


@dataclass(frozen=True)
class Kappa:
    lamA: float
    lamB: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lamA", float(self.lamA))
        object.__setattr__(self, "lamB", float(self.lamB))

    def require_positive(self) -> None:
        if not (self.lamA > 0 and self.lamB > 0):
            raise ValueError(f"kappa must be strictly positive, got ({self.lamA}, {self.lamB})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.lamA, self.lamB)


class IndexClass(str, enum.Enum):
    IP1 = "IP1"
    IP2 = "IP2"
    IP3 = "IP3"
    IN1 = "IN1"
    IN2 = "IN2"
    IN3 = "IN3"


# the six index sets line up one-to-one with the auction regimes
_REGIME_TO_CLASS = {
    fapa.Regime.P1: IndexClass.IP1,
    fapa.Regime.P2: IndexClass.IP2,
    fapa.Regime.P3: IndexClass.IP3,
    fapa.Regime.N1: IndexClass.IN1,
    fapa.Regime.N2: IndexClass.IN2,
    fapa.Regime.N3: IndexClass.IN3,
}


@dataclass(frozen=True)
class Residual:
    gA: float
    gB: float

    @property
    def norm_inf(self) -> float:
        return max(abs(self.gA), abs(self.gB))

    def satisfies_budget(self) -> bool:
        """Both residuals non-positive, i.e. neither budget is overspent."""
        return self.gA <= 0.0 and self.gB <= 0.0


@dataclass(frozen=True)
class OudEntry:
    cls: IndexClass
    fA: AtomUniform
    fB: AtomUniform

    @property
    def meanA(self) -> float:
        return self.fA.mean()

    @property
    def meanB(self) -> float:
        return self.fB.mean()

    def to_dict(self) -> dict:
        return {
            "class": self.cls.value,
            "fA": self.fA.to_dict(),
            "fB": self.fB.to_dict(),
            "meanA": self.meanA,
            "meanB": self.meanB,
        }


@dataclass(frozen=True)
class OudProfile:
    kappa: Kappa
    entries: tuple[OudEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> OudEntry:
        return self.entries[i]

    @property
    def classes(self) -> tuple[IndexClass, ...]:
        return tuple(e.cls for e in self.entries)

    def marginals(self, player) -> tuple[AtomUniform, ...]:
        return tuple(e.fA if Player(player) is Player.A else e.fB for e in self.entries)

    def total_mean(self, player) -> float:
        return float(math.fsum([d.mean() for d in self.marginals(player)]))

    def to_dict(self) -> dict:
        return {
            "kappa": {"lamA": self.kappa.lamA, "lamB": self.kappa.lamB},
            "battlefields": [e.to_dict() for e in self.entries],
        }


def _auction(b: Battlefield, k: Kappa, alpha: float) -> fapa.FapaInstance:
    return fapa.FapaInstance(b.w * k.lamA, b.w * k.lamB, b.p, b.q, alpha)


def classify_battlefield(b: Battlefield, k: Kappa) -> IndexClass:
    k.require_positive()
    uA, uB = b.w * k.lamA, b.w * k.lamB
    if b.p >= 0:
        reach = b.q * uB - b.p
        if reach <= 0:
            return IndexClass.IP1
        return IndexClass.IP2 if reach <= uA else IndexClass.IP3
    if uA <= -b.p:
        return IndexClass.IN1
    return IndexClass.IN2 if uA <= b.q * uB - b.p else IndexClass.IN3


def build_ouds(g: GameInstance, k: Kappa) -> OudProfile:
    k.require_positive()
    entries = []
    for b in g.battlefields:
        eq = fapa.equilibrium(_auction(b, k, g.alpha))
        entries.append(OudEntry(_REGIME_TO_CLASS[eq.regime], eq.distA, eq.distB))
    return OudProfile(k, tuple(entries))


class _ResidualKernel:
    """Per-game constants for fast repeated residual evaluation."""

    def __init__(self, g: GameInstance) -> None:
        w, p, q = g.w, g.p, g.q
        self.w, self.p = w, p
        self.qw = q * w
        self.neg_p = -p
        self.nonneg = p >= 0
        self.neg = ~self.nonneg
        self.p2_plus = np.where(self.nonneg, p * p, 0.0)
        self.p2_minus = np.where(self.neg, p * p, 0.0)
        self.inv_denom = 1.0 / (2.0 * q * w)
        self.xA, self.xB = g.xA, g.xB

    def __call__(self, lamA: np.ndarray, lamB: np.ndarray):
        uA = lamA[:, None] * self.w
        quB = lamB[:, None] * self.qw
        h = np.minimum(quB, uA + self.p)
        active = (self.nonneg & (quB > self.p)) | (self.neg & (uA > self.neg_p))
        hp = h - self.p
        termA = np.where(active, h * h - self.p2_plus, 0.0)
        termB = np.where(active, hp * hp - self.p2_minus, 0.0)
        gA = termA @ self.inv_denom - self.xB * lamA
        gB = termB @ self.inv_denom - self.xA * lamB
        return gA, gB


def _kernel(g: GameInstance) -> _ResidualKernel:
    kernel = g.__dict__.get("_residual_kernel")
    if kernel is None:
        kernel = _ResidualKernel(g)
        # GameInstance is frozen; cache alongside its other derived arrays
        object.__setattr__(g, "_residual_kernel", kernel)
    return kernel


def residual_batch(g: GameInstance, lamA, lamB) -> tuple[np.ndarray, np.ndarray]:
    """Residuals at many kappa points at once; inputs broadcast to a common 1-D shape."""
    lamA = np.asarray(lamA, dtype=float).reshape(-1)
    lamB = np.asarray(lamB, dtype=float).reshape(-1)
    if lamA.shape != lamB.shape:
        lamA, lamB = np.broadcast_arrays(lamA, lamB)
    if np.any(lamA <= 0) or np.any(lamB <= 0):
        raise ValueError("kappa must be strictly positive")
    return _kernel(g)(lamA, lamB)


def residual(g: GameInstance, k: Kappa) -> Residual:
    k.require_positive()
    gA, gB = residual_batch(g, k.lamA, k.lamB)
    return Residual(float(gA[0]), float(gB[0]))


def battlefield_payoff_A(b: Battlefield, k: Kappa, alpha: float) -> float:
    """A's expected share of battlefield ``b`` when both play the OUDs at ``k``."""
    w, p, q = b.w, b.p, b.q
    lamA, lamB = k.lamA, k.lamB
    cls = classify_battlefield(b, k)
    if cls is IndexClass.IP1:
        return w if p > 0 else alpha * w if p == 0 else 0.0
    if cls is IndexClass.IP2:
        reach = q * w * lamB - p
        return w * (1.0 - q * lamB / lamA + p / (w * lamA)) + reach**2 / (
            2.0 * w * lamA * q * lamB
        )
    if cls is IndexClass.IP3:
        return w * lamA / (2.0 * q * lamB)
    if cls is IndexClass.IN1:
        return 0.0
    if cls is IndexClass.IN2:
        return w * lamA / (2.0 * q * lamB) - p * p / (2.0 * w * lamA * q * lamB)
    return w - q * lamB * w / (2.0 * lamA)


def oud_payoffs(g: GameInstance, k: Kappa) -> tuple[float, float]:
    k.require_positive()
    pi_a = float(math.fsum([battlefield_payoff_A(b, k, g.alpha) for b in g.battlefields]))
    return pi_a, g.total_value - pi_a
