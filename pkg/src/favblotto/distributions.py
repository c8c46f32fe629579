"""Atom-at-zero plus uniform-block distributions.

Every equilibrium marginal in the favoritism games is of this shape: a point
mass ``atom`` at 0 and the remaining ``1 - atom`` spread uniformly on
``[lo, hi]``. Keeping to one closed family lets win probabilities be computed
exactly instead of by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AtomUniform:
    atom_mass: float
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self) -> None:
        atom, lo, hi = float(self.atom_mass), float(self.lo), float(self.hi)
        # closed forms can land a hair outside [0, 1]
        if -1e-12 < atom < 0.0:
            atom = 0.0
        elif 1.0 < atom < 1.0 + 1e-12:
            atom = 1.0
        if not 0.0 <= atom <= 1.0:
            raise ValueError(f"atom mass must lie in [0, 1], got {atom}")
        if atom == 1.0:
            lo = hi = 0.0
        else:
            if lo < 0.0:
                raise ValueError(f"support must be non-negative, got lo={lo}")
            if not hi > lo:
                raise ValueError(f"uniform block needs hi > lo, got [{lo}, {hi}]")
        object.__setattr__(self, "atom_mass", atom)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point_mass(cls) -> "AtomUniform":
        return cls(1.0)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "AtomUniform":
        return cls(0.0, lo, hi)

    @property
    def is_point_mass(self) -> bool:
        return self.atom_mass == 1.0

    @property
    def block_mass(self) -> float:
        return 1.0 - self.atom_mass

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_point_mass:
            out = np.where(x >= 0.0, 1.0, 0.0)
        else:
            frac = np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)
            out = np.where(x < 0.0, 0.0, self.atom_mass + self.block_mass * frac)
            out = np.where(x >= self.hi, 1.0, out)
        return out if out.ndim else float(out)

    def quantile(self, u):
        """Left-continuous inverse of the CDF."""
        u = np.asarray(u, dtype=float)
        if self.is_point_mass:
            out = np.zeros_like(u)
        else:
            frac = np.clip((u - self.atom_mass) / self.block_mass, 0.0, 1.0)
            out = np.where(u <= self.atom_mass, 0.0, self.lo + frac * (self.hi - self.lo))
        return out if out.ndim else float(out)

    def mean(self) -> float:
        return self.block_mass * (self.lo + self.hi) / 2.0

    def sample(self, rng: np.random.Generator, size=None):
        if self.is_point_mass:
            return np.zeros(size) if size is not None else 0.0
        u = rng.random(size)
        x = self.lo + (self.hi - self.lo) * rng.random(size)
        return np.where(u < self.atom_mass, 0.0, x) if size is not None else (
            0.0 if u < self.atom_mass else float(x)
        )

    def to_dict(self) -> dict:
        return {"atom": self.atom_mass, "lo": self.lo, "hi": self.hi}


# -- exact pairwise probabilities -------------------------------------------


def _clamped_ramp_integral(x, lo: float, hi: float):
    """Antiderivative of clip((t - lo) / (hi - lo), 0, 1), zero for x <= lo."""
    x = np.asarray(x, dtype=float)
    width = hi - lo
    inside = (np.clip(x, lo, hi) - lo) ** 2 / (2.0 * width)
    return inside + np.maximum(x - hi, 0.0)


def _uniform_beats_uniform(lx: float, hx: float, ly: float, hy: float) -> float:
    """P(X > Y) for independent X ~ U[lx, hx], Y ~ U[ly, hy]."""
    ramp = _clamped_ramp_integral(hx, ly, hy) - _clamped_ramp_integral(lx, ly, hy)
    return float(ramp / (hx - lx))


def _uniform_cdf(x, lo: float, hi: float):
    return np.clip((np.asarray(x, dtype=float) - lo) / (hi - lo), 0.0, 1.0)


def win_prob_A(dA: AtomUniform, dB: AtomUniform, p: float, q: float, alpha: float) -> float:
    """P(A > qB - p) + alpha * P(A == qB - p) for independent A ~ dA, B ~ dB.

    Ties carry positive probability only when both atoms sit at the tie point,
    i.e. both players bid 0 and ``p == 0``; tie events involving a uniform
    block have probability zero.
    """
    a, b = dA.atom_mass, dB.atom_mass
    # B's threshold qB - p: atom at -p, block on [q lo - p, q hi - p]
    total = 0.0
    if a > 0 and b > 0:
        total += a * b * (1.0 if 0.0 > -p else alpha if p == 0.0 else 0.0)
    if b < 1:
        ly, hy = q * dB.lo - p, q * dB.hi - p
        if a > 0:
            total += a * (1 - b) * float(_uniform_cdf(0.0, ly, hy))
        if a < 1:
            total += (1 - a) * (1 - b) * _uniform_beats_uniform(dA.lo, dA.hi, ly, hy)
    if a < 1 and b > 0:
        total += (1 - a) * b * float(1.0 - _uniform_cdf(-p, dA.lo, dA.hi))
    return min(max(total, 0.0), 1.0)  # terms can overshoot by an ulp


def bid_win_prob_A(x, dB: AtomUniform, p: float, q: float, alpha: float):
    """Share of the battlefield A collects with the pure bid ``x`` against B ~ dB."""
    x = np.asarray(x, dtype=float)
    b = dB.atom_mass
    out = b * np.where(x > -p, 1.0, np.where(x == -p, alpha, 0.0))
    if b < 1:
        out = out + (1 - b) * _uniform_cdf(x, q * dB.lo - p, q * dB.hi - p)
    return out if out.ndim else float(out)


def bid_win_prob_B(y, dA: AtomUniform, p: float, q: float, alpha: float):
    """Share of the battlefield B collects with the pure bid ``y`` against A ~ dA.

    B wins when A < q*y - p and takes ``1 - alpha`` of ties.
    """
    y = np.asarray(y, dtype=float)
    t = q * y - p
    a = dA.atom_mass
    out = a * np.where(0.0 < t, 1.0, np.where(t == 0.0, 1.0 - alpha, 0.0))
    if a < 1:
        out = out + (1 - a) * _uniform_cdf(t, dA.lo, dA.hi)
    return out if out.ndim else float(out)
