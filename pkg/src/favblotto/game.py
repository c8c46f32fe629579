"""Colonel Blotto / General Lotto instances with favoritism.

A battlefield carries a value ``w``, an additive head start ``p`` (positive
favours player A) and an effectiveness ratio ``q`` (one unit of B's resource
counts as ``q`` units of A's). Player A wins battlefield ``i`` when
``x_A > q * x_B - p``; exact ties pay A a share ``alpha``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np


class Player(str, enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "Player":
        return Player.B if self is Player.A else Player.A


@dataclass(frozen=True)
class Battlefield:
    w: float
    p: float = 0.0
    q: float = 1.0

    def __post_init__(self) -> None:
        for name in ("w", "p", "q"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"battlefield {name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.w <= 0:
            raise ValueError(f"battlefield value w must be > 0, got {self.w}")
        if self.q <= 0:
            raise ValueError(f"effectiveness q must be > 0, got {self.q}")

    def swapped(self) -> "Battlefield":
        """The same battlefield seen from the opponent's side."""
        return Battlefield(self.w, -self.p / self.q, 1.0 / self.q)


@dataclass(frozen=True)
class GameInstance:
    """A game with ``0 < xA <= xB``.

    Instances given with ``xA > xB`` are normalised on construction by
    exchanging the players' roles; ``swapped`` records this so results can be
    reported back in the caller's labels (see :meth:`to_caller`).
    """

    battlefields: tuple[Battlefield, ...]
    xA: float
    xB: float
    alpha: float = 0.5
    swapped: bool = field(default=False, init=False)
    _caller: dict = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        bfs = tuple(
            b if isinstance(b, Battlefield) else Battlefield(**b) for b in self.battlefields
        )
        if len(bfs) < 1:
            raise ValueError("a game needs at least one battlefield")
        xA, xB, alpha = float(self.xA), float(self.xB), float(self.alpha)
        if not (np.isfinite(xA) and np.isfinite(xB)) or xA <= 0 or xB <= 0:
            raise ValueError(f"budgets must be finite and > 0, got xA={xA}, xB={xB}")
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"tie parameter alpha must lie in [0, 1], got {alpha}")
        caller = {
            "xA": xA,
            "xB": xB,
            "alpha": alpha,
            "battlefields": [{"w": b.w, "p": b.p, "q": b.q} for b in bfs],
        }
        swapped = xA > xB
        if swapped:
            bfs = tuple(b.swapped() for b in bfs)
            xA, xB, alpha = xB, xA, 1.0 - alpha
        object.__setattr__(self, "battlefields", bfs)
        object.__setattr__(self, "xA", xA)
        object.__setattr__(self, "xB", xB)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "swapped", swapped)
        object.__setattr__(self, "_caller", caller)

    @property
    def n(self) -> int:
        return len(self.battlefields)

    @property
    def total_value(self) -> float:
        """W^n, the sum of battlefield values."""
        return float(sum(b.w for b in self.battlefields))

    def budget(self, player: Player) -> float:
        return self.xA if player is Player.A else self.xB

    def _column(self, name: str) -> np.ndarray:
        arr = np.array([getattr(b, name) for b in self.battlefields])
        arr.setflags(write=False)
        return arr

    @cached_property
    def w(self) -> np.ndarray:
        return self._column("w")

    @cached_property
    def p(self) -> np.ndarray:
        return self._column("p")

    @cached_property
    def q(self) -> np.ndarray:
        return self._column("q")

    def to_caller(self, pair):
        """Map an (A, B) pair from internal labels to the caller's labels."""
        a, b = pair
        return (b, a) if self.swapped else (a, b)

    def caller_player(self, player: Player) -> Player:
        """Internal player corresponding to the caller's ``player`` (an involution)."""
        return player.other if self.swapped else player

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict:
        """The instance as the caller specified it (before normalisation)."""
        return json.loads(json.dumps(self._caller))

    def to_json(self, **kwargs: Any) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "GameInstance":
        if not isinstance(data, dict):
            raise ValueError("instance document must be a JSON object")
        allowed = {"xA", "xB", "alpha", "battlefields"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown instance fields: {sorted(unknown)}")
        missing = {"xA", "xB", "battlefields"} - set(data)
        if missing:
            raise ValueError(f"missing instance fields: {sorted(missing)}")
        bfs = []
        for i, bf in enumerate(data["battlefields"]):
            if not isinstance(bf, dict):
                raise ValueError(f"battlefield {i} must be an object")
            extra = set(bf) - {"w", "p", "q"}
            if extra:
                raise ValueError(f"unknown fields in battlefield {i}: {sorted(extra)}")
            if "w" not in bf:
                raise ValueError(f"battlefield {i} is missing 'w'")
            bfs.append(Battlefield(bf["w"], bf.get("p", 0.0), bf.get("q", 1.0)))
        return cls(tuple(bfs), data["xA"], data["xB"], data.get("alpha", 0.5))

    @classmethod
    def from_json(cls, text: str) -> "GameInstance":
        return cls.from_dict(json.loads(text))


def make_game(
    w: Sequence[float],
    xA: float,
    xB: float,
    p: Sequence[float] | None = None,
    q: Sequence[float] | None = None,
    alpha: float = 0.5,
) -> GameInstance:
    """Convenience constructor from parallel value/advantage arrays."""
    n = len(w)
    p = [0.0] * n if p is None else list(p)
    q = [1.0] * n if q is None else list(q)
    if len(p) != n or len(q) != n:
        raise ValueError("w, p and q must have the same length")
    return GameInstance(tuple(Battlefield(*t) for t in zip(w, p, q)), xA, xB, alpha)


# -- payoffs -----------------------------------------------------------


def blotto(x: float, y: float, alpha: float) -> float:
    """1 if x beats y, alpha on an exact tie, 0 otherwise."""
    if x > y:
        return 1.0
    if x == y:
        return alpha
    return 0.0


def _check_allocation(g: GameInstance, x: Sequence[float], player: Player) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != g.n:
        raise ValueError(
            f"allocation for player {player.value} has {arr.shape[-1]} entries, game has {g.n}"
        )
    return arr


def is_feasible(g: GameInstance, x: Sequence[float], player: Player) -> bool:
    arr = _check_allocation(g, x, player)
    budget = g.budget(player)
    return bool(np.all(arr >= 0) and arr.sum() <= budget * (1 + 1e-9))


def pure_payoffs(g: GameInstance, xA: Sequence[float], xB: Sequence[float]) -> tuple[float, float]:
    a = _check_allocation(g, xA, Player.A)
    b = _check_allocation(g, xB, Player.B)
    pi_a = 0.0
    for i, bf in enumerate(g.battlefields):
        pi_a += bf.w * blotto(a[i], bf.q * b[i] - bf.p, g.alpha)
    return pi_a, g.total_value - pi_a


def pure_payoffs_batch(g: GameInstance, xA: np.ndarray, xB: np.ndarray) -> np.ndarray:
    """Player A's payoff for each row of paired allocation arrays of shape (S, n)."""
    a = _check_allocation(g, xA, Player.A)
    b = _check_allocation(g, xB, Player.B)
    threshold = g.q * b - g.p
    share = np.where(a > threshold, 1.0, np.where(a == threshold, g.alpha, 0.0))
    return share @ g.w


# -- standing assumptions ------------------------------------------------


@dataclass(frozen=True)
class AssumptionStatus:
    a1_holds: bool
    a2_violators: tuple[int, ...]
    trivial_winner: Player | None = None
    # per violator: the player who wins that battlefield by allocating nothing
    a2_winners: tuple[Player, ...] = ()

    @property
    def ok(self) -> bool:
        return self.a1_holds and not self.a2_violators


def check_assumptions(g: GameInstance) -> AssumptionStatus:
    p, q = g.p, g.q
    reach_a = q * g.xB - p  # what A must beat on each battlefield if B goes all-in
    reach_b = (g.xA + p) / q
    a_sweeps = reach_a.sum() < g.xA
    b_sweeps = reach_b.sum() < g.xB
    winner = Player.A if a_sweeps else Player.B if b_sweeps else None
    violators = []
    winners = []
    for i in range(g.n):
        if reach_a[i] < 0:
            violators.append(i)
            winners.append(Player.A)
        elif reach_b[i] < 0:
            violators.append(i)
            winners.append(Player.B)
    return AssumptionStatus(
        a1_holds=not (a_sweeps or b_sweeps),
        a2_violators=tuple(violators),
        trivial_winner=winner,
        a2_winners=tuple(winners),
    )


def random_instance(n: int, seed: int) -> GameInstance:
    """Random instance following the recipe used for the timing experiments.

    Budgets are uniform integers in 1..100 with xA <= xB; values w ~ U(0, xA];
    each p is positive, negative or zero with equal odds (U(0, xA), U(-xA, 0));
    each q is above, below or equal to one with equal odds (U(1, xA), U(1/xA, 1)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    budgets = np.sort(rng.integers(1, 101, size=2))
    xA, xB = float(budgets[0]), float(budgets[1])
    # U(0, xA]: flip the half-open interval of uniform()
    w = xA - rng.uniform(0.0, xA, size=n)
    p_kind = rng.integers(0, 3, size=n)
    p_draw = rng.uniform(0.0, xA, size=n)
    p = np.where(p_kind == 0, p_draw, np.where(p_kind == 1, -p_draw, 0.0))
    q_kind = rng.integers(0, 3, size=n)
    q_hi = rng.uniform(1.0, max(xA, 1.0), size=n)
    q_lo = rng.uniform(1.0 / xA, 1.0, size=n)
    q = np.where(q_kind == 0, q_hi, np.where(q_kind == 1, q_lo, 1.0))
    # xA == 1 collapses both q ranges to {1}
    return make_game(w.tolist(), xA, xB, p.tolist(), q.tolist(), alpha=0.5)
