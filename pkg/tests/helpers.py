"""Shared fixtures-as-functions for the test modules."""

from __future__ import annotations

import math

import numpy as np

from favblotto.game import GameInstance, check_assumptions, make_game, random_instance
from favblotto.oud import Kappa

# two-battlefield instance with a closed-form solution
EX2_KAPPA = Kappa(2 + math.sqrt(4 / 3), 2 + math.sqrt(12))
# four-battlefield instance whose unique zero is (2, 2)
EX4_KAPPA = Kappa(2.0, 2.0)


def ex2() -> GameInstance:
    return make_game([1, 1], 2, 2, p=[-2, 0], q=[0.5, 1])


def ex4() -> GameInstance:
    return make_game([1, 2, 1, 2], 4, 4, p=[1, 1, -1, -1])


def classical(n: int, budget: float) -> GameInstance:
    return make_game([1.0] * n, budget, budget)


def solvable_seeds(n: int, count: int, start: int = 0) -> list[int]:
    """The first ``count`` seeds from ``start`` whose random instance passes both assumptions."""
    seeds = []
    s = start
    while len(seeds) < count:
        if check_assumptions(random_instance(n, s)).ok:
            seeds.append(s)
        s += 1
    return seeds


def rounded(g: GameInstance, digits: int = 3) -> GameInstance:
    """Same instance with w, p, q rounded, so exact-arithmetic oracles stay cheap."""
    return make_game(
        [round(float(v), digits) for v in g.w],
        g.xA,
        g.xB,
        [round(float(v), digits) for v in g.p],
        [round(float(v), digits) for v in g.q],
        g.alpha,
    )


def random_fapa(rng, regime: str):
    """A random auction instance that lands in ``regime`` (one of P1..N3)."""
    from favblotto.fapa import FapaInstance

    uA, uB = rng.uniform(0.5, 10, size=2)
    q = float(np.exp(rng.uniform(-1.5, 1.5)))
    alpha = float(rng.uniform())
    if regime[0] == "P":
        # reach = q uB - p: <= 0 (P1), in (0, uA] (P2), > uA (P3)
        if regime == "P1":
            p = q * uB + rng.uniform(0, 5)
        elif regime == "P2":
            p = q * uB - rng.uniform(0.01, 0.99) * uA
            if p < 0:
                uB = (rng.uniform(0.01, 0.99) * uA) / q
                p = 0.0 if rng.uniform() < 0.2 else rng.uniform(0, q * uB) * 0.5
                uB = uB + p / q
        else:
            p = rng.uniform(0, 3)
            uB = (uA + p) / q * rng.uniform(1.05, 3)
    else:
        # reach = (uA + p)/q: <= 0 (N1), in (0, uB] (N2), > uB (N3)
        if regime == "N1":
            p = -uA - rng.uniform(0, 5)
        elif regime == "N2":
            p = -uA * rng.uniform(0.05, 0.95)
            uB = (uA + p) / q * rng.uniform(1.0, 3)
        else:
            p = -uA * rng.uniform(0.05, 0.95)
            uB = (uA + p) / q * rng.uniform(0.1, 0.95)
    return FapaInstance(float(uA), float(uB), float(p), q, alpha)
