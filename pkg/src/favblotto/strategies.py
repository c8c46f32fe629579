"""Playable strategies built from OUD marginals, Monte-Carlo payoffs and exploitability.

``GL`` draws every battlefield independently (budget met only on average),
``IU`` rescales such a draw so it spends the budget exactly, and
``UNIFORM_SPLIT`` is a naive baseline that spreads the budget evenly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .distributions import AtomUniform, bid_win_prob_A, bid_win_prob_B
from .game import GameInstance, Player, pure_payoffs_batch
from .oud import OudProfile

MAX_DP_CELLS = 10**8
_BATCH = 50_000


class StrategyKind(str, enum.Enum):
    GL = "GL"
    IU = "IU"
    UNIFORM_SPLIT = "UniformSplit"


@dataclass(frozen=True)
class StrategyProfile:
    kind: StrategyKind
    profile: OudProfile
    owner: Player
    budget: float

    @classmethod
    def for_game(cls, g: GameInstance, profile: OudProfile, owner: Player, kind) -> "StrategyProfile":
        owner = Player(owner)
        return cls(StrategyKind(kind), profile, owner, g.budget(owner))

    @property
    def marginals(self) -> tuple[AtomUniform, ...]:
        return self.profile.marginals(self.owner)

    @property
    def n(self) -> int:
        return len(self.profile)


def _marginal_arrays(sp: StrategyProfile):
    m = sp.marginals
    return (
        np.array([d.atom_mass for d in m]),
        np.array([d.lo for d in m]),
        np.array([d.hi for d in m]),
    )


def _independent_draws(sp: StrategyProfile, rng: np.random.Generator, size: int) -> np.ndarray:
    atom, lo, hi = _marginal_arrays(sp)
    u = rng.random((size, sp.n))
    v = rng.random((size, sp.n))
    return np.where(u < atom, 0.0, lo + (hi - lo) * v)


def sample_gl(sp: StrategyProfile, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Independent per-battlefield draws; shape (n,) or (size, n)."""
    out = _independent_draws(sp, rng, 1 if size is None else size)
    return out[0] if size is None else out


def rescale_to_budget(a: np.ndarray, budget: float) -> np.ndarray:
    """Scale one non-negative draw so it sums to ``budget`` exactly (even split if all zero)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    total = math.fsum(a)
    x = np.full(n, budget / n) if total == 0 else a / total * budget
    # the largest entry absorbs rounding so no entry can turn negative
    order = np.argsort(-x, kind="stable")
    x[order[0]] += budget - math.fsum(x)
    # The correction itself can round away. Nudge entries one ulp at a time,
    # largest first; a smaller entry has a finer ulp, which resolves sums that
    # straddle a rounding tie of the budget.
    for k in order[:4]:
        for _ in range(64):
            total = math.fsum(x)
            if total == budget:
                return x
            x[k] = math.nextafter(x[k], math.inf if total < budget else 0.0)
    return x


def rescale_rows_to_budget(a: np.ndarray, budget: float) -> np.ndarray:
    """Row-wise :func:`rescale_to_budget` with a single vectorised rounding correction."""
    a = np.asarray(a, dtype=float)
    n = a.shape[1]
    total = a.sum(axis=1, keepdims=True)
    zero = total[:, 0] == 0
    x = np.where(zero[:, None], budget / n, a / np.where(total == 0, 1.0, total) * budget)
    k = np.argmax(x, axis=1)
    rows = np.arange(len(x))
    x[rows, k] += budget - x.sum(axis=1)
    return x


def sample_iu(sp: StrategyProfile, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Independent draws rescaled to spend the budget; single draws sum to it exactly."""
    if size is None:
        return rescale_to_budget(sample_gl(sp, rng), sp.budget)
    return rescale_rows_to_budget(sample_gl(sp, rng, size), sp.budget)


def sample(sp: StrategyProfile, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    if sp.kind is StrategyKind.GL:
        return sample_gl(sp, rng, size)
    if sp.kind is StrategyKind.IU:
        return sample_iu(sp, rng, size)
    row = np.full(sp.n, sp.budget / sp.n)
    return row if size is None else np.tile(row, (size, 1))


def _paired_payoffs(g, spA, spB, samples, rng):
    for start in range(0, samples, _BATCH):
        size = min(_BATCH, samples - start)
        yield pure_payoffs_batch(g, sample(spA, rng, size), sample(spB, rng, size))


def _mean_and_stderr(chunks, total: int) -> tuple[float, float]:
    s = s2 = 0.0
    for c in chunks:
        s += float(c.sum())
        s2 += float((c * c).sum())
    mean = s / total
    if total < 2:
        return mean, 0.0
    var = max(s2 - total * mean * mean, 0.0) / (total - 1)
    return mean, math.sqrt(var / total)


def mc_payoff(
    g: GameInstance,
    spA: StrategyProfile,
    spB: StrategyProfile,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo estimate of A's payoff and its standard error."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if spA.owner is not Player.A or spB.owner is not Player.B:
        raise ValueError("spA must belong to player A and spB to player B")
    return _mean_and_stderr(_paired_payoffs(g, spA, spB, samples, rng), samples)


# -- best responses ------------------------------------------------------


def _grid(budget: float, grid_step: float) -> np.ndarray:
    if not grid_step > 0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")
    units = int(math.floor(budget / grid_step * (1 + 1e-12)))
    return np.arange(units + 1) * grid_step


def _knapsack(table: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximise sum_i table[i, k_i] subject to sum_i k_i <= K via max-plus convolution."""
    n, width = table.shape
    if n * width * width > MAX_DP_CELLS:
        raise ValueError(
            f"best-response grid needs {n * width * width:.3g} DP cells (limit {MAX_DP_CELLS:.0e}); "
            "use a coarser grid_step"
        )
    units = np.arange(width)
    choice = np.zeros((n, width), dtype=np.int64)
    # value[k]: best total over the battlefields so far using at most k units
    value = np.maximum.accumulate(table[0])
    earlier = np.concatenate(([-np.inf], value[:-1]))
    choice[0] = np.maximum.accumulate(np.where(table[0] > earlier, units, 0))
    chunk = max(1, 4_000_000 // width)
    for i in range(1, n):
        new = np.empty(width)
        for start in range(0, width, chunk):
            k = units[start : start + chunk, None]
            rest = k - units[None, :]
            cand = np.where(rest >= 0, value[np.clip(rest, 0, None)] + table[i][None, :], -np.inf)
            j = np.argmax(cand, axis=1)
            choice[i, start : start + chunk] = j
            new[start : start + chunk] = cand[np.arange(len(j)), j]
        value = new
    alloc = np.zeros(n, dtype=np.int64)
    k = width - 1
    for i in range(n - 1, -1, -1):
        alloc[i] = choice[i, k]
        k -= alloc[i]
    return alloc, float(value[-1])


def _bid_value_table(g: GameInstance, opponent, deviator: Player, bids: np.ndarray) -> np.ndarray:
    rows = []
    for b, d in zip(g.battlefields, opponent):
        if deviator is Player.A:
            rows.append(b.w * bid_win_prob_A(bids, d, b.p, b.q, g.alpha))
        else:
            rows.append(b.w * bid_win_prob_B(bids, d, b.p, b.q, g.alpha))
    return np.array(rows)


def best_response_gl(
    g: GameInstance,
    opponent: OudProfile | tuple[AtomUniform, ...],
    grid_step: float,
    deviator: Player = Player.A,
) -> tuple[np.ndarray, float]:
    """Best pure allocation on a ``grid_step`` lattice against independent opponent marginals.

    Returns the allocation and its exact payoff for the deviator.
    """
    deviator = Player(deviator)
    marginals = opponent.marginals(deviator.other) if isinstance(opponent, OudProfile) else opponent
    if len(marginals) != g.n:
        raise ValueError(f"opponent has {len(marginals)} marginals, game has {g.n} battlefields")
    bids = _grid(g.budget(deviator), grid_step)
    table = _bid_value_table(g, marginals, deviator, bids)
    alloc, _ = _knapsack(table)
    x = bids[alloc]
    return x, float(math.fsum(table[np.arange(g.n), alloc]))


def _empirical_table(g: GameInstance, draws: np.ndarray, deviator: Player, bids: np.ndarray) -> np.ndarray:
    """Deviator's value of each grid bid against the empirical marginals of ``draws``."""
    rows = []
    S = len(draws)
    for i, b in enumerate(g.battlefields):
        col = np.sort(draws[:, i])
        if deviator is Player.A:
            thr = b.q * col - b.p  # sorted as q > 0
            below = np.searchsorted(thr, bids, side="left")
            ties = np.searchsorted(thr, bids, side="right") - below
            share = (below + g.alpha * ties) / S
        else:
            t = b.q * bids - b.p
            below = np.searchsorted(col, t, side="left")
            ties = np.searchsorted(col, t, side="right") - below
            share = (below + (1.0 - g.alpha) * ties) / S
        rows.append(b.w * share)
    return np.array(rows)


def _pure_vs_samples(g, x, sp_opp, deviator, samples, rng):
    """Deviator's payoff chunks when playing the fixed allocation ``x`` against draws of ``sp_opp``."""
    for start in range(0, samples, _BATCH):
        size = min(_BATCH, samples - start)
        opp = sample(sp_opp, rng, size)
        mine = np.broadcast_to(x, opp.shape)
        if deviator is Player.A:
            yield pure_payoffs_batch(g, mine, opp)
        else:
            yield g.total_value - pure_payoffs_batch(g, opp, mine)


@dataclass(frozen=True)
class ExploitabilityReport:
    br_payoff: float
    eq_payoff: float
    epsilon_hat: float
    grid_step: float
    mc_samples: int
    mc_stderr: float
    br_stderr: float
    deviator: str
    exploited: str
    kind: str
    discretization_slack: float
    w_min: float
    w_max: float

    def to_dict(self) -> dict:
        return asdict(self)


def _slack(g: GameInstance, marginals, deviator: Player, grid_step: float) -> float:
    dens = []
    for b, d in zip(g.battlefields, marginals):
        if d.is_point_mass:
            dens.append(0.0)
        elif deviator is Player.A:
            dens.append(d.block_mass / (b.q * (d.hi - d.lo)))
        else:
            dens.append(b.q * d.block_mass / (d.hi - d.lo))
    return g.n * max(dens) * grid_step * float(np.max(g.w))


def exploitability(
    g: GameInstance,
    sp: StrategyProfile,
    grid_step: float,
    samples: int,
    rng: np.random.Generator,
) -> ExploitabilityReport:
    """How much the opponent of ``sp.owner`` gains by best-responding instead of playing along.

    The baseline payoff comes from both players using ``sp.kind`` on the same
    OUD profile. GL best responses are exact against the marginals; for the
    sampled kinds the best response is fitted on ``samples`` draws and then
    scored on a fresh, independent set so that overfitting does not inflate it.
    """
    exploited = sp.owner
    deviator = exploited.other
    mirror = StrategyProfile.for_game(g, sp.profile, deviator, sp.kind)
    spA, spB = (sp, mirror) if exploited is Player.A else (mirror, sp)
    eq_a, eq_se = mc_payoff(g, spA, spB, samples, rng)
    eq = eq_a if deviator is Player.A else g.total_value - eq_a
    if sp.kind is StrategyKind.GL:
        _, br = best_response_gl(g, sp.marginals, grid_step, deviator)
        br_se = 0.0
    else:
        bids = _grid(g.budget(deviator), grid_step)
        draws = sample(sp, rng, samples)
        alloc, _ = _knapsack(_empirical_table(g, draws, deviator, bids))
        x = bids[alloc]
        br, br_se = _mean_and_stderr(_pure_vs_samples(g, x, sp, deviator, samples, rng), samples)
    return ExploitabilityReport(
        br_payoff=br,
        eq_payoff=eq,
        epsilon_hat=br - eq,
        grid_step=grid_step,
        mc_samples=samples,
        mc_stderr=eq_se,
        br_stderr=br_se,
        deviator=deviator.value,
        exploited=exploited.value,
        kind=sp.kind.value,
        discretization_slack=_slack(g, sp.marginals, deviator, grid_step),
        w_min=float(np.min(g.w)),
        w_max=float(np.max(g.w)),
    )
