import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from favblotto.game import (
    Battlefield,
    GameInstance,
    Player,
    blotto,
    check_assumptions,
    is_feasible,
    make_game,
    pure_payoffs,
    pure_payoffs_batch,
    random_instance,
)
from helpers import ex2


@pytest.mark.parametrize("x,y,alpha,expected", [(2, 1, 0.5, 1.0), (1, 1, 0.5, 0.5), (0, 0.5, 0.3, 0.0)])
def test_blotto_cases(x, y, alpha, expected):
    assert blotto(x, y, alpha) == expected


def test_pure_payoffs_symmetric_tie():
    g = make_game([1], 1, 1)
    assert pure_payoffs(g, [1], [1]) == (0.5, 0.5)


def test_pure_payoffs_head_start_wins_with_nothing():
    g = make_game([2], 1, 1, p=[1])
    assert pure_payoffs(g, [0], [0.5]) == (2.0, 0.0)


def test_pure_payoffs_dimension_mismatch():
    g = make_game([1, 1], 1, 1)
    with pytest.raises(ValueError):
        pure_payoffs(g, [1], [0, 1])


def test_battlefield_and_game_validation():
    with pytest.raises(ValueError):
        Battlefield(0.0)
    with pytest.raises(ValueError):
        Battlefield(1.0, q=0.0)
    with pytest.raises(ValueError):
        make_game([1], 0, 1)
    with pytest.raises(ValueError):
        make_game([1], 1, 1, alpha=1.5)
    with pytest.raises(ValueError):
        GameInstance((), 1, 1)


def test_feasibility_tolerance():
    g = make_game([1, 1], 2, 3)
    assert is_feasible(g, [1, 1 + 1e-10], Player.A)
    assert not is_feasible(g, [1, 1.01], Player.A)
    assert not is_feasible(g, [-0.1, 1], Player.A)


def test_swap_normalisation_is_recorded():
    g = make_game([1, 2], 5, 2, p=[1, -2], q=[2, 0.5], alpha=0.3)
    assert g.swapped
    assert (g.xA, g.xB, g.alpha) == (2.0, 5.0, 0.7)
    assert g.battlefields[0] == Battlefield(1, -0.5, 0.5)
    assert g.battlefields[1] == Battlefield(2, 4.0, 2.0)
    assert g.to_caller((1, 2)) == (2, 1)
    assert g.caller_player(Player.A) is Player.B
    assert g.to_dict()["xA"] == 5.0


def test_json_roundtrip_and_unknown_fields():
    g = ex2()
    again = GameInstance.from_json(g.to_json())
    assert again == g
    doc = json.loads(g.to_json())
    doc["extra"] = 1
    with pytest.raises(ValueError):
        GameInstance.from_dict(doc)
    doc = json.loads(g.to_json())
    doc["battlefields"][0]["r"] = 1
    with pytest.raises(ValueError):
        GameInstance.from_dict(doc)
    # field order is irrelevant
    reordered = {"battlefields": [{"q": 0.5, "p": -2, "w": 1}, {"w": 1}], "alpha": 0.5, "xB": 2, "xA": 2}
    assert GameInstance.from_dict(reordered) == g


def test_assumptions_on_two_battlefield_example():
    s = check_assumptions(ex2())
    assert s.a1_holds and s.a2_violators == () and s.ok


def test_assumption_two_violation():
    s = check_assumptions(make_game([1], 1, 1, p=[2]))
    assert s.a2_violators == (0,)
    assert s.a2_winners == (Player.A,)


def test_assumption_one_violation_names_winner():
    s = check_assumptions(make_game([1], 1, 10, q=[0.05]))
    assert not s.a1_holds
    assert s.trivial_winner is Player.A


def test_random_instance_determinism_and_bounds():
    assert random_instance(5, 42) == random_instance(5, 42)
    g = random_instance(100, 7)
    assert np.all(g.w > 0) and np.all(g.w <= g.xA)
    assert np.all(g.q > 0)
    assert 1 <= g.xA <= g.xB <= 100
    with pytest.raises(ValueError):
        random_instance(0, 1)


def test_random_instance_zero_head_start_frequency():
    zeros = sum(float(random_instance(5, s).p[1]) == 0.0 for s in range(10_000))
    assert abs(zeros / 10_000 - 1 / 3) <= 0.02


dyadic_q = st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0])
quarter = st.integers(-12, 12).map(lambda k: k / 4)
nonneg_quarter = st.integers(0, 16).map(lambda k: k / 4)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(1, 5),
    data=st.data(),
    alpha=st.sampled_from([0.0, 0.25, 0.5, 1.0]),
)
def test_role_swap_preserves_pure_payoffs(n, data, alpha):
    # dyadic parameters keep q*x - p and (x + p)/q exact, so ties survive the swap
    w = data.draw(st.lists(st.integers(1, 4).map(float), min_size=n, max_size=n))
    p = data.draw(st.lists(quarter, min_size=n, max_size=n))
    q = data.draw(st.lists(dyadic_q, min_size=n, max_size=n))
    a = data.draw(st.lists(nonneg_quarter, min_size=n, max_size=n))
    b = data.draw(st.lists(nonneg_quarter, min_size=n, max_size=n))
    g = make_game(w, 6, 3, p, q, alpha)  # xA > xB forces the swap
    assert g.swapped
    direct = sum(wi * blotto(ai, qi * bi - pi, alpha) for wi, pi, qi, ai, bi in zip(w, p, q, a, b))
    inner_a, inner_b = pure_payoffs(g, b, a)
    assert g.to_caller((inner_a, inner_b)) == (direct, sum(w) - direct)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000), draws=st.integers(1, 20))
def test_constant_sum(seed, draws):
    g = random_instance(4, seed)
    rng = np.random.default_rng(seed)
    xa = rng.dirichlet(np.ones(g.n), size=draws) * g.xA
    xb = rng.dirichlet(np.ones(g.n), size=draws) * g.xB
    batch = pure_payoffs_batch(g, xa, xb)
    for row in range(draws):
        piA, piB = pure_payoffs(g, xa[row], xb[row])
        assert piA + piB == g.total_value or abs(piA + piB - g.total_value) <= 1e-12 * g.total_value
        assert batch[row] == pytest.approx(piA, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), perm_seed=st.integers(0, 1000))
def test_assumptions_permutation_invariant(seed, perm_seed):
    g = random_instance(6, seed)
    perm = np.random.default_rng(perm_seed).permutation(g.n)
    h = GameInstance(tuple(g.battlefields[i] for i in perm), g.xA, g.xB, g.alpha)
    s, t = check_assumptions(g), check_assumptions(h)
    assert s.a1_holds == t.a1_holds and s.trivial_winner == t.trivial_winner
    assert sorted(int(perm[j]) for j in t.a2_violators) == sorted(s.a2_violators)


def test_pure_payoffs_grid_against_direct_formula():
    g = make_game([1, 3], 2, 2, p=[0.5, -0.5], q=[2, 0.5], alpha=0.25)
    grid = [0, 0.5, 1, 1.5, 2]
    for a0, a1, b0, b1 in itertools.product(grid, repeat=4):
        exp = blotto(a0, 2 * b0 - 0.5, 0.25) + 3 * blotto(a1, 0.5 * b1 + 0.5, 0.25)
        assert pure_payoffs(g, [a0, a1], [b0, b1])[0] == exp
