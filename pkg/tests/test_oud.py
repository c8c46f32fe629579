import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from favblotto.distributions import AtomUniform, win_prob_A
from favblotto.game import Battlefield, make_game, random_instance
from favblotto.oud import (
    IndexClass,
    Kappa,
    build_ouds,
    classify_battlefield,
    oud_payoffs,
    residual,
    residual_batch,
)
from helpers import EX2_KAPPA, EX4_KAPPA, classical, ex2, ex4
from oracles import table_cdfs, table_class

battlefields = st.builds(
    Battlefield,
    w=st.floats(0.05, 20),
    p=st.one_of(st.just(0.0), st.floats(-20, 20)),
    q=st.floats(0.05, 20),
)
kappas = st.builds(Kappa, st.floats(1e-3, 20), st.floats(1e-3, 20))


def test_classify_two_battlefield_example():
    g = ex2()
    assert classify_battlefield(g.battlefields[0], EX2_KAPPA) is IndexClass.IN2
    assert classify_battlefield(g.battlefields[1], EX2_KAPPA) is IndexClass.IP3
    assert classify_battlefield(Battlefield(1, 3, 1), Kappa(1, 1)) is IndexClass.IP1


def test_build_ouds_four_battlefield_example():
    prof = build_ouds(ex4(), EX4_KAPPA)
    first = prof[0]
    assert first.cls is IndexClass.IP2
    assert first.fA.atom_mass == pytest.approx(0.5)
    assert (first.fA.lo, first.fA.hi) == (0.0, pytest.approx(1.0))


def test_build_ouds_classical_is_uniform():
    prof = build_ouds(classical(5, 3.0), Kappa(1.2, 1.2))
    for e in prof:
        assert e.cls is IndexClass.IP2
        assert e.fA == AtomUniform.uniform(0, 1.2) and e.fB == AtomUniform.uniform(0, 1.2)


def test_nonpositive_kappa_rejected():
    g = ex4()
    for k in (Kappa(0, 1), Kappa(1, -1)):
        with pytest.raises(ValueError):
            build_ouds(g, k)
        with pytest.raises(ValueError):
            residual(g, k)
        with pytest.raises(ValueError):
            oud_payoffs(g, k)


def test_residual_examples():
    assert residual(ex4(), EX4_KAPPA).norm_inf <= 1e-12
    assert residual(ex2(), EX2_KAPPA).norm_inf <= 1e-9
    for n, X in ((3, 2.0), (10, 5.0), (7, 1.3)):
        lam = 2 * X / n
        assert residual(classical(n, X), Kappa(lam, lam)).norm_inf <= 1e-12


def test_payoff_examples():
    g = classical(4, 10.0)
    assert oud_payoffs(g, Kappa(5, 5)) == pytest.approx((2.0, 2.0))
    spread = make_game([1, 1, 1, 5], 10, 10)
    lam = 10 / 4  # sum of w*lam/2 over battlefields equals the budget
    assert residual(spread, Kappa(lam, lam)).norm_inf <= 1e-12
    assert oud_payoffs(spread, Kappa(lam, lam))[0] == pytest.approx(4.0)


def test_oud_json_shape():
    d = build_ouds(ex2(), EX2_KAPPA).to_dict()
    assert set(d["battlefields"][0]) == {"class", "fA", "fB", "meanA", "meanB"}


@settings(max_examples=300, deadline=None)
@given(b=battlefields, k=kappas)
def test_classification_matches_table(b, k):
    assert classify_battlefield(b, k).value == table_class(b.w, b.p, b.q, k.lamA, k.lamB)


@settings(max_examples=200, deadline=None)
@given(b=battlefields, k=kappas)
def test_marginals_match_table_rows(b, k):
    g = make_game([b.w], 1, 1, [b.p], [b.q])
    e = build_ouds(g, k)[0]
    top = max(e.fA.hi, e.fB.hi, 1.0)
    probes = np.linspace(0, top * 1.1, 20)
    cls, FA, FB = table_cdfs(b.w, b.p, b.q, k.lamA, k.lamB, probes)
    assert e.cls.value == cls
    np.testing.assert_allclose(e.fA.cdf(probes), FA, rtol=0, atol=1e-12)
    np.testing.assert_allclose(e.fB.cdf(probes), FB, rtol=0, atol=1e-12)


def test_partition_totality():
    # exactly one of the six table conditions holds, checked against each raw condition
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        w, q = rng.uniform(0.05, 10, size=2)
        p = 0.0 if rng.uniform() < 0.1 else rng.uniform(-10, 10)
        la, lb = rng.uniform(1e-3, 10, size=2)
        conds = [
            p >= 0 and q * w * lb - p <= 0,
            p >= 0 and 0 < q * w * lb - p <= w * la,
            p >= 0 and q * w * lb - p > w * la,
            p < 0 and w * la <= -p,
            p < 0 and -p < w * la <= q * w * lb - p,
            p < 0 and w * la > max(-p, q * w * lb - p),
        ]
        assert sum(conds) == 1
        assert classify_battlefield(Battlefield(w, p, q), Kappa(la, lb)) is list(IndexClass)[conds.index(True)]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 5000), k=kappas)
def test_residual_is_mean_overspend_scaled(seed, k):
    # each residual equals a multiplier times the opposing player's expected overspend
    g = random_instance(6, seed)
    prof = build_ouds(g, k)
    r = residual(g, k)
    scale = k.lamA * g.xB + k.lamB * g.xA + 1.0
    assert r.gA == pytest.approx(k.lamA * (prof.total_mean("B") - g.xB), abs=1e-10 * scale)
    assert r.gB == pytest.approx(k.lamB * (prof.total_mean("A") - g.xA), abs=1e-10 * scale)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 5000), k=kappas)
def test_payoff_formula_matches_integral_and_bounds(seed, k):
    g = random_instance(5, seed)
    prof = build_ouds(g, k)
    piA, piB = oud_payoffs(g, k)
    integral = math.fsum(
        b.w * win_prob_A(e.fA, e.fB, b.p, b.q, g.alpha) for b, e in zip(g.battlefields, prof)
    )
    assert piA == pytest.approx(integral, abs=1e-9 * max(1.0, g.total_value))
    assert -1e-12 <= piA <= g.total_value + 1e-12
    assert piA + piB == pytest.approx(g.total_value)


def test_batch_matches_scalar():
    g = random_instance(8, 2)
    la = np.array([0.3, 1.0, 4.0])
    lb = np.array([2.0, 0.5, 4.0])
    gA, gB = residual_batch(g, la, lb)
    for i in range(3):
        r = residual(g, Kappa(la[i], lb[i]))
        assert gA[i] == pytest.approx(r.gA, rel=1e-13) and gB[i] == pytest.approx(r.gB, rel=1e-13)


@pytest.mark.parametrize("seed", range(10))
def test_residual_eventually_negative_in_own_multiplier(seed):
    g = random_instance(6, seed)
    lamB = 1.0
    lams = np.geomspace(1e-3, 1e6, 60)
    gA, _ = residual_batch(g, lams, np.full_like(lams, lamB))
    assert gA[-1] < 0
    assert np.all(np.isfinite(gA))
