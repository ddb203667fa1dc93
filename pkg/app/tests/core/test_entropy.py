import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.entropy import (
    GenSet,
    ball_identity_total,
    big_F,
    check_ball_identity,
    check_delta_inequality,
    conditional_shannon,
    f_limit,
    f_markov,
    gens_ball,
    join_entropy,
    shannon,
    shannon_join_edge,
)
from app.core.errors import (
    NotADistributionError,
    NotLeftConnectedError,
    NotRightConnectedError,
    RankMismatchError,
)
from app.core.measures import FiniteAction, TreeMarkovMeasure, bernoulli, marginal
from app.core.sampling import (
    new_rng,
    random_bernoulli,
    random_connected_set,
    random_dist,
    random_finite_action,
    random_markov,
)
from app.core.words import Word, ball

LN2 = math.log(2)
LN3 = math.log(3)
H_QUARTER = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75))
F_SYMMETRIC = -LN2 + 2 * H_QUARTER


def w(text: str, rank: int = 2) -> Word:
    return Word.parse(text, rank)


def S(rank: int = 2) -> GenSet:
    return GenSet.letters(rank)


def test_shannon():
    assert shannon([0.25] * 4) == pytest.approx(math.log(4))
    assert shannon([1.0, 0.0]) == 0.0
    assert shannon([0.25, 0.75]) == pytest.approx(0.5623351, abs=1e-7)
    with pytest.raises(NotADistributionError):
        shannon([0.5, 0.6])
    with pytest.raises(NotADistributionError):
        shannon([-0.1, 1.1])


def test_conditional_shannon(symmetric_chain):
    assert conditional_shannon(np.full((2, 2), 0.25)) == pytest.approx(LN2)
    assert conditional_shannon(np.diag([0.5, 0.5])) == pytest.approx(0.0)
    assert conditional_shannon(symmetric_chain.pair_joint(1)) == pytest.approx(0.5623352, abs=1e-7)


def test_chain_rule():
    rng = new_rng(1)
    for _ in range(50):
        joint = rng.dirichlet(np.ones(9)).reshape(3, 3)
        assert shannon(joint) == pytest.approx(
            conditional_shannon(joint) + shannon(joint.sum(axis=0)), abs=1e-12
        )


def test_gen_set_validation():
    assert S(3).size == 3
    assert S(3).group_rank == 3
    with pytest.raises(ValidationError):
        GenSet(words=())
    with pytest.raises(ValidationError):
        GenSet(words=(w("a"), w("e")))
    with pytest.raises(ValidationError):
        GenSet(words=(w("a"), w("a")))
    with pytest.raises(RankMismatchError):
        GenSet(words=(w("a"), w("a", 3)))


def test_gens_ball():
    assert gens_ball(S(), 1) == ball(2, 1)
    T = GenSet(words=(w("aa"),))
    assert gens_ball(T, 2) == (w("e"), w("aa"), w("AA"), w("aaaa"), w("AAAA"))


def test_big_F_examples(fair_coin, symmetric_chain, trivial_three):
    e = {w("e")}
    assert big_F(fair_coin, S(), e).value == pytest.approx(LN2)
    assert big_F(symmetric_chain, S(), e).value == pytest.approx(F_SYMMETRIC)
    assert big_F(trivial_three, S(), e).value == pytest.approx(-LN3)
    assert big_F(trivial_three, S(), ball(2, 2)).value == pytest.approx(-LN3)


def test_big_F_report_forms_agree(symmetric_chain):
    report = big_F(symmetric_chain, S(), {w("e"), w("b")})
    r = len(report.terms)
    assert report.consistency_gap() < 1e-12
    conditional_form = (1 - r) * report.base_entropy + sum(
        t.joint_entropy - report.base_entropy for t in report.terms
    )
    assert conditional_form == pytest.approx(report.value, abs=1e-12)
    assert [t.generator for t in report.terms] == ["a", "b"]


def test_big_F_rejects_empty_base(symmetric_chain):
    with pytest.raises(ValueError):
        big_F(symmetric_chain, S(), set())


def test_f_markov(symmetric_chain, deterministic_chain):
    assert f_markov(bernoulli([1 / 3, 2 / 3], 2)) == pytest.approx(math.log(3) - 2 * LN2 / 3)
    half = np.full((2, 2), 0.5)
    assert f_markov(bernoulli([0.5, 0.5], 2)) == pytest.approx(LN2)
    assert f_markov(TreeMarkovMeasure(pi=[0.5, 0.5], trans=[half, half])) == pytest.approx(LN2)
    assert f_markov(deterministic_chain) == pytest.approx(-LN2)
    assert f_markov(symmetric_chain) == pytest.approx(F_SYMMETRIC)


def test_f_limit_markov_is_constant(symmetric_chain):
    report = f_limit(symmetric_chain, n_max=2)
    assert report.radius == 2
    assert len(report.sequence) == 3
    for value in report.sequence:
        assert value == pytest.approx(F_SYMMETRIC)


def test_f_limit_trivial_action(trivial_three):
    report = f_limit(trivial_three)
    assert report.stabilized
    assert report.radius == 0
    assert report.sequence == [pytest.approx(-LN3)]


def test_f_limit_swap(swap_points):
    report = f_limit(swap_points)
    assert report.stabilized
    assert report.value == pytest.approx(-LN2)


def test_f_limit_rotation_needs_refinement():
    # a rotates four points and alpha only sees which half a point lies in; B(1)·α separates points
    fa = FiniteAction(
        rank=2, perms=[[1, 2, 3, 0], [0, 1, 2, 3]], mu=[0.25] * 4, alpha=[0, 0, 1, 1]
    )
    report = f_limit(fa)
    assert report.stabilized
    assert report.sequence[0] > report.sequence[-1]
    assert report.value == pytest.approx(-math.log(4))


def test_shannon_join_edge(symmetric_chain, fair_coin):
    assert shannon_join_edge(symmetric_chain, {w("e")}) == pytest.approx(LN2)
    F = {w("e"), w("a"), w("ab")}
    assert shannon_join_edge(symmetric_chain, F) == pytest.approx(LN2 + 2 * H_QUARTER)
    assert shannon_join_edge(fair_coin, ball(2, 1)) == pytest.approx(5 * LN2)
    with pytest.raises(NotRightConnectedError):
        shannon_join_edge(symmetric_chain, {w("e"), w("aa")})


def test_join_entropy_routes_agree(symmetric_chain):
    F = {w("e"), w("aa")}
    assert join_entropy(symmetric_chain, F) == pytest.approx(shannon(marginal(symmetric_chain, F)))


def test_edge_formula_matches_enumeration():
    rng = new_rng(5)
    for _ in range(200):
        rank = int(rng.integers(2, 4))
        tm = random_markov(rng, rank, int(rng.integers(2, 4)))
        F = random_connected_set(rng, rank, int(rng.integers(1, 6)), "right")
        assert abs(shannon_join_edge(tm, F) - shannon(marginal(tm, F))) <= 1e-9


def test_past_is_conditionally_independent(symmetric_chain):
    # {e} separates {a} from {A}: H(a·α | α ∨ A·α) = H(a·α | α)
    three = shannon(marginal(symmetric_chain, [w("A"), w("e"), w("a")]))
    two = shannon(marginal(symmetric_chain, [w("A"), w("e")]))
    assert three - two == pytest.approx(conditional_shannon(symmetric_chain.pair_joint(1)), abs=1e-9)


def test_ball_identity():
    assert check_ball_identity(2, {w("e")})
    assert ball_identity_total(2, ball(2, 1)) == 1
    assert check_ball_identity(2, ball(2, 2))
    assert check_ball_identity(3, ball(3, 2))
    with pytest.raises(NotLeftConnectedError):
        check_ball_identity(2, {w("e"), w("ab")})


def test_ball_identity_on_random_sets():
    rng = new_rng(6)
    for _ in range(200):
        rank = int(rng.integers(2, 4))
        K = random_connected_set(rng, rank, int(rng.integers(1, 10)), "left")
        assert check_ball_identity(rank, K)


def test_delta_inequality(symmetric_chain, fair_coin, deterministic_chain):
    result = check_delta_inequality(symmetric_chain, {w("e"), w("a")})
    assert result.holds
    assert result.per_element == pytest.approx((LN2 + H_QUARTER) / 2)
    assert check_delta_inequality(fair_coin, ball(2, 1)).per_element == pytest.approx(LN2)
    result = check_delta_inequality(deterministic_chain, {w("e"), w("a")})
    assert result.holds
    assert result.per_element == pytest.approx(LN2 / 2)


def test_delta_inequality_on_random_measures():
    rng = new_rng(7)
    for _ in range(50):
        rank = int(rng.integers(2, 4))
        tm = random_markov(rng, rank, int(rng.integers(2, 4)))
        delta = random_connected_set(rng, rank, int(rng.integers(1, 5)), "right")
        assert check_delta_inequality(tm, delta).holds


def test_bernoulli_entropy():
    rng = new_rng(8)
    for _ in range(100):
        tm = random_bernoulli(rng, int(rng.integers(2, 4)), int(rng.integers(2, 6)))
        for matrix in tm.trans:
            np.testing.assert_allclose(matrix, np.tile(tm.pi, (tm.m, 1)))
        assert abs(f_markov(tm) - shannon(tm.pi)) <= 1e-12


def test_trivial_actions():
    rng = new_rng(9)
    for rank in (2, 3):
        for n in range(1, 7):
            mu = random_dist(rng, n)
            identity = list(range(n))
            fa = FiniteAction(rank=rank, perms=[identity] * rank, mu=mu, alpha=identity)
            report = f_limit(fa)
            assert report.stabilized
            assert abs(report.value - (1 - rank) * shannon(mu)) <= 1e-12


def test_markov_ball_sequences_are_constant():
    rng = new_rng(11)
    for _ in range(10):
        tm = random_markov(rng, 2, 2)
        report = f_limit(tm, n_max=2)
        assert max(report.sequence) - min(report.sequence) <= 1e-9
        assert report.value == pytest.approx(f_markov(tm), abs=1e-9)


def test_finite_sequences_never_increase():
    rng = new_rng(12)
    for _ in range(100):
        fa = random_finite_action(rng, int(rng.integers(2, 4)))
        report = f_limit(fa)
        assert report.stabilized
        assert all(b <= a + 1e-12 for a, b in zip(report.sequence, report.sequence[1:]))
