import numpy as np
import pytest

from app.core.errors import (
    BadStochasticError,
    HullTooLargeError,
    NonBijectiveError,
    NotInvariantError,
    NotStationaryError,
    RankMismatchError,
    ZeroMassError,
)
from app.core.measures import (
    FiniteAction,
    bernoulli,
    canonical_labels,
    cell_masses,
    cylinder_prob,
    join_labeling,
    marginal,
    new_tree_markov,
    uniform_trivial_action,
)
from app.core.sampling import new_rng, random_connected_set, random_finite_action, random_markov
from app.core.words import Word, ball, sorted_words


def w(text: str, rank: int = 2) -> Word:
    return Word.parse(text, rank)


def test_pair_joint(symmetric_chain):
    np.testing.assert_allclose(symmetric_chain.pair_joint(1), [[0.375, 0.125], [0.125, 0.375]])
    assert symmetric_chain.m == 2
    assert symmetric_chain.rank == 2


def test_arrays_are_read_only(symmetric_chain):
    with pytest.raises(ValueError):
        symmetric_chain.pi[0] = 1.0


def test_validation():
    with pytest.raises(BadStochasticError):
        new_tree_markov([0.5, 0.6], [[[1, 0], [0, 1]]])
    with pytest.raises(BadStochasticError):
        new_tree_markov([0.5, 0.5], [[[1.5, -0.5], [0, 1]]])
    with pytest.raises(BadStochasticError):
        new_tree_markov([0.5, 0.5], [[[1, 0, 0], [0, 1, 0]]])
    with pytest.raises(NotStationaryError):
        new_tree_markov([0.5, 0.5], [[[1, 0], [1, 0]]])
    with pytest.raises(ZeroMassError):
        new_tree_markov([1.0, 0.0], [[[1, 0], [0, 1]]])


def test_cylinders(symmetric_chain):
    assert cylinder_prob(symmetric_chain, {w("e"): 1}) == pytest.approx(0.5)
    assert cylinder_prob(symmetric_chain, {w("e"): 0, w("a"): 0}) == pytest.approx(0.375)
    assert cylinder_prob(symmetric_chain, {w("e"): 0, w("A"): 1}) == pytest.approx(0.125)
    # a² two steps away: 0.5 · (P²)[0, 0]
    assert cylinder_prob(symmetric_chain, {w("e"): 0, w("aa"): 0}) == pytest.approx(0.3125)
    with pytest.raises(ValueError):
        cylinder_prob(symmetric_chain, {})


def test_cylinder_symbols_are_range_checked(symmetric_chain):
    with pytest.raises(BadStochasticError):
        cylinder_prob(symmetric_chain, {Word.identity(2): -1})
    with pytest.raises(BadStochasticError):
        cylinder_prob(symmetric_chain, {Word.identity(2): 2})
    with pytest.raises(BadStochasticError):
        cylinder_prob(symmetric_chain, {w("e"): 0, w("ab"): 5})


def test_marginal_of_path(symmetric_chain):
    law = marginal(symmetric_chain, [w("ab"), w("e"), w("a")])
    assert law.shape == (2, 2, 2)
    assert law.sum() == pytest.approx(1.0)
    assert law[0, 0, 0] == pytest.approx(0.5 * 0.75 * 0.75)
    assert law[0, 1, 0] == pytest.approx(0.5 * 0.25 * 0.25)


def test_marginal_axes_follow_length_lex(rng):
    tm = random_markov(rng, 2, 3)
    law = marginal(tm, [w("A"), w("e")])
    # axes are (e, A): x(e) = b and x(A) = a has mass pi(a)·P_a(a, b)
    np.testing.assert_allclose(law, tm.pair_joint(1).T, atol=1e-12)
    np.testing.assert_allclose(marginal(tm, [w("b"), w("e")]), tm.pair_joint(2), atol=1e-12)


def test_marginals_are_consistent(rng):
    tm = random_markov(rng, 2, 2)
    big = marginal(tm, [w("e"), w("a"), w("b"), w("ab")])
    small = marginal(tm, [w("e"), w("ab")])
    # axes of big are (e, a, b, ab)
    np.testing.assert_allclose(big.sum(axis=(1, 2)), small, atol=1e-12)


def in_given_order(tm, words):
    law = marginal(tm, words)
    order = sorted_words(words)
    return np.transpose(law, [order.index(x) for x in words])


def test_marginals_are_translation_invariant():
    rng = new_rng(3)
    g = w("aB")
    for _ in range(20):
        tm = random_markov(rng, 2, 2)
        F = list(random_connected_set(rng, 2, 4, "right"))
        np.testing.assert_allclose(
            in_given_order(tm, F), in_given_order(tm, [g * f for f in F]), atol=1e-12
        )


def test_rank_and_size_guards(symmetric_chain):
    with pytest.raises(RankMismatchError):
        marginal(symmetric_chain, [Word.identity(3)])
    with pytest.raises(HullTooLargeError):
        marginal(bernoulli([0.5, 0.5], 3), ball(3, 2))


def test_bernoulli_rows():
    coin = bernoulli([0.25, 0.75], 2)
    np.testing.assert_allclose(coin.trans[0], [[0.25, 0.75], [0.25, 0.75]])
    assert coin.rank == 2


def test_finite_action_validation():
    with pytest.raises(NotInvariantError):
        FiniteAction(rank=1, perms=[[1, 0]], mu=[0.3, 0.7], alpha=[0, 1])
    with pytest.raises(NonBijectiveError):
        FiniteAction(rank=1, perms=[[0, 0]], mu=[0.5, 0.5], alpha=[0, 1])
    with pytest.raises(BadStochasticError):
        FiniteAction(rank=1, perms=[[1, 0]], mu=[0.5, 0.5], alpha=[0])


def test_word_map_applies_last_letter_first():
    fa = FiniteAction(rank=2, perms=[[1, 2, 0], [1, 0, 2]], mu=[1 / 3] * 3, alpha=[0, 1, 2])
    assert fa.word_map(w("ab"))[0] == 2
    assert fa.word_map(w("ba"))[0] == 0
    np.testing.assert_array_equal(fa.word_map(w("aA")), [0, 1, 2])
    np.testing.assert_array_equal(fa.word_map(w("A")), [2, 0, 1])


def test_labels_and_joins(swap_points):
    np.testing.assert_array_equal(canonical_labels(np.array([5, 5, 2, 7])), [0, 0, 1, 2])
    np.testing.assert_array_equal(
        canonical_labels(np.array([[1, 0], [0, 0], [1, 0]])), [0, 1, 0]
    )
    labels = join_labeling(swap_points, [w("e"), w("a")])
    np.testing.assert_array_equal(labels, [0, 1])
    np.testing.assert_allclose(cell_masses(swap_points, labels), [0.5, 0.5])


def test_uniform_trivial_action():
    fa = uniform_trivial_action(4, 3)
    assert fa.size == 4
    assert fa.rank == 3
    np.testing.assert_allclose(fa.mu, 0.25)
    labels = join_labeling(fa, ball(3, 1))
    np.testing.assert_array_equal(labels, [0, 1, 2, 3])


def test_joins_refine_as_the_set_grows():
    rng = new_rng(17)
    for _ in range(50):
        rank = int(rng.integers(2, 4))
        fa = random_finite_action(rng, rank)
        larger = sorted_words(random_connected_set(rng, rank, int(rng.integers(2, 7)), "right"))
        smaller = larger[: int(rng.integers(1, len(larger) + 1))]
        coarse = join_labeling(fa, smaller)
        fine = join_labeling(fa, larger)
        for cell in np.unique(fine):
            assert len(np.unique(coarse[fine == cell])) == 1
        assert len(np.unique(fine)) >= len(np.unique(coarse))
