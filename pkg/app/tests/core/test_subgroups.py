import math
from fractions import Fraction

import pytest

from app.core.errors import (
    ImageTooLargeError,
    NonBijectiveError,
    NotBiConnectedError,
    NotInSubgroupError,
    NotNormalError,
    NotRightConnectedError,
    NotTransitiveError,
    NotVirtuallyFreeError,
)
from app.core.sampling import (
    new_rng,
    random_bi_connected_set,
    random_connected_set,
    random_coset_action,
)
from app.core.subgroups import (
    CosetAction,
    action_from_connected_set,
    bi_transversal,
    check_comb_identity,
    check_subedge_identity,
    coset_of,
    evaluate_T_word,
    intersect_actions,
    is_normal,
    kps_scaling,
    new_coset_action,
    normal_core,
    parse_permutation,
    rank_formula,
    rewrite_in_T,
    schreier_transversal,
    transversal_from_delta,
    virtual_f,
)
from app.core.words import Word, free_reduce, is_connected, letter_order, translate


def w(text: str, rank: int = 2) -> Word:
    return Word.parse(text, rank)


def strs(ws) -> list[str]:
    return [str(x) for x in ws]


def test_parse_permutation():
    assert parse_permutation("(0 1)(2 3)", 4) == (1, 0, 3, 2)
    assert parse_permutation("(0, 2, 1)", 3) == (2, 0, 1)
    assert parse_permutation("[2, 0, 1]", 3) == (2, 0, 1)
    assert parse_permutation("id", 3) == (0, 1, 2)
    assert parse_permutation([1, 0], 2) == (1, 0)
    with pytest.raises(NonBijectiveError):
        parse_permutation("(0 5)", 3)


def test_coset_action_validation():
    with pytest.raises(NonBijectiveError):
        CosetAction(rank=2, index=2, perms=((0, 0), (0, 1)))
    with pytest.raises(NotTransitiveError):
        CosetAction(rank=2, index=2, perms=((0, 1), (0, 1)))


def test_swap_transversal(swap_action):
    td = schreier_transversal(swap_action)
    assert strs(td.delta) == ["e", "a"]
    assert strs(td.gens) == ["bA", "aa", "ab"]
    assert td.witnesses == ((0, 2), (1, 1), (1, 2))
    assert len(td.gens) == rank_formula(2, 2) == 3


def test_cyclic_transversal(cyclic_action):
    td = schreier_transversal(cyclic_action)
    assert strs(td.delta) == ["e", "a", "A"]
    assert strs(td.gens) == ["b", "aaa", "abA", "Aba"]
    for t in td.gens:
        assert coset_of(cyclic_action, t) == 0


def test_rewriting(swap_action):
    td = schreier_transversal(swap_action)
    assert rewrite_in_T(td, swap_action, w("abaa")) == (3, 2)
    assert evaluate_T_word(td, (3, 2)) == w("abaa")
    assert rewrite_in_T(td, swap_action, w("e")) == ()
    with pytest.raises(NotInSubgroupError):
        rewrite_in_T(td, swap_action, w("a"))


def test_rewriting_inverse_letters(cyclic_action):
    td = schreier_transversal(cyclic_action)
    h = w("AAA")
    assert evaluate_T_word(td, rewrite_in_T(td, cyclic_action, h)) == h
    assert rewrite_in_T(td, cyclic_action, h) == (-2,)


def test_normality(swap_action, cyclic_action):
    assert is_normal(swap_action)
    assert is_normal(cyclic_action)
    s3 = new_coset_action(2, ["(0 1)", "(1 2)"], index=3)
    assert not is_normal(s3)
    with pytest.raises(NotNormalError):
        bi_transversal(s3)


def test_bi_transversal(swap_action):
    td = bi_transversal(swap_action)
    assert td.connectivity == "bi"
    assert strs(td.delta) == ["e", "a"]


def test_normal_core():
    s3 = new_coset_action(2, ["(0 1)", "(1 2)"], index=3)
    core = normal_core(s3)
    assert core.index == 6
    assert is_normal(core)
    for k in schreier_transversal(core).gens:
        assert coset_of(s3, k) == 0
    with pytest.raises(ImageTooLargeError):
        normal_core(s3, max_order=5)


def test_intersection(swap_action, cyclic_action):
    both = intersect_actions(swap_action, cyclic_action)
    assert both.index == 6
    for k in schreier_transversal(both).gens:
        assert coset_of(swap_action, k) == 0
        assert coset_of(cyclic_action, k) == 0


def test_action_from_connected_set():
    act, members = action_from_connected_set([w("e"), w("a"), w("ab")])
    assert strs(members) == ["e", "a", "ab"]
    assert act.perms == ((1, 0, 2), (0, 2, 1))
    td = transversal_from_delta(act, members)
    assert strs(td.gens) == ["b", "aa", "abaBA", "abbA"]
    assert check_subedge_identity(td, act).holds
    with pytest.raises(NotRightConnectedError):
        action_from_connected_set([w("e"), w("aa")])


def test_subedge_identity(swap_action):
    check = check_subedge_identity(schreier_transversal(swap_action), swap_action)
    assert check.holds
    assert str(check.lhs) == "4·a + 2·b"
    assert str(check.rhs) == "4·a + 2·b"


def test_comb_identity():
    check = check_comb_identity([w("e"), w("a"), w("b")])
    assert check.holds
    assert check.lhs.counts == (6, 6)
    assert check.parts == {"right translates": True, "left translates": True}
    with pytest.raises(NotBiConnectedError):
        check_comb_identity([w("e"), w("a"), w("ab")])


def test_kps_and_virtual_f():
    assert kps_scaling([1], [2, 3]) == Fraction(1, 6)
    assert virtual_f(math.log(2), 2) == pytest.approx(math.log(2) / 2)
    assert virtual_f(1.0, Fraction(1, 6)) == pytest.approx(6.0)
    with pytest.raises(NotVirtuallyFreeError):
        virtual_f(1.0, 0)


@pytest.mark.parametrize("rank", [2, 3])
def test_random_transversals(rank):
    rng = new_rng(rank)
    for _ in range(100):
        act = random_coset_action(rng, rank, 6)
        td = schreier_transversal(act)
        assert td.delta[0].is_identity
        assert is_connected(td.delta, "right")
        assert len(td.gens) == rank_formula(act.index, rank)
        assert check_subedge_identity(td, act).holds

        shaped, members = action_from_connected_set(
            random_connected_set(rng, rank, int(rng.integers(1, 7)), "right")
        )
        td = transversal_from_delta(shaped, members)
        assert len(td.gens) == rank_formula(len(members), rank)
        assert check_subedge_identity(td, shaped).holds


@pytest.mark.parametrize("rank", [2, 3])
def test_random_comb_identity(rank):
    rng = new_rng(10 + rank)
    for _ in range(100):
        check = check_comb_identity(random_bi_connected_set(rng, rank, int(rng.integers(1, 8))))
        assert check.holds


def random_word(rng, rank: int, max_length: int) -> Word:
    letters = rng.choice(letter_order(rank), size=int(rng.integers(0, max_length + 1)))
    return Word(rank=rank, letters=tuple(int(x) for x in letters))


def random_t_word(rng, td, max_length: int) -> tuple[int, ...]:
    size = int(rng.integers(0, max_length + 1))
    picks = rng.integers(1, len(td.gens) + 1, size=size) * rng.choice([-1, 1], size=size)
    return free_reduce([int(k) for k in picks], len(td.gens)) if size else ()


@pytest.mark.parametrize("rank", [2, 3])
def test_translates_touch_exactly_along_generators(rank):
    rng = new_rng(40 + rank)
    for _ in range(40):
        act = random_coset_action(rng, rank, 4)
        td = schreier_transversal(act)
        a = evaluate_T_word(td, random_t_word(rng, td, 2))
        for k in range(1, len(td.gens) + 1):
            for sign in (1, -1):
                b = a * evaluate_T_word(td, (sign * k,))
                assert is_connected(
                    translate(td.delta, a, "left") | translate(td.delta, b, "left"), "right"
                )
        # rank >= 2 leaves at least two generators
        for t_word in ((1, 1), (1, -2)):
            b = a * evaluate_T_word(td, t_word)
            assert not is_connected(
                translate(td.delta, a, "left") | translate(td.delta, b, "left"), "right"
            )


@pytest.mark.parametrize("rank", [2, 3])
def test_rewriting_round_trip(rank):
    rng = new_rng(50 + rank)
    for _ in range(60):
        act = random_coset_action(rng, rank, 5)
        td = schreier_transversal(act)
        t_word = random_t_word(rng, td, 4)
        assert rewrite_in_T(td, act, evaluate_T_word(td, t_word)) == t_word

        g = random_word(rng, rank, 8)
        h = g * td.delta[coset_of(act, g)].inverse()
        assert coset_of(act, h) == 0
        assert evaluate_T_word(td, rewrite_in_T(td, act, h)) == h
