"""
Finite-index subgroups of a free group, encoded by the right action of the
generators on the right H-cosets (coset 0 is H itself).

Provides Schreier transversals and free generators of H, Schreier rewriting,
normality and normal cores, and the exact edge-count identities that tie a
transversal to the Cayley tree. Permutation arithmetic and the image group of
an action are sympy's.
"""

import logging
import re
from collections import deque
from fractions import Fraction
from typing import Iterable, Literal, Sequence

from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator
from sympy.combinatorics import Permutation, PermutationGroup

from app.config import settings
from app.core.errors import (
    ImageTooLargeError,
    InternalError,
    NonBijectiveError,
    NotBiConnectedError,
    NotInSubgroupError,
    NotNormalError,
    NotRightConnectedError,
    NotTransitiveError,
    NotVirtuallyFreeError,
    RankMismatchError,
)
from app.core.words import (
    EdgeVector,
    Word,
    edge_vector,
    free_reduce,
    is_bi_connected,
    is_connected,
    letter_order,
    sorted_words,
    translate,
)

logger = logging.getLogger(__name__)

# Image list of a permutation of {0..n-1}
PermTuple = tuple[int, ...]


def parse_permutation(spec: str | Sequence[int], n: int) -> PermTuple:
    """
    Read a permutation of {0..n-1} from cycle notation "(0 1)(2 3)", "()" or "id",
    or from one-line notation given as a list of images.
    """
    if not isinstance(spec, str):
        return tuple(int(x) for x in spec)
    text = spec.strip()
    if text.startswith("["):
        return tuple(int(x) for x in re.findall(r"-?\d+", text))
    cycles = []
    for cycle in re.findall(r"\(([^()]*)\)", text):
        points = [int(x) for x in re.split(r"[\s,]+", cycle.strip()) if x]
        bad = [p for p in points if not 0 <= p < n]
        if bad:
            raise NonBijectiveError(f"points {bad} outside 0..{n - 1} in {text!r}")
        if len(set(points)) != len(points):
            raise NonBijectiveError(f"repeated point in cycle ({cycle})")
        if points:
            cycles.append(points)
    if not cycles and text not in ("", "id", "()"):
        raise NonBijectiveError(f"cannot read permutation {text!r}")
    # sympy composes listed cycles left to right; disjoint cycles commute
    return tuple(Permutation(cycles, size=n).array_form)


def is_bijection(perm: Sequence[int], n: int) -> bool:
    return len(perm) == n and sorted(perm) == list(range(n))


def image_group(perms: Sequence[PermTuple]) -> PermutationGroup:
    """The permutation group generated by the images of the free generators."""
    return PermutationGroup([Permutation(list(p)) for p in perms])


class CosetAction(BaseModel):
    """Right action i ↦ i·s of the generators on the right cosets {Hg}; coset 0 is H."""

    model_config = ConfigDict(frozen=True)

    rank: PositiveInt
    index: PositiveInt
    perms: tuple[PermTuple, ...]

    @model_validator(mode="after")
    def check_action(self) -> "CosetAction":
        if len(self.perms) != self.rank:
            raise RankMismatchError(f"{len(self.perms)} permutations for rank {self.rank}")
        for i, perm in enumerate(self.perms, start=1):
            if not is_bijection(perm, self.index):
                raise NonBijectiveError(f"generator {i} does not permute 0..{self.index - 1}")
        if len(self.group().orbit(0)) != self.index:
            raise NotTransitiveError(f"generators do not act transitively on {self.index} cosets")
        return self

    def group(self) -> PermutationGroup:
        return image_group(self.perms)

    @property
    def inverse_perms(self) -> tuple[PermTuple, ...]:
        return tuple(tuple((~Permutation(list(p))).array_form) for p in self.perms)

    def step(self, coset: int, letter: int) -> int:
        if letter > 0:
            return self.perms[letter - 1][coset]
        return self.perms[-letter - 1].index(coset)


def new_coset_action(rank: int, perms: Sequence[str | Sequence[int]], index: int | None = None) -> CosetAction:
    if index is None:
        first = perms[0] if perms else ()
        index = len(first) if not isinstance(first, str) else _infer_degree(perms)
    parsed = tuple(parse_permutation(p, index) for p in perms)
    return CosetAction(rank=rank, index=index, perms=parsed)


def _infer_degree(perms: Sequence[str | Sequence[int]]) -> int:
    points = [int(x) for p in perms for x in re.findall(r"\d+", str(p))]
    return max(points, default=0) + 1


def coset_of(act: CosetAction, w: Word) -> int:
    """Fold w through the generator permutations starting from coset 0."""
    if w.rank != act.rank:
        raise RankMismatchError(f"word of rank {w.rank} against action of rank {act.rank}")
    coset = 0
    for x in w.letters:
        coset = act.step(coset, x)
    return coset


class TransversalData(BaseModel):
    """
    A coset transversal Δ (delta[i] lies in coset i, delta[0] = 1_G) together with
    the free generators T of H and their edge witnesses (δ_t, s_t), t = δ_t s_t r(δ_t s_t)^-1.
    """

    model_config = ConfigDict(frozen=True)

    rank: PositiveInt
    delta: tuple[Word, ...]
    connectivity: Literal["right", "bi"] = "right"
    gens: tuple[Word, ...]
    # (coset index of δ_t, generator index of s_t) per t
    witnesses: tuple[tuple[int, int], ...]

    @property
    def index(self) -> int:
        return len(self.delta)

    def generator_for(self, coset: int, generator: int) -> int | None:
        """Index of t with witness (δ_coset, s_generator), or None for an internal pair."""
        try:
            return self.witnesses.index((coset, generator))
        except ValueError:
            return None


def transversal_from_delta(
    act: CosetAction, delta: Sequence[Word], connectivity: Literal["right", "bi"] = "right"
) -> TransversalData:
    """
    Schreier generators for a given right-connected transversal Δ ∋ 1_G.

    Args:
        act: the coset action describing H
        delta: delta[i] must lie in coset i

    Returns:
        TransversalData whose gens are c(δ, s) = δ s r(δs)^-1 over the external pairs of Δ × S
    """
    delta = tuple(delta)
    if len(delta) != act.index:
        raise InternalError(f"transversal has {len(delta)} words for index {act.index}")
    for i, d in enumerate(delta):
        if coset_of(act, d) != i:
            raise InternalError(f"transversal word {d} is not in coset {i}")
    if not delta[0].is_identity:
        raise InternalError("transversal must start with the identity")
    if not is_connected(delta, "right"):
        raise NotRightConnectedError("transversal is not right-connected")

    gens: list[Word] = []
    witnesses: list[tuple[int, int]] = []
    for i, d in enumerate(delta):
        for s in range(1, act.rank + 1):
            j = act.perms[s - 1][i]
            ds = d * Word.letter(s, act.rank)
            if ds == delta[j]:
                continue
            gens.append(ds * delta[j].inverse())
            witnesses.append((i, s))
    logger.debug(f"Schreier generators for index {act.index}: {[str(t) for t in gens]}")
    return TransversalData(
        rank=act.rank,
        delta=delta,
        connectivity=connectivity,
        gens=tuple(gens),
        witnesses=tuple(witnesses),
    )


def _least_representatives(act: CosetAction) -> tuple[Word, ...]:
    # Breadth-first search appending letters in the fixed order finds the
    # length-lex-least word of every coset; the result is prefix-closed.
    reps: dict[int, Word] = {0: Word.identity(act.rank)}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for x in letter_order(act.rank):
            j = act.step(i, x)
            if j not in reps:
                reps[j] = reps[i] * Word.letter(x, act.rank)
                queue.append(j)
    return tuple(reps[i] for i in range(act.index))


def schreier_transversal(act: CosetAction) -> TransversalData:
    return transversal_from_delta(act, _least_representatives(act), "right")


def is_normal(act: CosetAction) -> bool:
    """H is normal iff the image of G in Sym(cosets) acts regularly, i.e. has order |G : H|."""
    return act.group().order() == act.index


def bi_transversal(act: CosetAction) -> TransversalData:
    """Length-lex-least representatives of a normal subgroup's cosets form a bi-connected transversal."""
    if not is_normal(act):
        raise NotNormalError("bi-connected transversals are built for normal subgroups only")
    td = transversal_from_delta(act, _least_representatives(act), "bi")
    if not is_bi_connected(td.delta):
        raise InternalError(f"least representatives {[str(d) for d in td.delta]} are not bi-connected")
    return td


def normal_core(act: CosetAction, max_order: int | None = None) -> CosetAction:
    """
    Coset action of the kernel K of G → Sym(cosets): the regular action of the image group.

    Coset 0 of the result is K; K ≤ H and K is normal in G.
    """
    max_order = max_order or settings.MAX_IMAGE_ORDER
    group = act.group()
    order = group.order()
    if order > max_order:
        raise ImageTooLargeError(f"image group has {order} elements, more than {max_order}")
    identity = tuple(range(act.index))
    elements = [Permutation(list(identity))]
    elements += [g for g in group.generate() if tuple(g.array_form) != identity]
    position = {tuple(g.array_form): i for i, g in enumerate(elements)}
    gens = [Permutation(list(p)) for p in act.perms]
    # sympy composes left to right: g*s applies g first
    perms = tuple(tuple(position[tuple((g * s).array_form)] for g in elements) for s in gens)
    logger.debug(f"normal core of index {act.index} action has index {order}")
    return CosetAction(rank=act.rank, index=len(elements), perms=perms)


def intersect_actions(act1: CosetAction, act2: CosetAction) -> CosetAction:
    """Coset action of H1 ∩ H2: the orbit of (0, 0) under the product action."""
    if act1.rank != act2.rank:
        raise RankMismatchError("actions of different rank")
    n2 = act2.index
    product = image_group(
        [
            tuple(p1[i] * n2 + p2[j] for i in range(act1.index) for j in range(n2))
            for p1, p2 in zip(act1.perms, act2.perms)
        ]
    )
    # point i·n2 + j stands for the pair (i, j); 0 is (0, 0) and stays first
    orbit = sorted(product.orbit(0))
    position = {point: k for k, point in enumerate(orbit)}
    perms = tuple(
        tuple(position[p1[q // n2] * n2 + p2[q % n2]] for q in orbit)
        for p1, p2 in zip(act1.perms, act2.perms)
    )
    return CosetAction(rank=act1.rank, index=len(orbit), perms=perms)


def action_from_connected_set(delta: Iterable[Word]) -> tuple[CosetAction, tuple[Word, ...]]:
    """
    The right action of G on a finite right-connected Δ ∋ 1_G:
    δ∗s = δs when δs ∈ Δ, otherwise δs^-k with k ≥ 0 maximal such that δs^-k ∈ Δ.

    Returns the action (point 0 is 1_G) and Δ ordered so that delta[i] is in coset i.
    """
    members = sorted_words(delta)
    if not members or not members[0].is_identity:
        raise InternalError("the set must contain the identity")
    if not is_connected(members, "right"):
        raise NotRightConnectedError("the set is not right-connected")
    rank = members[0].rank
    position = {d: i for i, d in enumerate(members)}
    perms = []
    for s in range(1, rank + 1):
        gen, inv = Word.letter(s, rank), Word.letter(-s, rank)
        image = []
        for d in members:
            if d * gen in position:
                image.append(position[d * gen])
                continue
            node = d
            while node * inv in position:
                node = node * inv
            image.append(position[node])
        perms.append(tuple(image))
    return CosetAction(rank=rank, index=len(members), perms=tuple(perms)), members


def rewrite_in_T(td: TransversalData, act: CosetAction, h: Word) -> tuple[int, ...]:
    """
    Schreier rewriting of h ∈ H as a reduced word in T ∪ T^-1.

    Returns signed 1-based indices into td.gens.
    """
    coset = 0
    out: list[int] = []
    for x in h.letters:
        if x > 0:
            t = td.generator_for(coset, x)
            coset = act.perms[x - 1][coset]
            if t is not None:
                out.append(t + 1)
        else:
            nxt = act.step(coset, x)
            t = td.generator_for(nxt, -x)
            coset = nxt
            if t is not None:
                out.append(-(t + 1))
    if coset != 0:
        raise NotInSubgroupError(f"{h} ends in coset {coset}, not in H")
    return free_reduce(out, max(len(td.gens), 1))


def evaluate_T_word(td: TransversalData, t_word: Sequence[int]) -> Word:
    result = Word.identity(td.rank)
    for k in t_word:
        t = td.gens[abs(k) - 1]
        result = result * (t if k > 0 else t.inverse())
    return result


class IdentityCheck(BaseModel):
    """Outcome of an exact identity between formal sums."""

    model_config = ConfigDict(frozen=True)

    holds: bool
    lhs: EdgeVector
    rhs: EdgeVector
    parts: dict[str, bool] = {}


def check_subedge_identity(td: TransversalData, act: CosetAction) -> IdentityCheck:
    """Σ_t (R(tΔ ∪ Δ) − R(Δ)) = |T|·R(Δ) + Σ_s (R(Δs ∪ Δ) − R(Δ))."""
    delta = set(td.delta)
    r_delta = edge_vector(delta)
    lhs = EdgeVector.zero(act.rank)
    for t in td.gens:
        lhs = lhs + (edge_vector(translate(delta, t, "left") | delta) - r_delta)
    rhs = len(td.gens) * r_delta
    for s in range(1, act.rank + 1):
        shifted = translate(delta, Word.letter(s, act.rank), "right") | delta
        rhs = rhs + (edge_vector(shifted) - r_delta)
    return IdentityCheck(holds=lhs == rhs, lhs=lhs, rhs=rhs)


def check_comb_identity(delta: Iterable[Word]) -> IdentityCheck:
    """
    For a finite bi-connected Δ ∋ 1_G checks
    |Δ|·Σ_s (R(sΔ∪Δ) − R(Δ)) = Σ_s (R(Δs∪Δ) − R(Δ)) + (|Δ|(r−1)+1)·R(Δ)
    together with the two equations it splits into.
    """
    members = set(delta)
    if not members or not is_bi_connected(members):
        raise NotBiConnectedError("the set is not bi-connected")
    rank = next(iter(members)).rank
    if Word.identity(rank) not in members:
        raise NotBiConnectedError("the set must contain the identity")
    n = len(members)
    r_delta = edge_vector(members)
    left_sum = EdgeVector.zero(rank)
    right_sum = EdgeVector.zero(rank)
    for s in range(1, rank + 1):
        gen = Word.letter(s, rank)
        left_sum = left_sum + (edge_vector(translate(members, gen, "left") | members) - r_delta)
        right_sum = right_sum + (edge_vector(translate(members, gen, "right") | members) - r_delta)
    ones = EdgeVector.generators_sum(rank)
    lhs = n * left_sum
    rhs = right_sum + (n * (rank - 1) + 1) * r_delta
    parts = {
        "right translates": n * ones == right_sum + r_delta,
        "left translates": left_sum == ones + (rank - 1) * r_delta,
    }
    return IdentityCheck(holds=lhs == rhs and all(parts.values()), lhs=lhs, rhs=rhs, parts=parts)


def rank_formula(index: int, rank: int) -> int:
    """Rank of an index-n subgroup of a rank-r free group."""
    return index * (rank - 1) + 1


def kps_scaling(edge_orders: Sequence[int], vertex_orders: Sequence[int]) -> Fraction:
    """χ = Σ 1/e_i − Σ 1/v_j for a finite graph of finite groups."""
    for order in (*edge_orders, *vertex_orders):
        if order <= 0:
            raise ValueError(f"group orders must be positive, got {order}")
    return sum((Fraction(1, e) for e in edge_orders), Fraction(0)) - sum(
        (Fraction(1, v) for v in vertex_orders), Fraction(0)
    )


def virtual_f(f_value: float, rank_minus_one: Fraction | int) -> float:
    """f_G / (r(G) − 1); undefined for virtually cyclic or finite groups."""
    if rank_minus_one <= 0:
        raise NotVirtuallyFreeError(f"r(G) − 1 = {rank_minus_one} must be positive")
    return f_value / float(rank_minus_one)
