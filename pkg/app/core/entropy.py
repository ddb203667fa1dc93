"""
Shannon entropy kernels and the F / f computations for tree-Markov measures
and finite actions.

All values are in nats. Generating sets are arbitrary lists of words of G,
so the same code computes F over G (the letters of S) and over a finite-index
subgroup H (its Schreier generators T).
"""

import logging
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import entr

from app.config import settings
from app.core.errors import (
    InternalError,
    NotADistributionError,
    NotLeftConnectedError,
    NotRightConnectedError,
    RankMismatchError,
)
from app.core.measures import (
    FiniteAction,
    TreeMarkovMeasure,
    canonical_labels,
    cell_masses,
    join_labeling,
    marginal,
)
from app.core.models import EntropyReport, GeneratorTerm
from app.core.words import Word, edge_vector, is_connected, sorted_words, translate

logger = logging.getLogger(__name__)

Measure = TreeMarkovMeasure | FiniteAction


def shannon(dist: Iterable[float] | np.ndarray) -> float:
    """H = Σ −p·log p with 0·log 0 = 0."""
    p = np.asarray(dist, dtype=float).ravel()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise NotADistributionError(f"entries must be non-negative and sum to 1 (sum {p.sum()!r})")
    return float(np.sum(entr(p)))


def conditional_shannon(joint: np.ndarray) -> float:
    """H(A | B) for a joint law indexed [a, b]."""
    joint = np.asarray(joint, dtype=float)
    return shannon(joint) - shannon(joint.sum(axis=0))


class GenSet(BaseModel):
    """The acting generators: single letters for G, Schreier generators for a subgroup."""

    model_config = ConfigDict(frozen=True)

    words: tuple[Word, ...]

    @model_validator(mode="after")
    def check_words(self) -> "GenSet":
        if not self.words:
            raise ValueError("a generating set needs at least one word")
        if len({w.rank for w in self.words}) != 1:
            raise RankMismatchError("generators of different rank")
        if any(w.is_identity for w in self.words):
            raise ValueError("the identity cannot be a generator")
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate generators")
        return self

    @classmethod
    def letters(cls, rank: int) -> "GenSet":
        return cls(words=tuple(Word.letter(s, rank) for s in range(1, rank + 1)))

    @property
    def size(self) -> int:
        return len(self.words)

    @property
    def group_rank(self) -> int:
        return self.words[0].rank


def gens_ball(gens: GenSet, n: int) -> tuple[Word, ...]:
    """Elements of G of word length <= n in the generators `gens` (as words of G)."""
    moves = [w for g in gens.words for w in (g, g.inverse())]
    ball = {Word.identity(gens.group_rank)}
    frontier = set(ball)
    for _ in range(n):
        frontier = {m * b for m in moves for b in frontier} - ball
        ball |= frontier
    return sorted_words(ball)


def join_entropy(measure: Measure, F: Iterable[Word]) -> float:
    """H(F·α)."""
    F = frozenset(F)
    if isinstance(measure, FiniteAction):
        return shannon(cell_masses(measure, join_labeling(measure, F)))
    if is_connected(F, "right"):
        return shannon_join_edge(measure, F)
    return shannon(marginal(measure, F))


def big_F(measure: Measure, gens: GenSet, base: Iterable[Word]) -> EntropyReport:
    """
    F(β) = (1 − 2r)·H(β) + Σ_w H(w·β ∨ β) for β = base·α, r = |gens|.
    """
    base = frozenset(base)
    if not base:
        raise ValueError("base set must be non-empty")
    h_base = join_entropy(measure, base)
    terms = []
    for w in gens.words:
        joint = join_entropy(measure, translate(base, w, "left") | base)
        terms.append(GeneratorTerm(generator=str(w), joint_entropy=joint))
    value = (1 - 2 * gens.size) * h_base + sum(t.joint_entropy for t in terms)
    return EntropyReport(value=value, base_entropy=h_base, terms=terms, sequence=[value])


def f_markov(tm: TreeMarkovMeasure) -> float:
    """Closed form (1 − 2r)·H(pi) + Σ_s H(J_s)."""
    h_pi = shannon(tm.pi)
    return (1 - 2 * tm.rank) * h_pi + sum(
        shannon(tm.pair_joint(s)) for s in range(1, tm.rank + 1)
    )


def shannon_join_edge(tm: TreeMarkovMeasure, F: Iterable[Word]) -> float:
    """H(F·α) = H(α) + Σ_s a_s·H(s·α | α) for right-connected F."""
    F = frozenset(F)
    if not is_connected(F, "right"):
        raise NotRightConnectedError("F must be right-connected")
    h_pi = shannon(tm.pi)
    counts = edge_vector(F).counts
    return h_pi + sum(
        a * (shannon(tm.pair_joint(s)) - h_pi) for s, a in enumerate(counts, start=1) if a
    )


def _assert_non_increasing(sequence: Sequence[float]) -> None:
    for n in range(1, len(sequence)):
        if sequence[n] > sequence[n - 1] + settings.MONOTONE_SLACK:
            raise InternalError(
                f"F over balls increased at radius {n}: {sequence[n - 1]!r} -> {sequence[n]!r}"
            )


def f_limit(measure: Measure, gens: GenSet | None = None, n_max: int | None = None) -> EntropyReport:
    """
    F over the balls B(0), ..., B(n_max) of the gens word metric.

    For a FiniteAction the join partitions stop refining after finitely many
    steps; once B(n)·α = B(n+1)·α every later term equals the current one and
    the report is marked stabilized.
    """
    if isinstance(measure, FiniteAction):
        gens = gens or GenSet.letters(measure.rank)
        return _finite_limit(measure, gens, settings.FINITE_N_MAX if n_max is None else n_max)

    gens = gens or GenSet.letters(measure.rank)
    n_max = settings.MARKOV_N_MAX if n_max is None else n_max
    sequence = []
    report = None
    for n in range(n_max + 1):
        report = big_F(measure, gens, gens_ball(gens, n))
        sequence.append(report.value)
        logger.debug(f"F(B({n})·α) = {report.value}")
    _assert_non_increasing(sequence)
    if gens == GenSet.letters(measure.rank) and max(sequence) - min(sequence) > settings.CROSS_METHOD_TOL:
        raise InternalError(f"F over balls is not constant for a Markov measure: {sequence}")
    return report.model_copy(update={"sequence": sequence, "radius": n_max})


def _finite_limit(fa: FiniteAction, gens: GenSet, n_max: int) -> EntropyReport:
    moves = [(w, fa.word_map(w.inverse())) for w in gens.words]
    alpha = canonical_labels(np.asarray(fa.alpha))
    labels = alpha
    sequence: list[float] = []
    stabilized = False
    report = None
    for n in range(n_max + 1):
        h_base = shannon(cell_masses(fa, labels))
        terms = []
        for w, back in moves:
            # the cell of x in w·β is the β-cell of w^-1·x
            joint = canonical_labels(np.stack([labels, labels[back]], axis=1))
            terms.append(GeneratorTerm(generator=str(w), joint_entropy=shannon(cell_masses(fa, joint))))
        value = (1 - 2 * gens.size) * h_base + sum(t.joint_entropy for t in terms)
        sequence.append(value)
        report = EntropyReport(value=value, base_entropy=h_base, terms=terms, sequence=[], radius=n)

        columns = [alpha, *(labels[back] for _, back in moves), *(labels[fa.word_map(w)] for w, _ in moves)]
        refined = canonical_labels(np.stack(columns, axis=1))
        if np.array_equal(refined, labels):
            stabilized = True
            logger.debug(f"join partition stabilized at radius {n} with {labels.max() + 1} cells")
            break
        labels = refined
    _assert_non_increasing(sequence)
    return report.model_copy(update={"sequence": sequence, "stabilized": stabilized})


def ball_identity_total(rank: int, K: Iterable[Word]) -> int:
    """(1 − 2r)|K| + Σ_s |sK ∪ K|; equals 1 for every finite left-connected K."""
    K = frozenset(K)
    if not K or not is_connected(K, "left"):
        raise NotLeftConnectedError("K must be non-empty and left-connected")
    return (1 - 2 * rank) * len(K) + sum(
        len(translate(K, Word.letter(s, rank), "left") | K) for s in range(1, rank + 1)
    )


def check_ball_identity(rank: int, K: Iterable[Word]) -> bool:
    return ball_identity_total(rank, K) == 1


class DeltaInequality(BaseModel):
    model_config = ConfigDict(frozen=True)

    holds: bool
    f: float
    per_element: float
    base_entropy: float


def check_delta_inequality(tm: TreeMarkovMeasure, delta: Iterable[Word]) -> DeltaInequality:
    """f ≤ H(Δ·α)/|Δ| ≤ H(α) for finite right-connected Δ."""
    delta = frozenset(delta)
    slack = settings.CROSS_METHOD_TOL
    f = f_markov(tm)
    per_element = shannon_join_edge(tm, delta) / len(delta)
    h_alpha = shannon(tm.pi)
    holds = f <= per_element + slack and per_element <= h_alpha + slack
    return DeltaInequality(holds=holds, f=f, per_element=per_element, base_entropy=h_alpha)
