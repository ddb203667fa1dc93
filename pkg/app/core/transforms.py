"""
Structure-preserving constructions on measures: restriction to a finite-index
subgroup, recoding over a left-connected block, Markov approximation from pair
marginals, and restriction of finite actions.
"""

import logging
from typing import Iterable, Sequence

import numpy as np

from app.config import settings
from app.core.errors import (
    InconsistentMarginalsError,
    InternalError,
    MissingIdentityError,
    NotLeftConnectedError,
    RankMismatchError,
    ZeroMassError,
)
from app.core.measures import (
    FiniteAction,
    SymbolLegend,
    TreeMarkovMeasure,
    canonical_labels,
    cell_masses,
    join_labeling,
    marginal,
)
from app.core.subgroups import CosetAction, TransversalData
from app.core.words import Word, is_connected, sorted_words

logger = logging.getLogger(__name__)


def _ordered_marginal(tm: TreeMarkovMeasure, words: Sequence[Word]) -> np.ndarray:
    """marginal() with its axes in the order of `words` rather than length-lex."""
    law = marginal(tm, words)
    order = sorted_words(words)
    return np.transpose(law, [order.index(w) for w in words])


def _pattern_alphabet(tm: TreeMarkovMeasure, words: Sequence[Word]) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Positive-mass patterns on `words` and their renormalised masses."""
    law = _ordered_marginal(tm, words)
    flat = law.ravel()
    keep = np.flatnonzero(flat >= settings.PRUNE_THRESHOLD)
    total = flat[keep].sum()
    if abs(total - 1.0) > settings.STOCHASTIC_TOL:
        raise InternalError(f"pruning removed mass {1.0 - total!r}")
    if len(keep) < len(flat):
        logger.debug(f"pruned {len(flat) - len(keep)} of {len(flat)} patterns")
    patterns = [tuple(int(i) for i in np.unravel_index(k, law.shape)) for k in keep]
    return flat[keep] / total, patterns


def _block_joint(
    tm: TreeMarkovMeasure,
    first: Sequence[Word],
    second: Sequence[Word],
    patterns: list[tuple[int, ...]],
) -> np.ndarray:
    """
    J[p, q] = μ(pattern p on `first` and pattern q on `second`); the blocks may overlap.
    """
    union = sorted_words([*first, *second])
    law = marginal(tm, union)
    where = {w: i for i, w in enumerate(union)}
    shape = (tm.m,) * len(first)
    lookup = np.full(tm.m ** len(first), -1)
    lookup[[np.ravel_multi_index(p, shape) for p in patterns]] = np.arange(len(patterns))

    cells = np.nonzero(law > 0)
    p = lookup[np.ravel_multi_index([cells[where[w]] for w in first], shape)]
    q = lookup[np.ravel_multi_index([cells[where[w]] for w in second], shape)]
    live = (p >= 0) & (q >= 0)
    joint = np.zeros((len(patterns), len(patterns)))
    np.add.at(joint, (p[live], q[live]), law[cells][live])
    return joint


def _measure_from_joints(pi: np.ndarray, joints: Sequence[np.ndarray], legend: SymbolLegend) -> TreeMarkovMeasure:
    trans = [joint / joint.sum(axis=1, keepdims=True) for joint in joints]
    return TreeMarkovMeasure(pi=pi, trans=trans, legend=legend)


def restrict_markov(tm: TreeMarkovMeasure, act: CosetAction, td: TransversalData) -> TreeMarkovMeasure:
    """
    The H-process on patterns over Δ: y(h) = (x(hδ))_{δ ∈ Δ}, one transition matrix per t ∈ T.

    Δ and tΔ are disjoint and joined by the single edge (δ_t, δ_t s_t), so the
    joint over Δ ∪ tΔ pins down P_t.
    """
    if tm.rank != act.rank:
        raise RankMismatchError(f"measure of rank {tm.rank} with action of rank {act.rank}")
    delta = list(sorted_words(td.delta))
    pi, patterns = _pattern_alphabet(tm, delta)
    joints = []
    for t in td.gens:
        shifted = [t * d for d in delta]
        joints.append(_block_joint(tm, delta, shifted, patterns))
    legend = SymbolLegend(words=tuple(delta), patterns=tuple(patterns))
    logger.debug(f"restricted alphabet has {len(patterns)} symbols over |Δ| = {len(delta)}")
    try:
        return _measure_from_joints(pi, joints, legend)
    except Exception as e:
        raise InternalError(f"restricted process failed validation: {e}") from e


def recode_markov(tm: TreeMarkovMeasure, U: Iterable[Word]) -> TreeMarkovMeasure:
    """The same process written over the alphabet of positive-mass patterns on U."""
    block = sorted_words(U)
    if not block or Word.identity(tm.rank) not in block:
        raise MissingIdentityError("U must contain the identity")
    if not is_connected(block, "left"):
        raise NotLeftConnectedError("U must be left-connected")
    pi, patterns = _pattern_alphabet(tm, block)
    joints = []
    for s in range(1, tm.rank + 1):
        # pattern on sU is read in the order s·u for u in U
        shifted = [Word.letter(s, tm.rank) * u for u in block]
        joints.append(_block_joint(tm, block, shifted, patterns))
    legend = SymbolLegend(words=block, patterns=tuple(patterns))
    return _measure_from_joints(pi, joints, legend)


def markov_approx(pi: Sequence[float], joints: Sequence[np.ndarray]) -> TreeMarkovMeasure:
    """
    The unique Markov measure with the given one- and two-point marginals μ(A_a ∩ s·A_b).
    """
    pi = np.asarray(pi, dtype=float)
    tol = settings.STOCHASTIC_TOL
    if np.any(pi <= 0):
        raise ZeroMassError("every symbol needs positive mass")
    trans = []
    for s, joint in enumerate(joints, start=1):
        joint = np.asarray(joint, dtype=float)
        if joint.shape != (len(pi), len(pi)) or np.any(joint < 0):
            raise InconsistentMarginalsError(f"J_{s} is not a non-negative {len(pi)}x{len(pi)} matrix")
        if abs(joint.sum() - 1.0) > tol:
            raise InconsistentMarginalsError(f"J_{s} sums to {joint.sum()!r}")
        if np.max(np.abs(joint.sum(axis=1) - pi)) > tol or np.max(np.abs(joint.sum(axis=0) - pi)) > tol:
            raise InconsistentMarginalsError(f"marginals of J_{s} differ from pi")
        # rows normalised by their own sums (equal to pi within tol)
        trans.append(joint / joint.sum(axis=1, keepdims=True))
    return TreeMarkovMeasure(pi=pi, trans=trans)


def empirical_pairs(measure: TreeMarkovMeasure | FiniteAction) -> tuple[np.ndarray, list[np.ndarray]]:
    """
    pi = masses of the cells of α, J_s(a, b) = μ(A_a ∩ s·A_b) for s ∈ S.

    Cells of a finite action with zero mass are dropped and the rest relabelled.
    """
    if isinstance(measure, TreeMarkovMeasure):
        return np.array(measure.pi), [measure.pair_joint(s) for s in range(1, measure.rank + 1)]

    labels = canonical_labels(np.asarray(measure.alpha))
    masses = cell_masses(measure, labels)
    live = np.flatnonzero(masses > 0)
    relabel = -np.ones(len(masses), dtype=int)
    relabel[live] = np.arange(len(live))
    joints = []
    for s in range(1, measure.rank + 1):
        back = measure.letter_map(-s)
        joint = np.zeros((len(live), len(live)))
        for x in range(measure.size):
            a, b = relabel[labels[x]], relabel[labels[back[x]]]
            if measure.mu[x] > 0:
                joint[a, b] += measure.mu[x]
        joints.append(joint)
    return masses[live], joints


def restrict_finite(fa: FiniteAction, act: CosetAction, td: TransversalData) -> FiniteAction:
    """
    H acting on the same space through its Schreier generators, with base partition Δ·α.
    """
    if fa.rank != act.rank:
        raise RankMismatchError(f"action of rank {fa.rank} with coset action of rank {act.rank}")
    perms = [tuple(int(x) for x in fa.word_map(t)) for t in td.gens]
    alpha = join_labeling(fa, td.delta)
    return FiniteAction(rank=len(perms), perms=perms, mu=np.array(fa.mu), alpha=alpha)
