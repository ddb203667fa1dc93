"""
The two measure classes the entropy engine consumes.

TreeMarkovMeasure is a shift-invariant Markov measure on K^G: a stationary
vector pi and one row-stochastic matrix per generator, with x ∈ s·A_k iff
x(s) = k, so the pair (x(g), x(gs)) has law pi(a)·P_s(a, b).

FiniteAction is a finite G-set with an invariant probability vector and a
base partition; x ∈ g·A_k iff alpha(g^-1·x) = k.
"""

import logging
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator

from app.config import settings
from app.core.errors import (
    BadStochasticError,
    HullTooLargeError,
    NonBijectiveError,
    NotInvariantError,
    NotStationaryError,
    RankMismatchError,
    ZeroMassError,
)
from app.core.words import Word, sorted_words, tree_hull

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


class SymbolLegend(BaseModel):
    """Maps each symbol of a recoded alphabet to the pattern it stands for on `words`."""

    model_config = ConfigDict(frozen=True)

    words: tuple[Word, ...]
    patterns: tuple[tuple[int, ...], ...]


class TreeMarkovMeasure(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pi: np.ndarray
    trans: tuple[np.ndarray, ...]
    # P_{s^-1}(a, b) = pi(b)·P_s(b, a)/pi(a)
    reverse: tuple[np.ndarray, ...] = ()
    legend: SymbolLegend | None = None

    @model_validator(mode="before")
    @classmethod
    def coerce_arrays(cls, data: dict) -> dict:
        data = dict(data)
        pi = np.asarray(data["pi"], dtype=float)
        trans = tuple(np.asarray(p, dtype=float) for p in data["trans"])
        if pi.ndim != 1 or not trans:
            raise BadStochasticError("pi must be a vector and at least one generator is needed")
        m = len(pi)
        for i, p in enumerate(trans, start=1):
            if p.shape != (m, m):
                raise BadStochasticError(f"P_{i} has shape {p.shape}, expected {(m, m)}")
        if np.any(pi <= 0):
            raise ZeroMassError(f"symbols {np.flatnonzero(pi <= 0).tolist()} have no mass; prune them")
        data["pi"] = _frozen(pi)
        data["trans"] = tuple(_frozen(p) for p in trans)
        data["reverse"] = tuple(_frozen(p.T * pi[None, :] / pi[:, None]) for p in trans)
        return data

    @model_validator(mode="after")
    def check_stochastic(self) -> "TreeMarkovMeasure":
        tol = settings.STOCHASTIC_TOL
        if abs(self.pi.sum() - 1.0) > tol:
            raise BadStochasticError(f"pi sums to {self.pi.sum()!r}")
        for i, p in enumerate(self.trans, start=1):
            if np.any(p < 0):
                raise BadStochasticError(f"P_{i} has negative entries")
            if np.max(np.abs(p.sum(axis=1) - 1.0)) > tol:
                raise BadStochasticError(f"rows of P_{i} do not sum to 1")
            if np.max(np.abs(self.pi @ p - self.pi)) > tol:
                raise NotStationaryError(f"pi·P_{i} = {self.pi @ p} differs from pi = {self.pi}")
        return self

    @property
    def m(self) -> int:
        return len(self.pi)

    @property
    def rank(self) -> int:
        return len(self.trans)

    def pair_joint(self, generator: int) -> np.ndarray:
        """Law of (x(1_G), x(s)): J_s(a, b) = pi(a)·P_s(a, b)."""
        return self.pi[:, None] * self.trans[generator - 1]

    def kernel(self, letter: int) -> np.ndarray:
        """Conditional law of x(gℓ) given x(g) for a letter ℓ ∈ S ∪ S^-1."""
        return self.trans[letter - 1] if letter > 0 else self.reverse[-letter - 1]


def new_tree_markov(pi: Sequence[float], trans: Sequence[Sequence[Sequence[float]]]) -> TreeMarkovMeasure:
    return TreeMarkovMeasure(pi=pi, trans=trans)


def bernoulli(dist: Sequence[float], rank: int) -> TreeMarkovMeasure:
    """Product measure: every row of every P_s equals dist."""
    dist = np.asarray(dist, dtype=float)
    rows = np.tile(dist, (len(dist), 1))
    return TreeMarkovMeasure(pi=dist, trans=[rows] * rank)


CylinderAssignment = Mapping[Word, int]


def _check_size(tm: TreeMarkovMeasure, hull_size: int, kept: int) -> None:
    if hull_size > settings.MAX_HULL_VERTICES:
        raise HullTooLargeError(f"hull has {hull_size} vertices (max {settings.MAX_HULL_VERTICES})")
    if tm.m ** (kept + 1) > settings.MAX_MARGINAL_CELLS:
        raise HullTooLargeError(
            f"{tm.m}^{kept + 1} cells exceed the marginal bound {settings.MAX_MARGINAL_CELLS}"
        )


def _eliminate(
    tm: TreeMarkovMeasure, keep: Sequence[Word], evidence: CylinderAssignment
) -> np.ndarray:
    """
    Sum-product over the right-tree hull of keep ∪ evidence.

    Vertices in `keep` get one output axis each (in the given order), vertices in
    `evidence` are clamped, every other hull vertex is summed out. Messages are
    passed leaf to root along a depth-first postorder of the hull tree.
    """
    domain = set(keep) | set(evidence)
    for w in domain:
        if w.rank != tm.rank:
            raise RankMismatchError(f"word {w} of rank {w.rank} for a rank-{tm.rank} measure")
    hull = tree_hull(domain, "right")
    _check_size(tm, len(hull), len(keep))

    tree = nx.Graph()
    tree.add_nodes_from(hull)
    for u in hull:
        for s in range(1, tm.rank + 1):
            v = u * Word.letter(s, tm.rank)
            if v in hull:
                tree.add_edge(u, v)
    root = sorted_words(domain)[0]
    parents = nx.dfs_predecessors(tree, root)
    kept = set(keep)
    m = tm.m

    messages: dict[Word, tuple[np.ndarray, list[Word]]] = {}
    for v in nx.dfs_postorder_nodes(tree, root):
        if v in evidence:
            table, labels = np.eye(m)[evidence[v]].copy(), []
        elif v in kept:
            table, labels = np.eye(m), [v]
        else:
            table, labels = np.ones(m), []
        for c in tree.neighbors(v):
            if parents.get(c) != v:
                continue
            child_table, child_labels = messages.pop(c)
            letter = (v.inverse() * c).letters[0]
            edge = np.tensordot(tm.kernel(letter), child_table, axes=([1], [0]))
            table = (table.reshape(m, -1, 1) * edge.reshape(m, 1, -1)).reshape(
                (m,) + table.shape[1:] + edge.shape[1:]
            )
            labels = labels + child_labels
        messages[v] = (table, labels)

    table, labels = messages[root]
    result = np.tensordot(tm.pi, table, axes=([0], [0]))
    return np.transpose(result, [labels.index(w) for w in keep]) if keep else result


def cylinder_prob(tm: TreeMarkovMeasure, asg: CylinderAssignment) -> float:
    """μ(⋂_{g ∈ dom} g·A_{asg(g)})."""
    if not asg:
        raise ValueError("empty cylinder assignment")
    bad = {str(g): k for g, k in asg.items() if not 0 <= k < tm.m}
    if bad:
        raise BadStochasticError(f"symbols {bad} outside 0..{tm.m - 1}")
    return float(_eliminate(tm, [], asg))


def marginal(tm: TreeMarkovMeasure, F: Iterable[Word]) -> np.ndarray:
    """
    Exact joint law of (x(f))_{f ∈ F}.

    Returns:
        array with one axis of length m per word of F, in length-lex order of F
    """
    words = sorted_words(F)
    if not words:
        raise ValueError("marginal over an empty set")
    return _eliminate(tm, words, {})


class FiniteAction(BaseModel):
    """Left action x ↦ s·x of the generators on {0..N-1} with invariant mu and base partition alpha."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rank: PositiveInt
    perms: tuple[tuple[int, ...], ...]
    mu: np.ndarray
    alpha: tuple[int, ...]

    @model_validator(mode="before")
    @classmethod
    def coerce(cls, data: dict) -> dict:
        data = dict(data)
        data["mu"] = _frozen(np.asarray(data["mu"], dtype=float))
        data["perms"] = tuple(tuple(int(x) for x in p) for p in data["perms"])
        data["alpha"] = tuple(int(x) for x in data["alpha"])
        data.setdefault("rank", len(data["perms"]))
        return data

    @model_validator(mode="after")
    def check_action(self) -> "FiniteAction":
        n = self.size
        if len(self.perms) != self.rank:
            raise RankMismatchError(f"{len(self.perms)} permutations for rank {self.rank}")
        if len(self.alpha) != n:
            raise BadStochasticError(f"alpha labels {len(self.alpha)} points, mu has {n}")
        if np.any(self.mu < 0) or abs(self.mu.sum() - 1.0) > settings.STOCHASTIC_TOL:
            raise BadStochasticError("mu is not a probability vector")
        for i, perm in enumerate(self.perms, start=1):
            if sorted(perm) != list(range(n)):
                raise NonBijectiveError(f"generator {i} does not permute 0..{n - 1}")
            moved = np.empty(n)
            moved[list(perm)] = self.mu
            if np.max(np.abs(moved - self.mu)) > settings.STOCHASTIC_TOL:
                raise NotInvariantError(f"mu is not invariant under generator {i}")
        return self

    @property
    def size(self) -> int:
        return len(self.mu)

    def letter_map(self, letter: int) -> np.ndarray:
        perm = np.asarray(self.perms[abs(letter) - 1])
        if letter > 0:
            return perm
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return inv

    def word_map(self, w: Word) -> np.ndarray:
        """x ↦ w·x as an index array (the last letter acts first)."""
        if w.rank != self.rank:
            raise RankMismatchError(f"word of rank {w.rank} for a rank-{self.rank} action")
        points = np.arange(self.size)
        for x in reversed(w.letters):
            points = self.letter_map(x)[points]
        return points


def new_finite_action(
    perms: Sequence[Sequence[int]], mu: Sequence[float], alpha: Sequence[int]
) -> FiniteAction:
    return FiniteAction(rank=len(perms), perms=perms, mu=mu, alpha=alpha)


def uniform_trivial_action(n: int, rank: int) -> FiniteAction:
    """n points, every generator fixing every point, uniform measure, point partition."""
    identity = list(range(n))
    return FiniteAction(rank=rank, perms=[identity] * rank, mu=np.full(n, 1.0 / n), alpha=identity)


def canonical_labels(rows: np.ndarray) -> np.ndarray:
    """Relabel cells by order of first occurrence so equal partitions get equal arrays."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    rank_of = np.argsort(np.argsort(first))
    return rank_of[np.ravel(inverse)]


def join_labeling(fa: FiniteAction, F: Iterable[Word]) -> np.ndarray:
    """Cell ids of F·α: x is labelled by (alpha(f^-1·x))_{f ∈ F}."""
    words = sorted_words(F)
    if not words:
        raise ValueError("join over an empty set")
    alpha = np.asarray(fa.alpha)
    columns = [alpha[fa.word_map(f.inverse())] for f in words]
    return canonical_labels(np.stack(columns, axis=1))


def cell_masses(fa: FiniteAction, labels: np.ndarray) -> np.ndarray:
    return np.bincount(labels, weights=fa.mu, minlength=int(labels.max()) + 1)
