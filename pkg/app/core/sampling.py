"""
Seeded random instances for the verification suites and the tests.

Every function takes a numpy Generator so a run is reproducible from its seed.
"""

import logging

import networkx as nx
import numpy as np

from app.config import settings
from app.core.errors import NotTransitiveError
from app.core.measures import FiniteAction, TreeMarkovMeasure, bernoulli
from app.core.subgroups import CosetAction
from app.core.words import Side, Word, letter_order, neighbours

logger = logging.getLogger(__name__)

# Keeps sampled probabilities away from zero so validation never sees ZeroMass
_FLOOR = 0.05


def new_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)


def random_dist(rng: np.random.Generator, m: int) -> np.ndarray:
    """Strictly positive probability vector of length m."""
    p = rng.dirichlet(np.ones(m)) + _FLOOR / m
    return p / p.sum()


def _metropolis_kernel(rng: np.random.Generator, pi: np.ndarray) -> np.ndarray:
    """A random kernel reversible with respect to pi."""
    m = len(pi)
    proposal = rng.dirichlet(np.ones(m), size=m)
    kernel = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            if a != b:
                accept = min(1.0, pi[b] * proposal[b, a] / (pi[a] * proposal[a, b]))
                kernel[a, b] = proposal[a, b] * accept
        kernel[a, a] = 1.0 - kernel[a].sum()
    return kernel


def random_markov(rng: np.random.Generator, rank: int, m: int) -> TreeMarkovMeasure:
    """
    Stationary tree-Markov measure with m symbols.

    Each P_s is a product of two Metropolis kernels for the same pi; the product keeps
    pi stationary and is in general not reversible.
    """
    pi = random_dist(rng, m)
    trans = [_metropolis_kernel(rng, pi) @ _metropolis_kernel(rng, pi) for _ in range(rank)]
    # rows can drift by a few ulps after the product
    trans = [p / p.sum(axis=1, keepdims=True) for p in trans]
    return TreeMarkovMeasure(pi=pi, trans=trans)


def random_bernoulli(rng: np.random.Generator, rank: int, m: int) -> TreeMarkovMeasure:
    return bernoulli(random_dist(rng, m), rank)


def random_finite_action(rng: np.random.Generator, rank: int, max_points: int = 6) -> FiniteAction:
    """
    Random permutations on at most `max_points` points, a measure that is constant on
    every orbit of the generated group, and a random base partition.
    """
    n = int(rng.integers(1, max_points + 1))
    perms = [rng.permutation(n) for _ in range(rank)]

    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from((x, int(p[x])) for p in perms for x in range(n))
    mu = np.zeros(n)
    for orbit in nx.connected_components(graph):
        members = list(orbit)
        mu[members] = rng.uniform(0.5, 1.5) / len(members)
    mu /= mu.sum()

    cells = int(rng.integers(1, n + 1))
    alpha = rng.integers(0, cells, size=n)
    return FiniteAction(rank=rank, perms=perms, mu=mu, alpha=alpha)


def random_coset_action(rng: np.random.Generator, rank: int, max_index: int) -> CosetAction:
    """A transitive action on n ≤ max_index cosets; coset 0 is H."""
    n = int(rng.integers(1, max_index + 1))
    while True:
        perms = tuple(tuple(int(x) for x in rng.permutation(n)) for _ in range(rank))
        try:
            return CosetAction(rank=rank, index=n, perms=perms)
        except NotTransitiveError:
            continue


def random_connected_set(
    rng: np.random.Generator, rank: int, size: int, side: Side = "right"
) -> frozenset[Word]:
    """Grow a connected set from 1_G by attaching random tree neighbours."""
    members = [Word.identity(rank)]
    seen = set(members)
    while len(members) < size:
        base = members[int(rng.integers(len(members)))]
        nbs = neighbours(base, side)
        w = nbs[int(rng.integers(len(nbs)))]
        if w not in seen:
            seen.add(w)
            members.append(w)
    return frozenset(members)


def random_bi_connected_set(rng: np.random.Generator, rank: int, size: int) -> frozenset[Word]:
    """
    Grow a set containing 1_G one word at a time, only ever adding words whose
    longest proper prefix and suffix are already members.
    """
    members = {Word.identity(rank)}
    while len(members) < size:
        candidates = sorted(
            {
                w * Word.letter(x, rank)
                for w in members
                for x in letter_order(rank)
                if (w * Word.letter(x, rank)).length == w.length + 1
            }
            - members,
            key=Word.sort_key,
        )
        candidates = [
            c
            for c in candidates
            if Word(rank=rank, letters=c.letters[:-1]) in members
            and Word(rank=rank, letters=c.letters[1:]) in members
        ]
        members.add(candidates[int(rng.integers(len(candidates)))])
    return frozenset(members)
