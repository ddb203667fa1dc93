"""
Reduced-word algebra for a free group of rank r and exact combinatorics of its
right and left Cayley trees.

Letters are signed generator indices: +i stands for s_i and -i for s_i^-1,
with 1 <= i <= r. The fixed letter order is s1 < s1^-1 < s2 < s2^-1 < ...
and every length-lex order in the package uses it. Products and inverses are
computed on sympy free group elements; `Word` keeps the letter tuple as its
hashable, ordered form.
"""

import logging
from functools import lru_cache, total_ordering
from itertools import groupby
from typing import Any, Iterable, Literal, Sequence

import networkx as nx
from pydantic import BaseModel, ConfigDict, PositiveInt, model_validator
from sympy.combinatorics.free_groups import FreeGroup, FreeGroupElement, free_group

from app.core.errors import RankMismatchError, WordFormatError

logger = logging.getLogger(__name__)

Side = Literal["right", "left"]

# Serialization: generator i is the i-th lowercase letter, its inverse the uppercase one.
MAX_SERIALIZED_RANK = 26
IDENTITY_TOKENS = ("", "1")


def letter_order(rank: int) -> tuple[int, ...]:
    """All letters of S ∪ S^-1 in the fixed order s1, s1^-1, s2, s2^-1, ..."""
    return tuple(x for i in range(1, rank + 1) for x in (i, -i))


def letter_key(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (1 if letter < 0 else 0)


def letter_name(letter: int) -> str:
    name = chr(ord("a") + abs(letter) - 1)
    return name if letter > 0 else name.upper()


@lru_cache(maxsize=None)
def free_group_of(rank: int) -> FreeGroup:
    """The sympy free group on s1, ..., s_rank."""
    return free_group(", ".join(f"s{i}" for i in range(1, rank + 1)))[0]


@lru_cache(maxsize=None)
def _symbol_index(rank: int) -> dict:
    return {sym: i for i, sym in enumerate(free_group_of(rank).symbols, start=1)}


def to_element(letters: Iterable[int], rank: int) -> FreeGroupElement:
    group = free_group_of(rank)
    element = group.identity
    for x, run in groupby(letters):
        power = len(list(run))
        element = element * group.generators[abs(x) - 1] ** (power if x > 0 else -power)
    return element


def element_letters(element: FreeGroupElement, rank: int) -> tuple[int, ...]:
    index = _symbol_index(rank)
    return tuple(
        index[sym] if exp > 0 else -index[sym]
        for sym, exp in element.array_form
        for _ in range(abs(exp))
    )


def free_reduce(letters: Iterable[int], rank: int | None = None) -> tuple[int, ...]:
    """Freely reduced form of a letter sequence; rank defaults to the largest index used."""
    letters = tuple(letters)
    if any(x == 0 for x in letters):
        raise WordFormatError("0 is not a letter index")
    if not letters:
        return ()
    rank = rank or max(abs(x) for x in letters)
    bad = [x for x in letters if abs(x) > rank]
    if bad:
        raise WordFormatError(f"letters {bad} outside generators 1..{rank}")
    return element_letters(to_element(letters, rank), rank)


@total_ordering
class Word(BaseModel):
    """A reduced word; the empty word is the identity 1_G."""

    model_config = ConfigDict(frozen=True)

    rank: PositiveInt
    letters: tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def reduce_letters(cls, data: Any) -> Any:
        if isinstance(data, dict) and "rank" in data:
            data = dict(data)
            data["letters"] = free_reduce(data.get("letters", ()), int(data["rank"]))
        return data

    @classmethod
    def from_element(cls, element: FreeGroupElement, rank: int) -> "Word":
        # sympy elements are already reduced
        return cls.model_construct(rank=rank, letters=element_letters(element, rank))

    @property
    def element(self) -> FreeGroupElement:
        return to_element(self.letters, self.rank)

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls(rank=rank, letters=())

    @classmethod
    def letter(cls, letter: int, rank: int) -> "Word":
        return cls(rank=rank, letters=(letter,))

    @classmethod
    def parse(cls, text: str, rank: int) -> "Word":
        """
        Parse the string form: "a".."z" for generators, "A".."Z" for inverses.

        "e" is the identity for ranks below 5; "1" and "" are the identity for every rank.
        """
        if rank > MAX_SERIALIZED_RANK:
            raise WordFormatError(f"rank {rank} has no string form (max {MAX_SERIALIZED_RANK})")
        text = text.strip()
        if text in IDENTITY_TOKENS or (text == "e" and rank < 5):
            return cls.identity(rank)
        letters = []
        for ch in text:
            if not ch.isascii() or not ch.isalpha():
                raise WordFormatError(f"bad character {ch!r} in word {text!r}")
            index = ord(ch.lower()) - ord("a") + 1
            letters.append(index if ch.islower() else -index)
        return cls(rank=rank, letters=tuple(letters))

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def sort_key(self) -> tuple[int, tuple[int, ...]]:
        return len(self.letters), tuple(letter_key(x) for x in self.letters)

    def inverse(self) -> "Word":
        return Word.from_element(self.element**-1, self.rank)

    def __mul__(self, other: "Word") -> "Word":
        return mul(self, other)

    def __invert__(self) -> "Word":
        return self.inverse()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.rank == other.rank and self.letters == other.letters

    def __hash__(self) -> int:
        return hash((self.rank, self.letters))

    def __lt__(self, other: "Word") -> bool:
        _check_rank(self, other)
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.rank > MAX_SERIALIZED_RANK:
            return "·".join(f"s{abs(x)}" + ("^-1" if x < 0 else "") for x in self.letters) or "1"
        if not self.letters:
            return "e" if self.rank < 5 else "1"
        return "".join(letter_name(x) for x in self.letters)

    def __repr__(self) -> str:
        return f"Word({self})"


WordSet = frozenset[Word]


def _check_rank(*words: Word) -> int:
    ranks = {w.rank for w in words}
    if len(ranks) > 1:
        raise RankMismatchError(f"words of ranks {sorted(ranks)} cannot be combined")
    return ranks.pop()


def mul(w1: Word, w2: Word) -> Word:
    rank = _check_rank(w1, w2)
    return Word.from_element(w1.element * w2.element, rank)


def inverse(w: Word) -> Word:
    return w.inverse()


def sorted_words(words: Iterable[Word]) -> tuple[Word, ...]:
    """Canonical enumeration order of a word set (length-lex)."""
    return tuple(sorted(set(words), key=Word.sort_key))


def ball(rank: int, n: int) -> tuple[Word, ...]:
    """All reduced words of length <= n, in length-lex order."""
    if n < 0:
        raise ValueError("radius must be non-negative")
    level = [Word.identity(rank)]
    result = list(level)
    for _ in range(n):
        nxt = []
        for w in level:
            for x in letter_order(rank):
                if not w.letters or w.letters[-1] != -x:
                    nxt.append(Word(rank=rank, letters=w.letters + (x,)))
        result.extend(nxt)
        level = nxt
    return tuple(result)


def distance(g: Word, h: Word) -> int:
    return (g.inverse() * h).length


def on_geodesic(v: Word, g: Word, h: Word) -> bool:
    """True iff v lies on the right-tree geodesic from g to h (g is in the right past of h through v)."""
    return distance(g, v) + distance(v, h) == distance(g, h)


def separates(V: Iterable[Word], U: Iterable[Word], W: Iterable[Word]) -> bool:
    """Every geodesic from U to W passes through V."""
    V = list(V)
    return all(any(on_geodesic(v, u, w) for v in V) for u in U for w in W)


def neighbours(w: Word, side: Side) -> list[Word]:
    letters = [Word.letter(x, w.rank) for x in letter_order(w.rank)]
    if side == "right":
        return [w * s for s in letters]
    return [s * w for s in letters]


def connected_components(F: Iterable[Word], side: Side) -> list[WordSet]:
    """Maximal connected subsets under g ~ gs (right) or g ~ sg (left)."""
    members = set(F)
    graph = nx.Graph()
    graph.add_nodes_from(members)
    for w in members:
        for nb in neighbours(w, side):
            if nb in members:
                graph.add_edge(w, nb)
    components = [frozenset(c) for c in nx.connected_components(graph)]
    return sorted(components, key=lambda c: min(c).sort_key())


def is_connected(F: Iterable[Word], side: Side) -> bool:
    return len(connected_components(F, side)) == 1


def is_bi_connected(F: Iterable[Word]) -> bool:
    F = list(F)
    return is_connected(F, "right") and is_connected(F, "left")


def translate(F: Iterable[Word], g: Word, side: Side = "left") -> WordSet:
    """g·F for side='left', F·g for side='right'."""
    if side == "left":
        return frozenset(g * f for f in F)
    return frozenset(f * g for f in F)


def tree_hull(F: Iterable[Word], side: Side) -> WordSet:
    """Union of the geodesics between members of F in the right or left Cayley tree."""
    members = sorted_words(F)
    if not members:
        raise ValueError("tree_hull of an empty set")
    root = members[0]
    hull = {root}
    for f in members[1:]:
        if side == "right":
            path = (root.inverse() * f).letters
            node = root
            for x in path:
                node = node * Word.letter(x, node.rank)
                hull.add(node)
        else:
            path = (f * root.inverse()).letters
            node = root
            for x in reversed(path):
                node = Word.letter(x, node.rank) * node
                hull.add(node)
    return frozenset(hull)


class EdgeVector(BaseModel):
    """Formal sum Σ a_s · s over the free generators (one integer per generator)."""

    model_config = ConfigDict(frozen=True)

    rank: PositiveInt
    counts: tuple[int, ...]

    @model_validator(mode="after")
    def check_length(self) -> "EdgeVector":
        if len(self.counts) != self.rank:
            raise RankMismatchError(f"{len(self.counts)} counts for rank {self.rank}")
        return self

    @classmethod
    def zero(cls, rank: int) -> "EdgeVector":
        return cls(rank=rank, counts=(0,) * rank)

    @classmethod
    def generators_sum(cls, rank: int) -> "EdgeVector":
        """Σ_s s."""
        return cls(rank=rank, counts=(1,) * rank)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __add__(self, other: "EdgeVector") -> "EdgeVector":
        if self.rank != other.rank:
            raise RankMismatchError("edge vectors of different rank")
        return EdgeVector(rank=self.rank, counts=tuple(a + b for a, b in zip(self.counts, other.counts)))

    def __sub__(self, other: "EdgeVector") -> "EdgeVector":
        return self + (-1) * other

    def __rmul__(self, k: int) -> "EdgeVector":
        return EdgeVector(rank=self.rank, counts=tuple(k * a for a in self.counts))

    def __str__(self) -> str:
        terms = [f"{a}·{letter_name(i + 1)}" for i, a in enumerate(self.counts) if a]
        return " + ".join(terms) if terms else "0"


def edge_vector(F: Iterable[Word]) -> EdgeVector:
    """a_s = number of pairs (g, gs) with both ends in F."""
    members = set(F)
    if not members:
        raise ValueError("edge_vector of an empty set")
    rank = _check_rank(*members)
    counts = [0] * rank
    for g in members:
        for i in range(1, rank + 1):
            if g * Word.letter(i, rank) in members:
                counts[i - 1] += 1
    return EdgeVector(rank=rank, counts=tuple(counts))


def parse_words(texts: Sequence[str], rank: int) -> tuple[Word, ...]:
    return tuple(Word.parse(t, rank) for t in texts)
