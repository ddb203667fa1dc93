"""
Run configs: TOML files validated into pydantic models, and the builders that turn
them into measures and coset actions. The grammar is documented in README.md.
"""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, Field, PositiveInt, field_validator, model_validator

from app.config import settings
from app.core.errors import ConfigError, RankMismatchError
from app.core.measures import (
    FiniteAction,
    SymbolLegend,
    TreeMarkovMeasure,
    bernoulli,
    new_finite_action,
)
from app.core.models import MarkovDocument
from app.core.subgroups import CosetAction, new_coset_action, parse_permutation
from app.core.words import MAX_SERIALIZED_RANK, Word, letter_name
from app.util import content_hash

logger = logging.getLogger(__name__)

PermSpec = str | list[int]


def generator_names(rank: int) -> list[str]:
    return [letter_name(i) for i in range(1, rank + 1)]


def _check_generator_keys(keys: list[str]) -> int:
    """Keys must be exactly a, b, c, ... in some order; returns the rank."""
    rank = len(keys)
    if rank == 0 or rank > MAX_SERIALIZED_RANK:
        raise ConfigError(f"need between 1 and {MAX_SERIALIZED_RANK} generators, got {rank}")
    if sorted(keys) != generator_names(rank):
        raise ConfigError(f"generators must be named {generator_names(rank)}, got {sorted(keys)}")
    return rank


class MarkovBlock(BaseModel):
    kind: Literal["markov"]
    pi: list[float] = Field(..., description="Stationary vector")
    P: dict[str, list[list[float]]] = Field(..., description="Generator name → transition matrix")

    @field_validator("P")
    def validate_P(cls, v):
        _check_generator_keys(list(v))
        return v

    @property
    def rank(self) -> int:
        return len(self.P)


class BernoulliBlock(BaseModel):
    kind: Literal["bernoulli"]
    dist: list[float] = Field(..., description="Symbol distribution")
    rank: PositiveInt = Field(2, le=MAX_SERIALIZED_RANK)


class FiniteBlock(BaseModel):
    kind: Literal["finite"]
    perm: dict[str, PermSpec] = Field(..., description="Generator name → permutation of the points")
    points: PositiveInt | None = Field(None, description="Number of points; inferred from mu")
    mu: list[float] | None = Field(None, description="Invariant measure; uniform when omitted")
    alpha: list[int] | None = Field(None, description="Base partition labels; points when omitted")

    @field_validator("perm")
    def validate_perm(cls, v):
        _check_generator_keys(list(v))
        return v

    @model_validator(mode="after")
    def check_points(self) -> "FiniteBlock":
        if self.points is None and self.mu is None:
            raise ConfigError("a finite measure needs `points` or `mu`")
        if self.points is not None and self.mu is not None and self.points != len(self.mu):
            raise ConfigError(f"points = {self.points} but mu has {len(self.mu)} entries")
        return self

    @property
    def rank(self) -> int:
        return len(self.perm)

    @property
    def size(self) -> int:
        return self.points if self.points is not None else len(self.mu or [])


MeasureBlock = Annotated[MarkovBlock | BernoulliBlock | FiniteBlock, Field(discriminator="kind")]


class ActionBlock(BaseModel):
    rank: PositiveInt | None = None
    index: PositiveInt | None = Field(None, description="Number of cosets; inferred when omitted")
    perm: dict[str, PermSpec]

    @field_validator("perm")
    def validate_perm(cls, v):
        _check_generator_keys(list(v))
        return v


class OptionsBlock(BaseModel):
    n_max: int | None = Field(None, ge=0, le=8, description="Largest ball radius for f_limit")
    tol: float = Field(settings.CROSS_METHOD_TOL, gt=0, le=1e-3)
    seed: int = Field(settings.DEFAULT_SEED, ge=0)
    log2: bool = Field(False, description="Display values in bits")


class KpsBlock(BaseModel):
    """Orders of the edge and vertex groups of a finite graph of finite groups."""

    edges: list[PositiveInt]
    vertices: list[PositiveInt] = Field(..., min_length=1)
    index: PositiveInt = Field(1, description="Index of the free subgroup in the virtually free group")


class VfBlock(BaseModel):
    rank: PositiveInt | None = Field(None, description="Rank r(G) of the free subgroup")
    kps: KpsBlock | None = None

    @model_validator(mode="after")
    def check_one_source(self) -> "VfBlock":
        if (self.rank is None) == (self.kps is None):
            raise ConfigError("[vf] needs exactly one of `rank` or a [vf.kps] table")
        return self


class RunConfig(BaseModel):
    command: str | None = Field(None, description="Verb the file was written for")
    measure: MeasureBlock | None = None
    action: ActionBlock | None = None
    options: OptionsBlock = Field(default_factory=OptionsBlock)
    vf: VfBlock | None = None

    def require_measure(self) -> MarkovBlock | BernoulliBlock | FiniteBlock:
        if self.measure is None:
            raise ConfigError("config has no [measure] table")
        return self.measure

    def require_action(self) -> ActionBlock:
        if self.action is None:
            raise ConfigError("config has no [action] table")
        return self.action

    def require_vf(self) -> VfBlock:
        if self.vf is None:
            raise ConfigError("config has no [vf] table")
        return self.vf


def parse_run_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"not valid TOML: {e}") from e
    return RunConfig.model_validate(data)


def load_run_config(path: str | Path) -> tuple[RunConfig, str]:
    """Read and validate a config file; returns it with the hash of its contents."""
    text = Path(path).read_text(encoding="utf-8")
    config = parse_run_config(text)
    digest = content_hash(text)
    logger.debug(f"loaded {path} ({digest})")
    return config, digest


def build_measure(block: MarkovBlock | BernoulliBlock | FiniteBlock) -> TreeMarkovMeasure | FiniteAction:
    if isinstance(block, MarkovBlock):
        trans = [block.P[name] for name in generator_names(block.rank)]
        return TreeMarkovMeasure(pi=block.pi, trans=trans)
    if isinstance(block, BernoulliBlock):
        return bernoulli(block.dist, block.rank)

    n = block.size
    perms = [parse_permutation(block.perm[name], n) for name in generator_names(block.rank)]
    mu = block.mu if block.mu is not None else np.full(n, 1.0 / n)
    alpha = block.alpha if block.alpha is not None else list(range(n))
    return new_finite_action(perms, mu, alpha)


def build_action(block: ActionBlock, rank: int) -> CosetAction:
    if block.rank is not None and block.rank != rank:
        raise RankMismatchError(f"[action] declares rank {block.rank}, the measure has rank {rank}")
    if len(block.perm) != rank:
        raise RankMismatchError(f"[action] gives {len(block.perm)} permutations for rank {rank}")
    perms = [block.perm[name] for name in generator_names(rank)]
    return new_coset_action(rank, perms, block.index)


def measure_document(tm: TreeMarkovMeasure) -> MarkovDocument:
    names = generator_names(tm.rank)
    legend = None
    legend_words = None
    group_rank = None
    if tm.legend is not None:
        legend = {str(i): list(p) for i, p in enumerate(tm.legend.patterns)}
        legend_words = [str(w) for w in tm.legend.words]
        group_rank = tm.legend.words[0].rank
    return MarkovDocument(
        m=tm.m,
        pi=tm.pi.tolist(),
        P={name: p.tolist() for name, p in zip(names, tm.trans)},
        legend=legend,
        legend_words=legend_words,
        group_rank=group_rank,
    )


def measure_from_document(doc: MarkovDocument) -> TreeMarkovMeasure:
    """Rebuild a measure from its document; generators must be named a, b, c, ..."""
    count = _check_generator_keys(list(doc.P))
    trans = [doc.P[name] for name in generator_names(count)]
    legend = None
    if doc.legend is not None and doc.legend_words is not None:
        word_rank = doc.group_rank or count
        patterns = tuple(tuple(doc.legend[str(i)]) for i in range(doc.m))
        legend = SymbolLegend(
            words=tuple(Word.parse(w, word_rank) for w in doc.legend_words), patterns=patterns
        )
    return TreeMarkovMeasure(pi=doc.pi, trans=trans, legend=legend)
