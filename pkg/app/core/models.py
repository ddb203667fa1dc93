# For simplicity, this file contains the report and document models of the app.
# Domain types live next to the operations that use them.
import math

from pydantic import BaseModel, Field, computed_field, field_validator

# Detail keys of a VerificationReport that hold entropies (rescaled by --log2)
ENTROPY_DETAILS = frozenset({"f_G", "f_H", "vf", "F"})


class GeneratorTerm(BaseModel):
    generator: str = Field(..., description="String form of the generator word w")
    joint_entropy: float = Field(..., description="H(w·β ∨ β) in nats")


class EntropyReport(BaseModel):
    value: float = Field(..., description="F (or f once the sequence has settled) in nats")
    base_entropy: float = Field(..., description="H(β)")
    terms: list[GeneratorTerm] = Field(default_factory=list)
    sequence: list[float] = Field(default_factory=list, description="F over balls B(0), B(1), ...")
    stabilized: bool = Field(False, description="Join partitions stopped refining (finite actions)")
    radius: int | None = Field(None, description="Last ball radius evaluated")
    config_hash: str | None = None

    def consistency_gap(self) -> float:
        """|value − ((1 − 2r)·H(β) + Σ terms)|; zero up to rounding."""
        r = len(self.terms)
        return abs(self.value - ((1 - 2 * r) * self.base_entropy + sum(t.joint_entropy for t in self.terms)))

    def rescaled(self, factor: float) -> "EntropyReport":
        return self.model_copy(
            update={
                "value": self.value * factor,
                "base_entropy": self.base_entropy * factor,
                "terms": [
                    GeneratorTerm(generator=t.generator, joint_entropy=t.joint_entropy * factor)
                    for t in self.terms
                ],
                "sequence": [v * factor for v in self.sequence],
            }
        )


class CheckRecord(BaseModel):
    name: str = Field(..., description="Short name of the check")
    lhs: float | str = Field(..., description="Left-hand side (number or formal sum)")
    rhs: float | str = Field(..., description="Right-hand side (number or formal sum)")
    tolerance: float = Field(0.0, description="Allowed slack; 0 for exact identities")
    passed: bool
    anchor: str = Field(..., description="The statement this check exercises")
    in_nats: bool = Field(False, description="lhs, rhs and tolerance are entropies")


class VerificationReport(BaseModel):
    command: str
    config_hash: str | None = None
    records: list[CheckRecord] = Field(default_factory=list)
    details: dict[str, float | int | str | list[str] | None] = Field(default_factory=dict)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> int:
        return sum(1 for r in self.records if r.passed)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if not r.passed)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def exit_status(self) -> int:
        return 0 if self.failed == 0 else 1

    def add(self, record: CheckRecord) -> None:
        self.records.append(record)

    def rescaled(self, factor: float) -> "VerificationReport":
        """Entropy-valued numbers multiplied by `factor`; counts and formal sums untouched."""
        records = [
            r.model_copy(
                update={"lhs": r.lhs * factor, "rhs": r.rhs * factor, "tolerance": r.tolerance * factor}
            )
            if r.in_nats and isinstance(r.lhs, float) and isinstance(r.rhs, float)
            else r
            for r in self.records
        ]
        details = {
            k: v * factor if k in ENTROPY_DETAILS and isinstance(v, float) else v
            for k, v in self.details.items()
        }
        return VerificationReport(
            command=self.command, config_hash=self.config_hash, records=records, details=details
        )


class MarkovDocument(BaseModel):
    """Serialized tree-Markov measure; symbol ids index pi and the matrices."""

    m: int
    pi: list[float]
    P: dict[str, list[list[float]]] = Field(..., description="Generator name → row-major matrix")
    legend: dict[str, list[int]] | None = Field(
        None, description="Symbol id → pattern on `legend_words` for recoded alphabets"
    )
    legend_words: list[str] | None = None
    group_rank: int | None = Field(None, description="Rank of the group the legend words live in")

    @field_validator("pi")
    def validate_pi(cls, v):
        """Reject NaN and infinities early; the measure model checks the rest."""
        if any(not math.isfinite(x) for x in v):
            raise ValueError("pi must be finite")
        return v


class ApproxResult(BaseModel):
    measure: MarkovDocument
    report: VerificationReport
