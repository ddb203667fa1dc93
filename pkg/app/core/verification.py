"""
Verification Service bundling the check suites behind the CLI verbs.
Each suite returns a VerificationReport whose records name the statement they exercise.
"""

import logging
from fractions import Fraction

import numpy as np

from app.config import settings
from app.core.config_file import VfBlock, measure_document
from app.core.entropy import (
    GenSet,
    ball_identity_total,
    big_F,
    f_limit,
    f_markov,
)
from app.core.errors import (
    ConfigError,
    ImageTooLargeError,
    InternalError,
    RankMismatchError,
)
from app.core.measures import FiniteAction, TreeMarkovMeasure
from app.core.models import CheckRecord, EntropyReport, MarkovDocument, VerificationReport
from app.core.sampling import (
    new_rng,
    random_bi_connected_set,
    random_connected_set,
    random_coset_action,
)
from app.core.subgroups import (
    CosetAction,
    TransversalData,
    action_from_connected_set,
    check_comb_identity,
    check_subedge_identity,
    evaluate_T_word,
    intersect_actions,
    kps_scaling,
    normal_core,
    rank_formula,
    rewrite_in_T,
    schreier_transversal,
    transversal_from_delta,
    virtual_f,
)
from app.core.transforms import empirical_pairs, markov_approx, restrict_finite, restrict_markov
from app.core.words import Word, ball, tree_hull

logger = logging.getLogger(__name__)

Measure = TreeMarkovMeasure | FiniteAction

# Largest normal-core index whose restricted action is still checked
CORE_CHECK_MAX_INDEX = 24
# Random sets U tried in the finitary upper bound, and their largest size
RANDOM_U_CHECKS = 3
RANDOM_U_MAX_SIZE = 3
# H ∩ K is checked against a random K of index at most this
INTERSECTION_MAX_OTHER_INDEX = 3
# Markov restrictions to H ∩ K need m^(2·index) joint cells
INTERSECTION_MAX_CELLS = 2**16


class VerificationService:
    """Runs entropy computations and the check suites with run-level options."""

    def __init__(self, tol: float | None = None, n_max: int | None = None):
        self.tol = settings.CROSS_METHOD_TOL if tol is None else tol
        self.n_max = n_max

    def entropy(self, measure: Measure) -> EntropyReport:
        """f of a measure: the closed form for Markov measures, the stabilized ball limit otherwise."""
        report = f_limit(measure, n_max=self.n_max)
        if isinstance(measure, TreeMarkovMeasure):
            closed = f_markov(measure)
            if abs(closed - report.value) > self.tol * (1 + abs(closed)):
                raise InternalError(f"closed form {closed!r} and ball value {report.value!r} disagree")
        elif not report.stabilized:
            logger.warning(f"join partitions still refining at radius {report.radius}; value is an upper bound")
        return report

    def f_value(self, measure: Measure) -> float:
        if isinstance(measure, TreeMarkovMeasure):
            return f_markov(measure)
        return self.entropy(measure).value

    def restricted_f(self, measure: Measure, act: CosetAction, td: TransversalData) -> float:
        if isinstance(measure, TreeMarkovMeasure):
            return f_markov(restrict_markov(measure, act, td))
        return self.entropy(restrict_finite(measure, act, td)).value

    def verify_subgroup(
        self,
        measure: Measure,
        act: CosetAction,
        config_hash: str | None = None,
        seed: int | None = None,
    ) -> VerificationReport:
        """
        Compare f over H with |G : H| times f over G, together with the exact
        counting statements the comparison rests on.
        """
        if measure.rank != act.rank:
            raise RankMismatchError(f"measure of rank {measure.rank} with action of rank {act.rank}")
        logger.info(f"Verifying subgroup formula for index {act.index}")

        report = VerificationReport(command="verify-subgroup", config_hash=config_hash)
        rng = new_rng(settings.DEFAULT_SEED if seed is None else seed)
        td = schreier_transversal(act)
        f_G = self.f_value(measure)
        f_H = self.restricted_f(measure, act, td)
        n = act.index
        report.add(
            CheckRecord(
                name="subgroup formula",
                lhs=f_H,
                rhs=n * f_G,
                tolerance=self.tol * (1 + abs(f_G)),
                passed=abs(f_H - n * f_G) <= self.tol * (1 + abs(f_G)),
                anchor="f_H = |G : H| · f_G",
                in_nats=True,
            )
        )
        report.add(_rank_record(td, act))
        subedge = check_subedge_identity(td, act)
        report.add(
            CheckRecord(
                name="subedge identity",
                lhs=str(subedge.lhs),
                rhs=str(subedge.rhs),
                passed=subedge.holds,
                anchor="Σ_t (R(tΔ ∪ Δ) − R(Δ)) = |T|·R(Δ) + Σ_s (R(Δs ∪ Δ) − R(Δ))",
            )
        )
        for record in self._finitary_bounds(measure, act, td, rng):
            report.add(record)
        core = self._core_record(measure, act, f_G)
        if core is not None:
            report.add(core)
        intersection = self._intersection_record(measure, act, f_G, rng)
        if intersection is not None:
            report.add(intersection)

        report.details = {
            "f_G": f_G,
            "f_H": f_H,
            "index": n,
            "num_generators": len(td.gens),
            "delta": [str(d) for d in td.delta],
            "T": [str(t) for t in td.gens],
        }
        return report

    def _finitary_bounds(
        self, measure: Measure, act: CosetAction, td: TransversalData, rng: np.random.Generator
    ) -> list[CheckRecord]:
        n = act.index
        gens_H = GenSet(words=td.gens)
        gens_G = GenSet.letters(act.rank)
        identity = Word.identity(act.rank)
        slack = self.tol

        # upper bound with U = {1_G}
        restricted = big_F(measure, gens_H, td.delta).value
        upper_rhs = n * big_F(measure, gens_G, {identity}).value
        records = [
            CheckRecord(
                name="finitary upper bound",
                lhs=restricted,
                rhs=upper_rhs,
                tolerance=slack,
                passed=restricted <= upper_rhs + slack,
                anchor="F_H(T, ΔU·α) ≤ |G : H| · F_G(S, U·α)",
                in_nats=True,
            )
        ]
        for _ in range(RANDOM_U_CHECKS):
            # bi-connected U keeps ΔU and tΔU ∪ ΔU right-connected (closed-form Markov joins)
            U = random_bi_connected_set(rng, act.rank, int(rng.integers(2, RANDOM_U_MAX_SIZE + 1)))
            lhs = big_F(measure, gens_H, {d * u for d in td.delta for u in U}).value
            rhs = n * big_F(measure, gens_G, U).value
            records.append(
                CheckRecord(
                    name=f"finitary upper bound (U = {{{', '.join(str(u) for u in sorted(U))}}})",
                    lhs=lhs,
                    rhs=rhs,
                    tolerance=slack,
                    passed=lhs <= rhs + slack,
                    anchor="F_H(T, ΔU·α) ≤ |G : H| · F_G(S, U·α)",
                    in_nats=True,
                )
            )
        if isinstance(measure, FiniteAction):
            # lower bound with V = Δ and W the left hull of TΔ ∪ {1_G}
            shifted = {t * d for t in td.gens for d in td.delta} | {identity}
            W = tree_hull(shifted, "left")
            lower_rhs = n * big_F(measure, gens_G, W).value
            records.append(
                CheckRecord(
                    name="finitary lower bound",
                    lhs=restricted,
                    rhs=lower_rhs,
                    tolerance=slack,
                    passed=restricted >= lower_rhs - slack,
                    anchor="F_H(T, V·α) ≥ |G : H| · F_G(S, W·α)",
                    in_nats=True,
                )
            )
        return records

    def _core_record(self, measure: Measure, act: CosetAction, f_G: float) -> CheckRecord | None:
        """Index-normalised entropy of the normal core, for finite actions with a small core."""
        if not isinstance(measure, FiniteAction):
            return None
        try:
            core = normal_core(act, max_order=CORE_CHECK_MAX_INDEX)
        except ImageTooLargeError:
            logger.debug("normal core too large to check")
            return None
        f_K = self.restricted_f(measure, core, schreier_transversal(core))
        return CheckRecord(
            name="normal core",
            lhs=f_K / core.index,
            rhs=f_G,
            tolerance=self.tol * (1 + abs(f_G)),
            passed=abs(f_K / core.index - f_G) <= self.tol * (1 + abs(f_G)),
            anchor="f_K / |G : K| = f_G for the normal core K",
            in_nats=True,
        )

    def _intersection_record(
        self, measure: Measure, act: CosetAction, f_G: float, rng: np.random.Generator
    ) -> CheckRecord | None:
        """f over H ∩ K for a random K of small index; None when the restriction is too large."""
        other = random_coset_action(rng, act.rank, INTERSECTION_MAX_OTHER_INDEX)
        meet = intersect_actions(act, other)
        cells = measure.m ** (2 * meet.index) if isinstance(measure, TreeMarkovMeasure) else 0
        if cells > INTERSECTION_MAX_CELLS:
            logger.debug(f"H ∩ K of index {meet.index} too large to restrict")
            return None
        f_meet = self.restricted_f(measure, meet, schreier_transversal(meet))
        expected = meet.index * f_G
        return CheckRecord(
            name="intersection",
            lhs=f_meet,
            rhs=expected,
            tolerance=self.tol * (1 + abs(f_G)) * meet.index,
            passed=abs(f_meet - expected) <= self.tol * (1 + abs(f_G)) * meet.index,
            anchor="f_{H ∩ K} = |G : H ∩ K| · f_G",
            in_nats=True,
        )

    def verify_identities(self, rank: int, radius: int, seed: int, count: int) -> VerificationReport:
        """Exact counting identities over `count` seeded random instances."""
        if rank not in (2, 3):
            raise ConfigError(f"identity suite runs for rank 2 or 3, got {rank}")
        if not 0 <= radius <= 4:
            raise ConfigError(f"radius must be between 0 and 4, got {radius}")
        if count < 0:
            raise ConfigError("count must be non-negative")
        logger.info(f"Checking identities: rank {rank}, radius {radius}, {count} instances")

        report = VerificationReport(command="verify-identities")
        rng = new_rng(seed)
        max_size = 2 * radius + 1
        for i in range(count):
            K = ball(rank, radius) if i == 0 else random_connected_set(
                rng, rank, int(rng.integers(1, max_size + 1)), "left"
            )
            total = ball_identity_total(rank, K)
            report.add(
                CheckRecord(
                    name=f"ball identity #{i}",
                    lhs=float(total),
                    rhs=1.0,
                    passed=total == 1,
                    anchor="1 = (1 − 2r)|K| + Σ_s |sK ∪ K|",
                )
            )

            delta = random_bi_connected_set(rng, rank, int(rng.integers(1, max_size + 1)))
            comb = check_comb_identity(delta)
            report.add(
                CheckRecord(
                    name=f"comb identity #{i}",
                    lhs=str(comb.lhs),
                    rhs=str(comb.rhs),
                    passed=comb.holds,
                    anchor="|Δ|·Σ_s (R(sΔ∪Δ) − R(Δ)) = Σ_s (R(Δs∪Δ) − R(Δ)) + (|Δ|(r−1)+1)·R(Δ)",
                )
            )

            for td, act in self._random_transversals(rng, rank, max_size):
                subedge = check_subedge_identity(td, act)
                report.add(
                    CheckRecord(
                        name=f"subedge identity #{i} (index {act.index})",
                        lhs=str(subedge.lhs),
                        rhs=str(subedge.rhs),
                        passed=subedge.holds,
                        anchor="Σ_t (R(tΔ ∪ Δ) − R(Δ)) = |T|·R(Δ) + Σ_s (R(Δs ∪ Δ) − R(Δ))",
                    )
                )
                report.add(_rank_record(td, act))
                report.add(_rewrite_record(td, act, rng))

        report.details = {"rank": rank, "radius": radius, "seed": seed, "count": count}
        return report

    @staticmethod
    def _random_transversals(
        rng: np.random.Generator, rank: int, max_size: int
    ) -> list[tuple[TransversalData, CosetAction]]:
        """A least-word transversal of a random action and a random right-connected transversal."""
        act = random_coset_action(rng, rank, 6)
        size = int(rng.integers(1, min(max_size, 6) + 1))
        shaped, members = action_from_connected_set(random_connected_set(rng, rank, size, "right"))
        return [
            (schreier_transversal(act), act),
            (transversal_from_delta(shaped, members), shaped),
        ]

    def approx(self, measure: Measure, config_hash: str | None = None) -> tuple[MarkovDocument, VerificationReport]:
        """Markov approximation from the pair marginals, and the check that F is unchanged."""
        logger.info("Building Markov approximation")
        pi, joints = empirical_pairs(measure)
        approximation = markov_approx(pi, joints)

        report = VerificationReport(command="approx", config_hash=config_hash)
        original = big_F(measure, GenSet.letters(measure.rank), {Word.identity(measure.rank)}).value
        approximated = f_markov(approximation)
        tol = settings.STOCHASTIC_TOL * (1 + abs(original))
        report.add(
            CheckRecord(
                name="approximation preserves F",
                lhs=approximated,
                rhs=original,
                tolerance=tol,
                passed=abs(approximated - original) <= tol,
                anchor="F_G(μ′, S, α) = F_G(μ, S, α)",
                in_nats=True,
            )
        )
        drift = max(
            float(np.max(np.abs(approximation.pair_joint(s) - joint)))
            for s, joint in enumerate(joints, start=1)
        )
        report.add(
            CheckRecord(
                name="pair marginals reproduced",
                lhs=drift,
                rhs=0.0,
                tolerance=settings.STOCHASTIC_TOL,
                passed=drift <= settings.STOCHASTIC_TOL,
                anchor="μ′(A_1 ∩ s·A_2) = μ(A_1 ∩ s·A_2)",
            )
        )
        report.details = {"F": original, "symbols": approximation.m}
        return measure_document(approximation), report

    def vf(self, measure: Measure, block: VfBlock, config_hash: str | None = None) -> VerificationReport:
        """Virtual f-invariant entropy from r(G) or from the orders of a graph of finite groups."""
        report = VerificationReport(command="vf", config_hash=config_hash)
        f_G = self.f_value(measure)
        if block.rank is not None:
            if block.rank != measure.rank:
                raise RankMismatchError(f"[vf] rank {block.rank} but the measure has rank {measure.rank}")
            rank_minus_one: Fraction | int = block.rank - 1
        else:
            kps = block.kps
            chi = kps_scaling(kps.edges, kps.vertices)
            rank_minus_one = kps.index * chi
            if kps.index > 1:
                report.add(
                    CheckRecord(
                        name="rank from graph of groups",
                        lhs=float(measure.rank - 1),
                        rhs=float(rank_minus_one),
                        passed=Fraction(measure.rank - 1) == rank_minus_one,
                        anchor="r(G) − 1 = |Γ : G| · (Σ 1/|E| − Σ 1/|V|)",
                    )
                )
        value = virtual_f(f_G, rank_minus_one)
        logger.info(f"vf = {value}")
        report.details = {
            "f_G": f_G,
            "scaling": str(1 / Fraction(rank_minus_one)),
            "vf": value,
        }
        return report


def _rank_record(td: TransversalData, act: CosetAction) -> CheckRecord:
    expected = rank_formula(act.index, act.rank)
    return CheckRecord(
        name=f"rank formula (index {act.index})",
        lhs=float(len(td.gens)),
        rhs=float(expected),
        passed=len(td.gens) == expected,
        anchor="|T| = |G : H|(r − 1) + 1",
    )


def _rewrite_record(td: TransversalData, act: CosetAction, rng: np.random.Generator) -> CheckRecord:
    """Rewrite a random product of Schreier generators and evaluate it back."""
    picks = rng.integers(1, len(td.gens) + 1, size=3) * rng.choice([-1, 1], size=3)
    h = evaluate_T_word(td, [int(k) for k in picks])
    back = evaluate_T_word(td, rewrite_in_T(td, act, h))
    return CheckRecord(
        name=f"Schreier rewriting (index {act.index})",
        lhs=str(back),
        rhs=str(h),
        passed=back == h,
        anchor="h = Π t^±1 read along the coset path of h",
    )
