"""N-sided dice rolling built from chained imbalanced coin flips.

The ladder: parties are numbered 1..N; parties 1 and 2 flip a balanced
coin, then each party m >= 3 challenges the current leader with an
imbalanced flip giving the entrant a 1/m honest winning chance. Honest play
leaves every party a 1/N overall chance. Worst-case analysis assumes all
parties but one collude; per-stage excess losing probabilities ("stage
biases") compose by an exact forward recursion, and the honest party's
total bias stays below N times the largest stage bias.

The six-round three-sided instance admits two stage-two layouts (leader
prepares, or entrant prepares); both are solved here by equalizing the
honest parties' worst-case losing probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from . import adversary
from .errors import ParameterError
from .fairness import (
    THREE_SIDED_CASE1_BRACKET,
    THREE_SIDED_CASE2_BRACKET,
    FairnessSolution,
    find_root,
    solve_balanced,
)
from .wcf import (
    AliceDelta,
    BobClaimWin,
    CheatSpec,
    Honest,
    ProtocolParams,
    Winner,
    audited_party,
    run_protocol,
    trial_rng,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)

INCUMBENT = "incumbent"
ENTRANT = "entrant"


# -- honest play and composition ----------------------------------------------


def honest_dice_probs(n_parties: int) -> tuple[Fraction, ...]:
    """Exact per-party winning probabilities under all-honest play.

    Party n wins its entry stage with probability 1/n and survives each
    later entrant m with probability (m-1)/m, telescoping to 1/N.
    """
    if n_parties < 2:
        raise ParameterError(f"need at least 2 parties, got {n_parties}")
    probs = []
    for n in range(1, n_parties + 1):
        win = Fraction(1, max(n, 2))
        for m in range(max(n, 2) + 1, n_parties + 1):
            win *= Fraction(m - 1, m)
        probs.append(win)
    return tuple(probs)


def _party_stages(n: int, n_parties: int) -> range:
    """Entrant indices of the stages party n plays (its entry onward)."""
    return range(max(n, 2), n_parties + 1)


def worst_case_losing_prob(
    n: int, n_parties: int, biases: Sequence[float]
) -> float:
    """Party n's overall losing probability given per-stage biases.

    ``biases`` holds one excess losing probability per stage party n plays,
    ordered from its entry stage onward. The recursion is exact (rational
    arithmetic), so all-zero biases give exactly (N-1)/N.
    """
    return float(_losing_recursion(n, n_parties, biases))


def _losing_recursion(n: int, n_parties: int, biases: Sequence[float]) -> Fraction:
    if n_parties < 2:
        raise ParameterError(f"need at least 2 parties, got {n_parties}")
    if not 1 <= n <= n_parties:
        raise ParameterError(f"party index {n} outside 1..{n_parties}")
    stages = _party_stages(n, n_parties)
    if len(biases) != len(stages):
        raise ParameterError(
            f"party {n} of {n_parties} plays {len(stages)} stages, got {len(biases)} biases"
        )
    losing = Fraction(0)
    surviving = Fraction(1)
    for m, bias in zip(stages, biases):
        if bias < 0:
            raise ParameterError(f"stage biases must be nonnegative, got {bias}")
        honest_loss = Fraction(n - 1, n) if m == n else Fraction(1, m)
        stage_loss = honest_loss + Fraction(bias)
        if not 0 <= stage_loss <= 1:
            raise ParameterError(
                f"stage losing probability {float(stage_loss)} outside [0, 1] "
                f"(entrant {m}, bias {bias})"
            )
        losing += surviving * stage_loss
        surviving *= 1 - stage_loss
    return losing


class BoundCheck(NamedTuple):
    epsilon: float
    bound: float
    holds: bool


def bias_bound_check(n: int, n_parties: int, biases: Sequence[float]) -> BoundCheck:
    """Compare party n's total bias against N times the largest stage bias."""
    losing = _losing_recursion(n, n_parties, biases)
    epsilon = losing - Fraction(n_parties - 1, n_parties)
    bound = n_parties * max(Fraction(b) for b in biases)
    return BoundCheck(float(epsilon), float(bound), epsilon <= bound)


# -- the six-round three-sided protocol ----------------------------------------


class StageTwoValues(NamedTuple):
    """Worst-case stage-two losing probabilities at a given eta."""

    claire_loses: float      # the entrant (honest winning chance 1/3)
    incumbent_loses: float   # the stage-one winner (honest winning chance 2/3)


def three_sided_case1(eta: float) -> StageTwoValues:
    """Stage two with the incumbent preparing (p = 1/3, entrant responds)."""
    if not 0.0 <= eta <= 2.0 / 3.0:
        raise ParameterError(f"case 1 requires 0 <= eta <= 2/3, got {eta}")
    params = ProtocolParams(1.0 / 3.0, eta)
    return StageTwoValues(
        claire_loses=adversary.alice_optimal_value(params).value,
        incumbent_loses=adversary.bob_optimal_value(params).value,
    )


def three_sided_case2(eta: float, square_cheat_term: bool = True) -> StageTwoValues:
    """Stage two with the entrant preparing (p = 2/3, incumbent responds).

    The incumbent's losing probability is the preparer's optimal cheat
    value, a squared amplitude sum. ``square_cheat_term=False`` substitutes
    the raw (unsquared) amplitude sum instead; that reading breaks the
    probability composition and is kept only so tests can document that the
    squared form is the consistent one.
    """
    if not 0.0 <= eta <= 1.0 / 3.0:
        raise ParameterError(f"case 2 requires 0 <= eta <= 1/3, got {eta}")
    params = ProtocolParams(2.0 / 3.0, eta)
    cheat = adversary.alice_optimal_value(params).value
    if not square_cheat_term:
        cheat = math.sqrt(cheat)
    return StageTwoValues(
        claire_loses=adversary.bob_optimal_value(params).value,
        incumbent_loses=cheat,
    )


@dataclass(frozen=True)
class DiceReport:
    """Analytic and/or Monte Carlo summary of one dice-rolling setup."""

    n_parties: int
    honest_probs: tuple[Fraction, ...]
    worst_case_losing: tuple[float, ...] | None = None
    biases: tuple[float, ...] | None = None
    bound: float | None = None
    bound_holds: bool | None = None
    trials: int | None = None
    win_counts: tuple[int, ...] | None = None
    stage_aborts: int | None = None

    def frequencies(self) -> tuple[float, ...] | None:
        if self.win_counts is None or not self.trials:
            return None
        return tuple(c / self.trials for c in self.win_counts)

    def to_dict(self) -> dict:
        freqs = self.frequencies()
        return {
            "n_parties": self.n_parties,
            "honest_probs": [float(p) for p in self.honest_probs],
            "worst_case_losing": list(self.worst_case_losing) if self.worst_case_losing else None,
            "biases": list(self.biases) if self.biases else None,
            "bound": self.bound,
            "bound_holds": self.bound_holds,
            "trials": self.trials,
            "win_counts": list(self.win_counts) if self.win_counts else None,
            "win_frequencies": list(freqs) if freqs else None,
            "stage_aborts": self.stage_aborts,
        }


@dataclass(frozen=True)
class ThreeSidedOptimum:
    case: int
    solution: FairnessSolution
    report: DiceReport

    @property
    def eta_star(self) -> float:
        return self.solution.eta_star

    @property
    def worst_case(self) -> float:
        return self.solution.achieved_values[0]

    @property
    def bias(self) -> float:
        return self.worst_case - 2.0 / 3.0


def _stage_two_values(case: int, eta: float, square_cheat_term: bool) -> StageTwoValues:
    if case == 1:
        return three_sided_case1(eta)
    if case == 2:
        return three_sided_case2(eta, square_cheat_term=square_cheat_term)
    raise ParameterError(f"case must be 1 or 2, got {case}")


def optimize_three_sided(
    case: int,
    bracket: tuple[float, float] | None = None,
    square_cheat_term: bool = True,
    tol: float = 1e-12,
) -> ThreeSidedOptimum:
    """Equalize all three parties' worst-case losing probabilities.

    The entrant's worst case must match the stage-one survivors' composed
    worst case 1/sqrt(2) + (1 - 1/sqrt(2)) * (incumbent stage-two loss);
    bisection on that residual gives eta*, the common value and the bias.
    """
    if bracket is None:
        bracket = THREE_SIDED_CASE1_BRACKET if case == 1 else THREE_SIDED_CASE2_BRACKET

    def composed_incumbent_side(eta: float) -> float:
        values = _stage_two_values(case, eta, square_cheat_term)
        return SQRT_HALF + (1.0 - SQRT_HALF) * values.incumbent_loses

    def residual(eta: float) -> float:
        return _stage_two_values(case, eta, square_cheat_term).claire_loses - composed_incumbent_side(eta)

    eta_star = find_root(residual, bracket, tol)
    values = _stage_two_values(case, eta_star, square_cheat_term)
    claire = values.claire_loses
    composed = composed_incumbent_side(eta_star)
    solution = FairnessSolution(
        eta_star=eta_star,
        achieved_values=(claire, composed),
        residual=abs(claire - composed),
    )
    # parties ordered (Alice, Bob, Claire); Claire is the stage-two entrant
    worst_by_party = (composed, composed, claire)
    biases = tuple(v - 2.0 / 3.0 for v in worst_by_party)
    stage_bias_max = max(
        SQRT_HALF - 0.5,  # stage one at the balanced fair point
        values.incumbent_loses - 1.0 / 3.0,
        claire - 2.0 / 3.0,
    )
    bound = 3.0 * stage_bias_max
    report = DiceReport(
        n_parties=3,
        honest_probs=honest_dice_probs(3),
        worst_case_losing=worst_by_party,
        biases=biases,
        bound=bound,
        bound_holds=max(biases) <= bound,
    )
    return ThreeSidedOptimum(case=case, solution=solution, report=report)


# -- concrete ladders and Monte Carlo ------------------------------------------


@dataclass(frozen=True)
class StageParams:
    """One ladder stage: who prepares, and the flip parameters.

    The entrant's honest winning chance must equal 1/entrant, which ties
    p to the preparer role: entrant preparing means 1-p = 1/entrant,
    incumbent preparing means p = 1/entrant.
    """

    entrant: int
    params: ProtocolParams
    preparer: str = INCUMBENT

    def __post_init__(self) -> None:
        if self.entrant < 2:
            raise ParameterError(f"entrant index must be >= 2, got {self.entrant}")
        if self.preparer not in (INCUMBENT, ENTRANT):
            raise ParameterError(f"preparer must be incumbent or entrant, got {self.preparer!r}")
        expected = 1.0 / self.entrant
        actual = 1.0 - self.params.p if self.preparer == ENTRANT else self.params.p
        if abs(actual - expected) > 1e-9:
            raise ParameterError(
                f"entrant {self.entrant} must win with probability {expected}, "
                f"stage params give {actual}"
            )


@dataclass(frozen=True)
class LadderSpec:
    n_parties: int
    stages: tuple[StageParams, ...]

    def __post_init__(self) -> None:
        if self.n_parties < 2:
            raise ParameterError(f"need at least 2 parties, got {self.n_parties}")
        expected = tuple(range(2, self.n_parties + 1))
        if tuple(s.entrant for s in self.stages) != expected:
            raise ParameterError(f"stages must cover entrants {expected} in order")

    @classmethod
    def uniform(cls, n_parties: int, eta: float = 0.0) -> "LadderSpec":
        """Leader-prepares ladder with a common eta at every stage."""
        stages = tuple(
            StageParams(m, ProtocolParams(1.0 / m, eta), INCUMBENT)
            for m in range(2, n_parties + 1)
        )
        return cls(n_parties, stages)

    @classmethod
    def three_sided(
        cls,
        case: int = 1,
        stage1_eta: float | None = None,
        stage2_eta: float | None = None,
    ) -> "LadderSpec":
        """The six-round three-sided ladder, fair by default.

        Defaults: stage one at the balanced fair eta, stage two at the
        requested case's optimized eta.
        """
        if stage1_eta is None:
            stage1_eta = solve_balanced().eta_star
        if stage2_eta is None:
            stage2_eta = optimize_three_sided(case).eta_star
        if case == 1:
            stage2 = StageParams(3, ProtocolParams(1.0 / 3.0, stage2_eta), INCUMBENT)
        elif case == 2:
            stage2 = StageParams(3, ProtocolParams(2.0 / 3.0, stage2_eta), ENTRANT)
        else:
            raise ParameterError(f"case must be 1 or 2, got {case}")
        stage1 = StageParams(2, ProtocolParams(0.5, stage1_eta), INCUMBENT)
        return cls(3, (stage1, stage2))


@dataclass(frozen=True)
class Coalition:
    """All parties but one collude against ``honest_party``.

    Per-stage strategies default to the modeled optima (claim-win against a
    preparing honest party, the optimal tilt against a responding honest
    party) and can be overridden per entrant index.
    """

    honest_party: int
    stage_overrides: Mapping[int, CheatSpec] = field(default_factory=dict)


def _stage_roles(stage: StageParams, incumbent: int) -> tuple[int, int]:
    """(preparer party, responder party) for a stage."""
    if stage.preparer == INCUMBENT:
        return incumbent, stage.entrant
    return stage.entrant, incumbent


def _coalition_strategy(stage: StageParams, coalition: Coalition, honest_prepares: bool) -> CheatSpec:
    override = coalition.stage_overrides.get(stage.entrant)
    if override is not None:
        preparer_side = isinstance(override, AliceDelta) or override.name == "alice-general"
        if honest_prepares and preparer_side:
            raise ParameterError(
                f"stage {stage.entrant}: the honest party prepares, so the coalition "
                f"cannot play a preparer-side strategy ({override.name})"
            )
        if not honest_prepares and isinstance(override, BobClaimWin):
            raise ParameterError(
                f"stage {stage.entrant}: the honest party responds, so the coalition "
                f"cannot play a responder-side strategy ({override.name})"
            )
        return override
    if honest_prepares:
        return BobClaimWin()
    delta_star = adversary.alice_optimal_value(stage.params).optimizer
    return AliceDelta(delta_star)


def _stage_cheat(stage: StageParams, preparer: int, responder: int, coalition: Coalition | None) -> CheatSpec:
    if coalition is None or coalition.honest_party not in (preparer, responder):
        return Honest()
    return _coalition_strategy(stage, coalition, honest_prepares=coalition.honest_party == preparer)


def expected_coalition_losing(spec: LadderSpec, coalition: Coalition) -> float:
    """Analytic losing probability of the honest party under the coalition's
    stage strategies (forward composition of per-stage losing chances)."""
    honest = coalition.honest_party
    losing, surviving = 0.0, 1.0
    for stage in spec.stages:
        m = stage.entrant
        if m < max(honest, 2):
            continue  # honest party has not entered the ladder yet
        honest_is_entrant = m == honest
        honest_prepares = (stage.preparer == ENTRANT) == honest_is_entrant
        cheat = _coalition_strategy(stage, coalition, honest_prepares)
        if isinstance(cheat, BobClaimWin):
            stage_loss = stage.params.p + stage.params.eta
        elif isinstance(cheat, AliceDelta):
            stage_loss = adversary.alice_value_at_delta(stage.params, cheat.delta)
        elif isinstance(cheat, Honest):
            stage_loss = (m - 1) / m if honest_is_entrant else 1.0 / m
        else:
            raise ParameterError(f"no analytic stage value for strategy {cheat.name!r}")
        losing += surviving * stage_loss
        surviving *= 1.0 - stage_loss
    return losing


def simulate_dice(
    spec: LadderSpec,
    trials: int,
    seed: int,
    coalition: Coalition | None = None,
) -> DiceReport:
    """Monte Carlo over the whole ladder, one flip per stage per trial.

    Each trial owns a counter-derived random substream. A stage abort is a
    loss for the caught (cheating) side, so the other party advances.
    """
    if trials < 1:
        raise ParameterError(f"trial count must be >= 1, got {trials}")
    if coalition is not None and not 1 <= coalition.honest_party <= spec.n_parties:
        raise ParameterError(f"honest party {coalition.honest_party} outside 1..{spec.n_parties}")
    wins = [0] * spec.n_parties
    stage_aborts = 0
    for index in range(trials):
        rng = trial_rng(seed, index)
        incumbent = 1
        for stage in spec.stages:
            preparer, responder = _stage_roles(stage, incumbent)
            cheat = _stage_cheat(stage, preparer, responder, coalition)
            outcome = run_protocol(stage.params, cheat, rng)
            if outcome.winner is Winner.ALICE:
                incumbent = preparer
            elif outcome.winner is Winner.BOB:
                incumbent = responder
            else:
                # An abort is a stage loss for the cheating side; in an
                # all-honest stage fall back to whoever the failed check
                # was auditing.
                stage_aborts += 1
                if isinstance(cheat, BobClaimWin):
                    incumbent = preparer
                elif not isinstance(cheat, Honest):
                    incumbent = responder
                else:
                    incumbent = responder if audited_party(outcome) == "alice" else preparer
        wins[incumbent - 1] += 1
    return DiceReport(
        n_parties=spec.n_parties,
        honest_probs=honest_dice_probs(spec.n_parties),
        trials=trials,
        win_counts=tuple(wins),
        stage_aborts=stage_aborts,
    )
