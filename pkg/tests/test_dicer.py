"""Ladder composition, the three-sided optimizations and dice Monte Carlo."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from conftest import (
    CASE1_BIAS,
    CASE1_ETA_STAR,
    CASE1_WORST_CASE,
    CASE2_BIAS,
    CASE2_BIAS_UNSQUARED,
    ETA_FAIR,
    SQRT_HALF,
    three_sigma,
)
from qdice import (
    AliceDelta,
    Coalition,
    LadderSpec,
    ParameterError,
    ProtocolParams,
    StageParams,
    bias_bound_check,
    honest_dice_probs,
    optimize_three_sided,
    simulate_dice,
    three_sided_case1,
    three_sided_case2,
    worst_case_losing_prob,
)
from qdice.adversary import alice_optimal_value
from qdice.dicer import ENTRANT, INCUMBENT, expected_coalition_losing


# -- honest play -----------------------------------------------------------------


def test_honest_probs_are_uniform():
    assert honest_dice_probs(2) == (Fraction(1, 2), Fraction(1, 2))
    assert honest_dice_probs(3) == (Fraction(1, 3),) * 3
    for n in range(2, 17):
        probs = honest_dice_probs(n)
        assert sum(probs) == 1
        assert all(p == Fraction(1, n) for p in probs)


def test_honest_probs_telescoping_entry():
    # party 4 of 5: enters with 1/4 and survives the last entrant with 4/5
    assert honest_dice_probs(5)[3] == Fraction(1, 4) * Fraction(4, 5) == Fraction(1, 5)


def test_honest_probs_rejects_small_n():
    with pytest.raises(ParameterError):
        honest_dice_probs(1)


# -- worst-case composition --------------------------------------------------------


def test_zero_bias_composition_is_exact():
    for n_parties in range(2, 17):
        for party in range(1, n_parties + 1):
            stages = n_parties - max(party, 2) + 1
            losing = worst_case_losing_prob(party, n_parties, [0.0] * stages)
            assert losing == (n_parties - 1) / n_parties


def test_single_stage_composition_matches_fair_coin():
    assert worst_case_losing_prob(1, 2, [ETA_FAIR]) == pytest.approx(SQRT_HALF, abs=1e-9)


def test_case1_composition_reproduces_worst_case():
    losing = worst_case_losing_prob(1, 3, [ETA_FAIR, CASE1_ETA_STAR])
    assert losing == pytest.approx(CASE1_WORST_CASE, abs=1e-9)


def test_composition_validates_inputs():
    with pytest.raises(ParameterError):
        worst_case_losing_prob(1, 3, [0.0])  # wrong stage count
    with pytest.raises(ParameterError):
        worst_case_losing_prob(2, 3, [0.6, 0.0])  # 1/2 + 0.6 > 1
    with pytest.raises(ParameterError):
        worst_case_losing_prob(2, 3, [-0.1, 0.0])  # biases are nonnegative
    with pytest.raises(ParameterError):
        worst_case_losing_prob(4, 3, [0.0])


def test_composition_is_monotone_in_each_bias():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n_parties = int(rng.integers(2, 9))
        party = int(rng.integers(1, n_parties + 1))
        stages = n_parties - max(party, 2) + 1
        biases = rng.uniform(0.0, 0.05, size=stages)
        base = worst_case_losing_prob(party, n_parties, biases)
        for k in range(stages):
            bumped = biases.copy()
            bumped[k] += 0.01
            assert worst_case_losing_prob(party, n_parties, bumped) >= base


def test_bias_bound_examples():
    check = bias_bound_check(1, 2, [0.0])
    assert check == (0.0, 0.0, True)
    check = bias_bound_check(1, 2, [ETA_FAIR])
    assert check.epsilon == pytest.approx(ETA_FAIR, abs=1e-9)
    assert check.bound == pytest.approx(2 * ETA_FAIR, abs=1e-12)
    assert check.holds


def test_bias_bound_holds_on_random_instances():
    rng = np.random.default_rng(33)
    for _ in range(1_000):
        n_parties = int(rng.integers(2, 17))
        party = int(rng.integers(1, n_parties + 1))
        stages = n_parties - max(party, 2) + 1
        biases = rng.uniform(0.0, 1.0 / n_parties, size=stages)
        assert bias_bound_check(party, n_parties, biases).holds


# -- three-sided stage values -------------------------------------------------------


def test_case1_at_eta_zero():
    values = three_sided_case1(0.0)
    assert values.claire_loses == pytest.approx(1.0, abs=1e-12)
    assert values.incumbent_loses == pytest.approx(1 / 3, abs=1e-12)


def test_case2_at_eta_zero():
    values = three_sided_case2(0.0)
    assert values.claire_loses == pytest.approx(2 / 3, abs=1e-12)


def test_stage_values_match_printed_forms():
    # the stage-two expressions written with explicit 3-eta coefficients
    # must coincide with the generic cheat values under substitution
    rng = np.random.default_rng(55)
    for eta in rng.uniform(0.0, 2 / 3, size=100):
        expected = (2 - 3 * eta) / 2 + 9 * eta**2 / (2 * (1 + 3 * eta))
        assert three_sided_case1(eta).claire_loses == pytest.approx(expected, abs=1e-9)
    for eta in rng.uniform(0.0, 1 / 3, size=100):
        expected = (1 - 3 * eta) + 9 * eta**2 / (2 + 3 * eta)
        assert three_sided_case2(eta).incumbent_loses == pytest.approx(expected, abs=1e-9)


def test_stage_values_match_generic_cheat_values():
    rng = np.random.default_rng(56)
    for eta in rng.uniform(0.0, 2 / 3, size=100):
        assert three_sided_case1(eta).claire_loses == pytest.approx(
            alice_optimal_value(ProtocolParams(1 / 3, eta)).value, abs=1e-12
        )
    for eta in rng.uniform(0.0, 1 / 3, size=100):
        assert three_sided_case2(eta).incumbent_loses == pytest.approx(
            alice_optimal_value(ProtocolParams(2 / 3, eta)).value, abs=1e-12
        )


def test_stage_values_domain_errors():
    with pytest.raises(ParameterError):
        three_sided_case1(0.7)
    with pytest.raises(ParameterError):
        three_sided_case2(0.4)


# -- the optimizations ----------------------------------------------------------------


def test_optimize_case1():
    optimum = optimize_three_sided(1)
    assert optimum.eta_star == pytest.approx(CASE1_ETA_STAR, abs=1e-9)
    assert optimum.worst_case == pytest.approx(CASE1_WORST_CASE, abs=1e-9)
    assert optimum.bias == pytest.approx(CASE1_BIAS, abs=1e-9)
    assert optimum.solution.residual < 1e-10
    assert optimum.report.bound_holds


def test_optimize_case2():
    optimum = optimize_three_sided(2)
    assert optimum.bias == pytest.approx(CASE2_BIAS, abs=1e-9)
    assert optimum.worst_case == pytest.approx(2 / 3 + CASE2_BIAS, abs=1e-9)


def test_optimize_case2_unsquared_reading_differs():
    optimum = optimize_three_sided(2, square_cheat_term=False)
    assert optimum.bias == pytest.approx(CASE2_BIAS_UNSQUARED, abs=1e-9)
    assert abs(optimum.bias - 0.199) > 0.01


def test_case1_beats_case2():
    assert optimize_three_sided(1).bias < optimize_three_sided(2).bias


def test_optimize_rejects_unknown_case():
    with pytest.raises(ParameterError):
        optimize_three_sided(3)


# -- ladders and Monte Carlo -----------------------------------------------------------


def test_stage_params_validation():
    with pytest.raises(ParameterError):
        StageParams(3, ProtocolParams(0.5, 0.1), INCUMBENT)  # entrant must win 1/3
    StageParams(3, ProtocolParams(1 / 3, 0.1), INCUMBENT)
    StageParams(3, ProtocolParams(2 / 3, 0.1), ENTRANT)


def test_ladder_spec_validation():
    with pytest.raises(ParameterError):
        LadderSpec(3, (StageParams(2, ProtocolParams(0.5, 0.0)),))


def test_three_sided_ladder_defaults():
    spec = LadderSpec.three_sided(case=1)
    assert spec.stages[0].params.eta == pytest.approx(ETA_FAIR, abs=1e-9)
    assert spec.stages[1].params.p == pytest.approx(1 / 3)
    assert spec.stages[1].preparer == INCUMBENT
    spec2 = LadderSpec.three_sided(case=2)
    assert spec2.stages[1].params.p == pytest.approx(2 / 3)
    assert spec2.stages[1].preparer == ENTRANT


def test_honest_dice_monte_carlo():
    trials = 30_000
    report = simulate_dice(LadderSpec.uniform(3, eta=0.1), trials, seed=14)
    assert report.stage_aborts == 0
    for frequency in report.frequencies():
        assert abs(frequency - 1 / 3) <= three_sigma(1 / 3, trials)


def test_two_party_ladder_with_claim_win_coalition():
    trials = 30_000
    spec = LadderSpec(2, (StageParams(2, ProtocolParams(0.5, ETA_FAIR), INCUMBENT),))
    report = simulate_dice(spec, trials, seed=8, coalition=Coalition(honest_party=1))
    losing = 1.0 - report.frequencies()[0]
    assert abs(losing - SQRT_HALF) <= three_sigma(SQRT_HALF, trials)


@pytest.mark.parametrize("honest_party", [1, 3])
def test_case1_coalition_losing_frequencies(honest_party):
    # against honest Alice the coalition claim-wins both stages; against
    # honest Claire it plays the optimal tilt; fairness makes both 0.848
    trials = 30_000
    spec = LadderSpec.three_sided(case=1)
    coalition = Coalition(honest_party=honest_party)
    expected = expected_coalition_losing(spec, coalition)
    assert expected == pytest.approx(CASE1_WORST_CASE, abs=1e-9)
    report = simulate_dice(spec, trials, seed=26, coalition=coalition)
    losing = 1.0 - report.frequencies()[honest_party - 1]
    assert abs(losing - expected) <= three_sigma(expected, trials)


def test_coalition_override_side_validation():
    spec = LadderSpec.three_sided(case=1)
    bad = Coalition(honest_party=1, stage_overrides={2: AliceDelta(0.3)})
    with pytest.raises(ParameterError):
        simulate_dice(spec, 10, seed=0, coalition=bad)


def test_simulate_dice_determinism():
    spec = LadderSpec.three_sided(case=1)
    first = simulate_dice(spec, 2_000, seed=3, coalition=Coalition(honest_party=1))
    second = simulate_dice(spec, 2_000, seed=3, coalition=Coalition(honest_party=1))
    assert first == second
