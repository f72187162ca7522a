"""Quantum weak coin flipping and N-sided dice rolling toolkit."""

__version__ = "0.1.0"

from .errors import (
    BracketError,
    DegenerateParameterError,
    ParameterError,
    QdiceError,
    ShapeError,
)
from .qsim import (
    BasisLabel,
    Spin,
    StateVector,
    TestOutcome,
    apply_u_eta,
    attach_down_ancilla_qubit,
    ket,
    overlap,
    projective_test,
)
from .wcf import (
    AliceDelta,
    AliceGeneral,
    BobClaimWin,
    CheatSpec,
    Honest,
    Outcome,
    ProtocolParams,
    Transcript,
    TrialStats,
    Winner,
    alice_verification,
    honest_win_prob,
    run_protocol,
    run_trials,
)
from .adversary import (
    CheatValue,
    alice_optimal_value,
    alice_value_at_delta,
    bob_optimal_value,
    brute_force_alice,
)
from .fairness import FairnessSolution, find_root, solve_balanced
from .dicer import (
    Coalition,
    DiceReport,
    LadderSpec,
    StageParams,
    ThreeSidedOptimum,
    bias_bound_check,
    honest_dice_probs,
    optimize_three_sided,
    simulate_dice,
    three_sided_case1,
    three_sided_case2,
    worst_case_losing_prob,
)

__all__ = [
    "__version__",
    "QdiceError",
    "ShapeError",
    "ParameterError",
    "DegenerateParameterError",
    "BracketError",
    "Spin",
    "BasisLabel",
    "StateVector",
    "TestOutcome",
    "ket",
    "overlap",
    "attach_down_ancilla_qubit",
    "apply_u_eta",
    "projective_test",
    "ProtocolParams",
    "CheatSpec",
    "Honest",
    "AliceDelta",
    "AliceGeneral",
    "BobClaimWin",
    "Winner",
    "Outcome",
    "Transcript",
    "TrialStats",
    "honest_win_prob",
    "alice_verification",
    "run_protocol",
    "run_trials",
    "CheatValue",
    "alice_value_at_delta",
    "alice_optimal_value",
    "bob_optimal_value",
    "brute_force_alice",
    "FairnessSolution",
    "find_root",
    "solve_balanced",
    "honest_dice_probs",
    "worst_case_losing_prob",
    "bias_bound_check",
    "three_sided_case1",
    "three_sided_case2",
    "optimize_three_sided",
    "ThreeSidedOptimum",
    "DiceReport",
    "LadderSpec",
    "StageParams",
    "Coalition",
    "simulate_dice",
]
