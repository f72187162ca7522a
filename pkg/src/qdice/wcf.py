"""Three-round weak imbalanced coin flip between Alice and Bob.

Honest play: Alice prepares sqrt(1-p-eta)|ud> + sqrt(p+eta)|du> and sends
qubit 2 to Bob; Bob adjoins a third qubit spin-down, applies the two-level
rotation and measures qubits 2,3 against the up/down pattern. A hit means
Bob wins, which Alice audits by checking her qubit is spin-down; a miss
means Alice wins, which Bob audits by testing all three qubits against the
verification state. Alice wins with probability 1-p, Bob with p, and honest
runs never fail an audit.

Cheating strategies are declared through :class:`CheatSpec` variants; a
failed audit ends the run with winner ``Winner.ABORT``, which bias
accounting treats as a loss for the cheating side.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ParameterError, ShapeError
from .qsim import (
    Spin,
    StateVector,
    apply_u_eta,
    attach_down_ancilla_qubit,
    overlap,
    projective_test,
)

BOB_WIN_PATTERN = {2: Spin.UP, 3: Spin.DOWN}


@dataclass(frozen=True)
class ProtocolParams:
    """One protocol instance: Bob's honest winning probability p and the
    security knob eta, constrained to 0 <= eta <= 1-p."""

    p: float
    eta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.eta <= 1.0 - self.p + 1e-12:
            raise ParameterError(f"eta must lie in [0, 1-p], got eta={self.eta}, p={self.p}")


def honest_win_prob(params: ProtocolParams) -> float:
    """Alice's winning probability when both parties are honest."""
    return 1.0 - params.p


# -- cheating strategies ------------------------------------------------------


class CheatSpec:
    """Marker base class for strategy declarations."""

    name = "base"


@dataclass(frozen=True)
class Honest(CheatSpec):
    name = "honest"


@dataclass(frozen=True)
class AliceDelta(CheatSpec):
    """Alice prepares sqrt(1-delta)|ud> + sqrt(delta)|du> instead."""

    delta: float
    name = "alice-delta"

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta <= 1.0:
            raise ParameterError(f"delta must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class AliceGeneral(CheatSpec):
    """Alice prepares an arbitrary two-qubit state, optionally entangled
    with a private ancilla.

    ``amplitudes`` are ordered (uu, ud, du, dd) and must be normalized;
    ``ancillas`` gives one unit vector per branch (all the same dimension)
    or is None for no ancilla.
    """

    amplitudes: tuple[complex, complex, complex, complex]
    ancillas: tuple[tuple[complex, ...], ...] | None = None
    name = "alice-general"

    def __post_init__(self) -> None:
        total = sum(abs(a) ** 2 for a in self.amplitudes)
        if abs(total - 1.0) > 1e-9:
            raise ParameterError(f"cheat amplitudes are not normalized: {total!r}")
        if self.ancillas is not None:
            if len(self.ancillas) != 4:
                raise ParameterError("need one ancilla vector per branch (4 total)")
            dims = {len(phi) for phi in self.ancillas}
            if len(dims) != 1:
                raise ShapeError("ancilla vectors must share one dimension")
            for phi in self.ancillas:
                if abs(sum(abs(c) ** 2 for c in phi) - 1.0) > 1e-9:
                    raise ParameterError("each ancilla vector must be normalized")

    @property
    def ancilla_dim(self) -> int:
        return 1 if self.ancillas is None else len(self.ancillas[0])


@dataclass(frozen=True)
class BobClaimWin(CheatSpec):
    """Bob skips his measurement and always announces that he won."""

    name = "bob-claim-win"


# -- state preparation --------------------------------------------------------


def honest_initial_state(params: ProtocolParams) -> StateVector:
    return StateVector.from_terms(
        {
            "ud": math.sqrt(max(0.0, 1.0 - params.p - params.eta)),
            "du": math.sqrt(params.p + params.eta),
        }
    )


def delta_initial_state(delta: float) -> StateVector:
    return StateVector.from_terms(
        {"ud": math.sqrt(1.0 - delta), "du": math.sqrt(delta)}
    )


def general_initial_state(cheat: AliceGeneral) -> StateVector:
    dim = cheat.ancilla_dim
    amps = np.zeros((2, 2, dim), dtype=complex)
    branches = [(0, 0), (0, 1), (1, 0), (1, 1)]  # uu, ud, du, dd
    for k, (i, j) in enumerate(branches):
        phi = np.ones(1, dtype=complex) if cheat.ancillas is None else np.asarray(cheat.ancillas[k], dtype=complex)
        amps[i, j, :] = cheat.amplitudes[k] * phi
    return StateVector(amps)


def verification_state(params: ProtocolParams) -> StateVector:
    """Three-qubit state Bob tests for when he loses."""
    if params.p >= 1.0:
        raise ParameterError("the verification state is undefined at p = 1")
    weight = max(0.0, 1.0 - params.p - params.eta)  # guard float dust at eta = 1-p
    return StateVector.from_terms(
        {
            "udd": math.sqrt(weight / (1.0 - params.p)),
            "ddu": math.sqrt(params.eta / (1.0 - params.p)),
        }
    )


def alice_verification(state: StateVector) -> float:
    """Probability that qubit 1 of ``state`` is found spin-down."""
    passed, _ = projective_test(state, {1: Spin.DOWN})
    return passed.probability


# -- transcripts and outcomes -------------------------------------------------


class Winner(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    ABORT = "abort"


ABORT_FIRST_QUBIT = "first-qubit check failed"
ABORT_FINAL_STATE = "final-state check failed"

_COMM_KINDS = frozenset({"send_qubit", "announce", "verdict"})


@dataclass(frozen=True)
class Event:
    kind: str  # prepare | send_qubit | rotate | measure | announce | test | verdict | declare
    actor: str
    detail: str


@dataclass(frozen=True)
class Transcript:
    events: tuple[Event, ...]

    @property
    def comm_rounds(self) -> int:
        return sum(1 for e in self.events if e.kind in _COMM_KINDS)

    def to_dict(self) -> list[dict[str, str]]:
        return [{"kind": e.kind, "actor": e.actor, "detail": e.detail} for e in self.events]


@dataclass(frozen=True)
class Outcome:
    winner: Winner
    abort_reason: str | None
    transcript: Transcript

    def to_dict(self) -> dict:
        return {
            "winner": self.winner.value,
            "abort_reason": self.abort_reason,
            "transcript": self.transcript.to_dict(),
        }


def audited_party(outcome: Outcome) -> str | None:
    """Whose claim the failed check was auditing, if the run aborted.

    The first-qubit check audits Bob's announced win; the final-state check
    audits the state Alice handed over.
    """
    if outcome.abort_reason == ABORT_FIRST_QUBIT:
        return "bob"
    if outcome.abort_reason == ABORT_FINAL_STATE:
        return "alice"
    return None


# -- the state machine --------------------------------------------------------


def _prepare(params: ProtocolParams, cheat: CheatSpec) -> StateVector:
    if isinstance(cheat, AliceDelta):
        return delta_initial_state(cheat.delta)
    if isinstance(cheat, AliceGeneral):
        return general_initial_state(cheat)
    if isinstance(cheat, (Honest, BobClaimWin)):
        return honest_initial_state(params)
    raise ParameterError(f"unknown cheat spec: {cheat!r}")


@dataclass(frozen=True)
class _Evolution:
    """Branch probabilities of one (params, cheat) configuration."""

    bob_win_prob: float      # Bob's pattern measurement hits (1.0 when he skips it)
    first_qubit_pass: float  # audit pass probability on the win branch
    final_state_pass: float  # audit pass probability on the lose branch


@lru_cache(maxsize=256)
def _evolve(params: ProtocolParams, cheat: CheatSpec) -> _Evolution:
    """Run the deterministic quantum evolution once per configuration.

    Everything up to the sampling is a pure function of (params, cheat), so
    Monte Carlo batches only pay for the draws.
    """
    state = attach_down_ancilla_qubit(_prepare(params, cheat))
    state = apply_u_eta(state, params.p, params.eta)
    if isinstance(cheat, BobClaimWin):
        return _Evolution(1.0, alice_verification(state), 0.0)
    hit, miss = projective_test(state, BOB_WIN_PATTERN)
    first_qubit = alice_verification(hit.post_state) if hit.post_state is not None else 0.0
    if miss.post_state is None:
        final_state = 0.0
    else:
        xi = verification_state(params)
        if miss.post_state.ancilla_dim == 1:
            final_state = min(1.0, abs(overlap(xi, miss.post_state)) ** 2)
        else:
            passed, _ = projective_test(miss.post_state, xi)
            final_state = passed.probability
    return _Evolution(hit.probability, first_qubit, final_state)


def run_protocol(params: ProtocolParams, cheat: CheatSpec, rng: np.random.Generator) -> Outcome:
    """Execute one run of the protocol and sample every measurement.

    The returned outcome is ``Winner.ABORT`` exactly when a verification
    test failed, with ``abort_reason`` naming the failed check.
    """
    evolution = _evolve(params, cheat)
    events: list[Event] = [
        Event("prepare", "alice", cheat.name),
        Event("send_qubit", "alice", "qubit 2"),
        Event("rotate", "bob", f"p={params.p!r} eta={params.eta!r}"),
    ]

    if isinstance(cheat, BobClaimWin):
        bob_announces_win = True
        events.append(Event("announce", "bob", "win (measurement skipped)"))
    else:
        bob_announces_win = rng.random() < evolution.bob_win_prob
        events.append(Event("measure", "bob", "qubits 2,3 against the up/down pattern"))
        events.append(Event("announce", "bob", "win" if bob_announces_win else "lose"))

    if bob_announces_win:
        ok = rng.random() < evolution.first_qubit_pass
        events.append(Event("test", "alice", "first qubit is spin-down"))
        events.append(Event("verdict", "alice", "pass" if ok else "fail"))
        winner, reason = (Winner.BOB, None) if ok else (Winner.ABORT, ABORT_FIRST_QUBIT)
    else:
        events.append(Event("send_qubit", "alice", "qubit 1"))
        ok = rng.random() < evolution.final_state_pass
        events.append(Event("test", "bob", "all qubits against the verification state"))
        winner, reason = (Winner.ALICE, None) if ok else (Winner.ABORT, ABORT_FINAL_STATE)

    events.append(Event("declare", "both", winner.value))
    return Outcome(winner, reason, Transcript(tuple(events)))


# -- Monte Carlo --------------------------------------------------------------


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent substream for one trial, derived from (seed, index).

    Streams are counter-derived, so trial results do not depend on
    evaluation order and batches can run in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


@dataclass
class TrialStats:
    """Winner tallies for a batch of protocol runs."""

    trials: int
    counts: Counter = field(default_factory=Counter)

    def record(self, winner: Winner) -> None:
        self.counts[winner] += 1

    def frequency(self, winner: Winner) -> float:
        return self.counts[winner] / self.trials

    def standard_error(self, winner: Winner) -> float:
        f = self.frequency(winner)
        return math.sqrt(f * (1.0 - f) / self.trials)

    @property
    def aborts(self) -> int:
        return self.counts[Winner.ABORT]

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "counts": {w.value: self.counts[w] for w in Winner},
            "frequencies": {w.value: self.frequency(w) for w in Winner},
            "standard_errors": {w.value: self.standard_error(w) for w in Winner},
        }


def run_trials(
    params: ProtocolParams,
    cheat: CheatSpec,
    trials: int,
    seed: int,
) -> TrialStats:
    """Run ``trials`` independent protocol executions and tally winners."""
    if trials < 1:
        raise ParameterError(f"trial count must be >= 1, got {trials}")
    stats = TrialStats(trials=trials)
    for index in range(trials):
        outcome = run_protocol(params, cheat, trial_rng(seed, index))
        stats.record(outcome.winner)
    return stats
