"""Dense state-vector engine for the protocol's tiny quantum register.

States live on 1 to 3 labelled qubits plus an optional ancilla slot of
dimension D (D = 1 means no ancilla). Amplitudes are stored as a complex
array of shape (2, ..., 2, D); qubit axes come first and are addressed with
1-based labels matching the register subscripts, the ancilla is always the
trailing axis. Spin convention: index 0 = up, 1 = down.

All operations are pure: they validate their inputs, return fresh
``StateVector`` instances and never mutate anything, so they are safe to
evaluate concurrently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping, Union

import numpy as np

from .errors import DegenerateParameterError, ParameterError, ShapeError

#: absolute tolerance for normalization / unitarity checks
NORM_TOL = 1e-9
#: branches below this probability carry no post-state (avoids 0/0)
ZERO_BRANCH_TOL = 1e-12

MAX_QUBITS = 3
MAX_ANCILLA_DIM = 64


class Spin(IntEnum):
    UP = 0
    DOWN = 1


_SPIN_FROM_CHAR = {"u": Spin.UP, "d": Spin.DOWN}
_CHAR_FROM_SPIN = {Spin.UP: "u", Spin.DOWN: "d"}


@dataclass(frozen=True)
class BasisLabel:
    """One basis ket: a spin per labelled qubit plus an ancilla index."""

    bits: tuple[Spin, ...]
    ancilla: int = 0

    @classmethod
    def parse(cls, text: str, ancilla: int = 0) -> "BasisLabel":
        """Build a label from a string of 'u'/'d' characters, e.g. ``"udd"``."""
        try:
            bits = tuple(_SPIN_FROM_CHAR[ch] for ch in text)
        except KeyError:
            raise ParameterError(f"basis label may only contain 'u'/'d': {text!r}")
        return cls(bits, ancilla)

    def __str__(self) -> str:
        word = "".join(_CHAR_FROM_SPIN[b] for b in self.bits)
        return word if self.ancilla == 0 else f"{word}:{self.ancilla}"


LabelLike = Union[BasisLabel, str]
#: projective-test target: spin pattern on a qubit subset, keyed by 1-based label
Pattern = Mapping[int, Spin]


def _as_label(label: LabelLike) -> BasisLabel:
    return BasisLabel.parse(label) if isinstance(label, str) else label


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of the register.

    ``amps[q1, ..., qn, a]`` is the amplitude of the basis ket with spins
    ``q1..qn`` and ancilla index ``a``. The array is made read-only; every
    operation returns a new instance.
    """

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amps, dtype=complex)
        if amps.ndim < 2 or amps.ndim - 1 > MAX_QUBITS:
            raise ShapeError(
                f"expected 1..{MAX_QUBITS} qubit axes plus an ancilla axis, "
                f"got array of shape {amps.shape}"
            )
        if any(n != 2 for n in amps.shape[:-1]):
            raise ShapeError(f"qubit axes must have length 2, got shape {amps.shape}")
        if not 1 <= amps.shape[-1] <= MAX_ANCILLA_DIM:
            raise ShapeError(f"ancilla dimension must be in 1..{MAX_ANCILLA_DIM}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ParameterError(f"state is not normalized: |psi| = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[LabelLike, complex],
        ancilla_dim: int = 1,
    ) -> "StateVector":
        """Build a state from a sparse ``{label: amplitude}`` mapping."""
        labels = [_as_label(key) for key in terms]
        if not labels:
            raise ParameterError("at least one term is required")
        n_qubits = len(labels[0].bits)
        amps = np.zeros((2,) * n_qubits + (ancilla_dim,), dtype=complex)
        for label, amplitude in zip(labels, terms.values()):
            if len(label.bits) != n_qubits:
                raise ShapeError(f"label {label} does not have {n_qubits} qubits")
            if not 0 <= label.ancilla < ancilla_dim:
                raise ShapeError(f"ancilla index {label.ancilla} >= dim {ancilla_dim}")
            amps[tuple(int(b) for b in label.bits) + (label.ancilla,)] = amplitude
        return cls(amps)

    @classmethod
    def basis(cls, label: LabelLike, ancilla_dim: int = 1) -> "StateVector":
        return cls.from_terms({label: 1.0}, ancilla_dim=ancilla_dim)

    # -- inspection ---------------------------------------------------------

    @property
    def n_qubits(self) -> int:
        return self.amps.ndim - 1

    @property
    def ancilla_dim(self) -> int:
        return self.amps.shape[-1]

    @property
    def shape(self) -> tuple[int, int]:
        """Register shape as (qubit count, ancilla dimension)."""
        return (self.n_qubits, self.ancilla_dim)

    def amplitude(self, label: LabelLike) -> complex:
        label = _as_label(label)
        if len(label.bits) != self.n_qubits:
            raise ShapeError(f"label {label} does not match {self.n_qubits} qubits")
        if not 0 <= label.ancilla < self.ancilla_dim:
            raise ShapeError(f"ancilla index {label.ancilla} out of range")
        return complex(self.amps[tuple(int(b) for b in label.bits) + (label.ancilla,)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def ket(label: LabelLike, ancilla_dim: int = 1) -> StateVector:
    """Shorthand for a basis ket, ``ket("ud")`` etc."""
    return StateVector.basis(label, ancilla_dim=ancilla_dim)


@dataclass(frozen=True)
class TestOutcome:
    """One branch of a projective test.

    ``post_state`` is the renormalized projection; it is absent when the
    branch probability is below ``ZERO_BRANCH_TOL``.
    """

    probability: float
    post_state: StateVector | None


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _branch(raw: np.ndarray, probability: float) -> TestOutcome:
    probability = _clamp01(probability)
    if probability < ZERO_BRANCH_TOL:
        return TestOutcome(probability, None)
    return TestOutcome(probability, StateVector(raw / math.sqrt(probability)))


# -- operations --------------------------------------------------------------


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>; |overlap|^2 is the transition probability."""
    if a.amps.shape != b.amps.shape:
        raise ShapeError(f"register shapes differ: {a.shape} vs {b.shape}")
    return complex(np.vdot(a.amps, b.amps))


def attach_down_ancilla_qubit(state: StateVector) -> StateVector:
    """Tensor a fresh qubit prepared spin-down onto a two-qubit state.

    The new qubit becomes label 3; the ancilla axis (if any) stays last.
    """
    if state.n_qubits != 2:
        raise ShapeError(f"expected a 2-qubit register, got {state.n_qubits} qubits")
    amps = np.zeros((2, 2, 2, state.ancilla_dim), dtype=complex)
    amps[:, :, int(Spin.DOWN), :] = state.amps
    return StateVector(amps)


def apply_u_eta(state: StateVector, p: float, eta: float) -> StateVector:
    """Apply the protocol rotation on the span of |u2 d3> and |d2 u3>.

    The 2x2 block is [[c, s], [s, -c]] with c = sqrt(p/(p+eta)) and
    s = sqrt(eta/(p+eta)); all other basis states, qubit 1 and the ancilla
    index are untouched. The block is a real symmetric involution, so the
    map is unitary and self-inverse.
    """
    if state.n_qubits != 3:
        raise ShapeError("the rotation acts on qubits 2 and 3 of a 3-qubit register")
    if not (0.0 <= p <= 1.0) or not (0.0 <= eta <= 1.0 - p + 1e-12):
        raise ParameterError(f"require 0 <= p <= 1 and 0 <= eta <= 1-p, got p={p}, eta={eta}")
    if p + eta <= 0.0:
        raise DegenerateParameterError("p + eta must be positive")
    c = math.sqrt(p / (p + eta))
    s = math.sqrt(eta / (p + eta))
    amps = np.array(state.amps)
    ud = amps[:, int(Spin.UP), int(Spin.DOWN), :].copy()
    du = amps[:, int(Spin.DOWN), int(Spin.UP), :].copy()
    amps[:, int(Spin.UP), int(Spin.DOWN), :] = c * ud + s * du
    amps[:, int(Spin.DOWN), int(Spin.UP), :] = s * ud - c * du
    return StateVector(amps)


def _pattern_index(state: StateVector, pattern: Pattern) -> tuple:
    if not pattern:
        raise ShapeError("pattern must constrain at least one qubit")
    index: list = [slice(None)] * state.amps.ndim
    for qubit, spin in pattern.items():
        if not 1 <= qubit <= state.n_qubits:
            raise ShapeError(f"qubit label {qubit} outside register of {state.n_qubits}")
        index[qubit - 1] = int(spin)
    return tuple(index)


def _test_pattern(state: StateVector, pattern: Pattern) -> tuple[TestOutcome, TestOutcome]:
    index = _pattern_index(state, pattern)
    matched = state.amps[index]
    p_pass = float(np.sum(np.abs(matched) ** 2))
    p_fail = float(np.sum(np.abs(state.amps) ** 2)) - p_pass

    passed = np.zeros_like(state.amps)
    passed[index] = matched
    failed = np.array(state.amps)
    failed[index] = 0.0
    return _branch(passed, p_pass), _branch(failed, p_fail)


def _test_pure_state(state: StateVector, target: StateVector) -> tuple[TestOutcome, TestOutcome]:
    if target.n_qubits != state.n_qubits:
        raise ShapeError(f"target has {target.n_qubits} qubits, state has {state.n_qubits}")
    if target.ancilla_dim == state.ancilla_dim:
        coeff = np.vdot(target.amps, state.amps)
        projected = coeff * target.amps
    elif target.ancilla_dim == 1:
        # Project onto |target> on the qubits, identity on the ancilla index.
        qubit_axes = tuple(range(state.n_qubits))
        coeff = np.tensordot(np.conj(target.amps[..., 0]), state.amps, axes=(qubit_axes, qubit_axes))
        projected = np.multiply.outer(target.amps[..., 0], coeff)
    else:
        raise ShapeError(
            f"target ancilla dimension {target.ancilla_dim} matches neither 1 "
            f"nor the state's {state.ancilla_dim}"
        )
    p_pass = float(np.sum(np.abs(projected) ** 2))
    failed = state.amps - projected
    p_fail = float(np.sum(np.abs(failed) ** 2))
    return _branch(projected, p_pass), _branch(failed, p_fail)


def projective_test(
    state: StateVector, target: Union[Pattern, StateVector]
) -> tuple[TestOutcome, TestOutcome]:
    """Binary projective measurement against a pattern or a pure state.

    Returns the (pass, fail) branches; their probabilities sum to 1 and each
    present post-state is renormalized. A pattern target tests a spin
    assignment on a subset of qubits; a pure-state target tests against that
    state (when the target carries no ancilla but the tested state does, the
    test acts as identity on the ancilla index).
    """
    if isinstance(target, StateVector):
        return _test_pure_state(state, target)
    if isinstance(target, Mapping):
        return _test_pattern(state, target)
    raise ShapeError(f"unsupported test target: {type(target).__name__}")
