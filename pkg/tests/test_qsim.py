"""State-engine unit tests and numerical invariants."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ETA_FAIR, ROTATION_C_FAIR, ROTATION_S_FAIR, random_state
from qdice import (
    ParameterError,
    ProtocolParams,
    ShapeError,
    Spin,
    StateVector,
    apply_u_eta,
    attach_down_ancilla_qubit,
    ket,
    overlap,
    projective_test,
)
from qdice.errors import DegenerateParameterError
from qdice.wcf import honest_initial_state, verification_state

SQRT_HALF = 1.0 / math.sqrt(2.0)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# -- construction -------------------------------------------------------------


def test_basis_ket_amplitudes():
    state = ket("ud")
    assert state.amplitude("ud") == 1.0
    assert state.amplitude("du") == 0.0
    assert state.shape == (2, 1)


def test_unnormalized_state_rejected():
    with pytest.raises(ParameterError):
        StateVector(np.array([[[0.5 + 0j], [0.0]], [[0.0], [0.0]]]))


def test_mismatched_label_rejected():
    with pytest.raises(ShapeError):
        ket("ud").amplitude("udd")


# -- attach_down_ancilla_qubit -------------------------------------------------


def test_attach_basis_ket():
    assert attach_down_ancilla_qubit(ket("ud")).amplitude("udd") == 1.0


def test_attach_honest_state_at_eta_zero():
    state = attach_down_ancilla_qubit(honest_initial_state(ProtocolParams(0.5, 0.0)))
    assert state.amplitude("udd") == pytest.approx(SQRT_HALF, abs=1e-12)
    assert state.amplitude("dud") == pytest.approx(SQRT_HALF, abs=1e-12)


def test_attach_requires_two_qubits():
    with pytest.raises(ShapeError):
        attach_down_ancilla_qubit(ket("udd"))


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_attach_is_an_isometry(seed):
    state = random_state(np.random.default_rng(seed), n_qubits=2)
    assert attach_down_ancilla_qubit(state).norm() == pytest.approx(1.0, abs=1e-9)


# -- apply_u_eta ---------------------------------------------------------------


def test_rotation_at_balanced_fair_point():
    rotated = apply_u_eta(ket("dud"), 0.5, ETA_FAIR)
    assert rotated.amplitude("dud") == pytest.approx(ROTATION_C_FAIR, abs=1e-9)
    assert rotated.amplitude("ddu") == pytest.approx(ROTATION_S_FAIR, abs=1e-9)


def test_rotation_at_eta_zero_is_diagonal():
    assert apply_u_eta(ket("dud"), 0.5, 0.0).amplitude("dud") == pytest.approx(1.0)
    assert apply_u_eta(ket("ddu"), 0.5, 0.0).amplitude("ddu") == pytest.approx(-1.0)


def test_rotation_rejects_degenerate_and_bad_params():
    with pytest.raises(DegenerateParameterError):
        apply_u_eta(ket("udd"), 0.0, 0.0)
    with pytest.raises(ParameterError):
        apply_u_eta(ket("udd"), 0.5, 0.7)
    with pytest.raises(ShapeError):
        apply_u_eta(ket("ud"), 0.5, 0.1)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, p=st.floats(0.01, 0.99), eta_frac=st.floats(0.0, 1.0))
def test_rotation_is_unitary_and_self_inverse(seed, p, eta_frac):
    eta = eta_frac * (1.0 - p)
    state = random_state(np.random.default_rng(seed))
    rotated = apply_u_eta(state, p, eta)
    assert rotated.norm() == pytest.approx(1.0, abs=1e-9)
    # the 2x2 block is real symmetric orthogonal, so its transpose is itself
    restored = apply_u_eta(rotated, p, eta)
    assert np.allclose(restored.amps, state.amps, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, p=st.floats(0.01, 0.99), eta_frac=st.floats(0.0, 1.0))
def test_rotation_commutes_with_spectator_operations(seed, p, eta_frac):
    eta = eta_frac * (1.0 - p)
    rng = np.random.default_rng(seed)
    state = random_state(rng, ancilla_dim=2)

    def haar_unitary(dim):
        q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        return q * (np.diagonal(r) / np.abs(np.diagonal(r)))

    u1 = haar_unitary(2)
    ua = haar_unitary(2)

    def on_qubit1(sv):
        return StateVector(np.tensordot(u1, sv.amps, axes=(1, 0)))

    def on_ancilla(sv):
        return StateVector(np.moveaxis(np.tensordot(ua, sv.amps, axes=(1, 3)), 0, 3))

    for spectator in (on_qubit1, on_ancilla):
        left = apply_u_eta(spectator(state), p, eta)
        right = spectator(apply_u_eta(state, p, eta))
        assert np.allclose(left.amps, right.amps, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, p=st.floats(0.01, 0.99), eta_frac=st.floats(0.0, 1.0))
def test_rotation_is_linear(seed, p, eta_frac):
    eta = eta_frac * (1.0 - p)
    rng = np.random.default_rng(seed)
    a = random_state(rng)
    raw = random_state(rng).amps
    raw = raw - np.vdot(a.amps, raw) * a.amps  # orthogonalize so combos stay normalized
    b = StateVector(raw / np.linalg.norm(raw))
    theta, phi = rng.uniform(0, 2 * np.pi, size=2)
    alpha, beta = math.cos(theta), math.sin(theta) * np.exp(1j * phi)
    combo = StateVector(alpha * a.amps + beta * b.amps)
    left = apply_u_eta(combo, p, eta).amps
    right = alpha * apply_u_eta(a, p, eta).amps + beta * apply_u_eta(b, p, eta).amps
    assert np.allclose(left, right, atol=1e-9)


# -- projective_test -----------------------------------------------------------


def test_honest_state_hit_probability_is_p():
    params = ProtocolParams(0.37, 0.21)
    state = apply_u_eta(
        attach_down_ancilla_qubit(honest_initial_state(params)), params.p, params.eta
    )
    hit, miss = projective_test(state, {2: Spin.UP, 3: Spin.DOWN})
    assert hit.probability == pytest.approx(params.p, abs=1e-12)
    assert miss.probability == pytest.approx(1.0 - params.p, abs=1e-12)


def test_honest_miss_branch_is_the_verification_state():
    params = ProtocolParams(0.37, 0.21)
    state = apply_u_eta(
        attach_down_ancilla_qubit(honest_initial_state(params)), params.p, params.eta
    )
    _, miss = projective_test(state, {2: Spin.UP, 3: Spin.DOWN})
    xi = verification_state(params)
    assert abs(overlap(xi, miss.post_state)) == pytest.approx(1.0, abs=1e-9)


def test_pure_state_target_on_itself_passes():
    target = honest_initial_state(ProtocolParams(0.3, 0.4))
    hit, miss = projective_test(target, target)
    assert hit.probability == pytest.approx(1.0, abs=1e-12)
    assert miss.post_state is None  # zero-probability branch carries no state


def test_pattern_target_shape_errors():
    with pytest.raises(ShapeError):
        projective_test(ket("ud"), {3: Spin.UP})
    with pytest.raises(ShapeError):
        projective_test(ket("ud"), {})
    with pytest.raises(ShapeError):
        projective_test(ket("udd"), ket("ud"))


@settings(max_examples=100, deadline=None)
@given(seed=seeds, qubit=st.integers(1, 3), spin=st.sampled_from([Spin.UP, Spin.DOWN]))
def test_pattern_branches_sum_to_one_and_are_normalized(seed, qubit, spin):
    state = random_state(np.random.default_rng(seed))
    hit, miss = projective_test(state, {qubit: spin})
    assert hit.probability + miss.probability == pytest.approx(1.0, abs=1e-9)
    for branch in (hit, miss):
        if branch.post_state is not None:
            assert branch.post_state.norm() == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, ancilla_dim=st.sampled_from([1, 2]))
def test_pure_state_branches_sum_to_one(seed, ancilla_dim):
    rng = np.random.default_rng(seed)
    state = random_state(rng, ancilla_dim=ancilla_dim)
    target = random_state(rng, ancilla_dim=1)
    hit, miss = projective_test(state, target)
    assert hit.probability + miss.probability == pytest.approx(1.0, abs=1e-9)
    for branch in (hit, miss):
        if branch.post_state is not None:
            assert branch.post_state.norm() == pytest.approx(1.0, abs=1e-9)


# -- overlap -------------------------------------------------------------------


def test_overlap_of_state_with_itself_is_one():
    state = honest_initial_state(ProtocolParams(0.25, 0.5))
    assert overlap(state, state) == pytest.approx(1.0, abs=1e-12)


def test_overlap_of_orthogonal_kets_is_zero():
    assert overlap(ket("ud"), ket("du")) == 0.0


def test_overlap_shape_mismatch():
    with pytest.raises(ShapeError):
        overlap(ket("ud"), ket("udd"))
