"""Statevector engine: state prep, rotations, circuits, exact evolution."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

from trotterprof import (
    Circuit,
    DegenerateInputError,
    DimensionMismatchError,
    GaussianJitter,
    HermiticityError,
    OperatorSum,
    PauliRotation,
    PauliTerm,
    StateVector,
    apply_circuit,
    apply_pauli_rotation,
    exact_evolve,
    expectation,
    init_product_state,
    invert_circuit,
    to_dense,
)
from trotterprof.simulator import circuit_unitary, exact_unitary

from conftest import random_hermitian_sum, random_state


def test_init_single_qubit():
    s = init_product_state([(1, 0)])
    np.testing.assert_allclose(s.amplitudes, [1, 0])


def test_init_normalizes():
    s = init_product_state([(1, 1)])
    np.testing.assert_allclose(s.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_init_benchmark_state_carries_global_half(paper_state):
    # Kron of (1,0), (1,i), (1,1), (0,1) has norm 2, so the normalized state
    # is exactly half the raw product.
    raw = np.kron(np.kron(np.kron([1, 0], [1, 1j]), [1, 1]), [0, 1])
    np.testing.assert_allclose(paper_state.amplitudes, raw / 2.0, atol=1e-15)
    assert np.linalg.norm(paper_state.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_init_rejects_zero_factor():
    with pytest.raises(DegenerateInputError):
        init_product_state([(1, 0), (0, 0)])


def test_rotation_pi_half_x():
    s = init_product_state([(1, 0)])
    out = apply_pauli_rotation(s, PauliRotation("X", np.pi / 2))
    np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-15)


def test_rotation_zero_angle_is_identity(rng):
    s = random_state(rng, 3)
    out = apply_pauli_rotation(s, PauliRotation("XYZ", 0.0))
    np.testing.assert_allclose(out.amplitudes, s.amplitudes)


@pytest.mark.parametrize("theta", [0.1, 0.37, 1.2])
def test_rotation_z_on_plus_matches_dense_exponential(theta):
    s = init_product_state([(1, 1)])
    out = apply_pauli_rotation(s, PauliRotation("Z", theta))
    x_obs = OperatorSum.from_terms([PauliTerm("X")])
    assert expectation(out, x_obs) == pytest.approx(np.cos(2 * theta), abs=1e-12)
    # independent oracle: dense matrix exponential
    gate = scipy.linalg.expm(-1j * theta * np.diag([1.0, -1.0]))
    np.testing.assert_allclose(out.amplitudes, gate @ s.amplitudes, atol=1e-12)


def test_rotation_rejects_identity_word():
    with pytest.raises(DegenerateInputError):
        PauliRotation("II", 0.3)


def test_empty_circuit_is_identity(rng):
    s = random_state(rng, 2)
    out = apply_circuit(s, Circuit((), 2))
    np.testing.assert_allclose(out.amplitudes, s.amplitudes)


def test_single_gate_circuit_matches_rotation(rng):
    s = random_state(rng, 2)
    g = PauliRotation("XY", 0.4)
    np.testing.assert_allclose(
        apply_circuit(s, Circuit((g,), 2)).amplitudes,
        apply_pauli_rotation(s, g).amplitudes,
    )


def test_circuit_inversion_round_trip(rng):
    for _ in range(5):
        n = 3
        gates = []
        while len(gates) < 30:
            word = "".join(rng.choice(list("IXYZ")) for _ in range(n))
            if set(word) == {"I"}:
                continue
            gates.append(PauliRotation(word, float(rng.normal())))
        c = Circuit(tuple(gates), n)
        s = random_state(rng, n)
        out = apply_circuit(apply_circuit(s, c), invert_circuit(c))
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-10)


def test_norm_preserved_over_long_random_circuits(rng):
    for n in (2, 4, 6):
        gates = []
        while len(gates) < 100:
            word = "".join(rng.choice(list("IXYZ")) for _ in range(n))
            if set(word) == {"I"}:
                continue
            gates.append(PauliRotation(word, float(rng.normal())))
        s = random_state(rng, n)
        out = apply_circuit(s, Circuit(tuple(gates), n))
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-10


def test_exact_evolve_zero_time(rng):
    h = random_hermitian_sum(rng, 3, 4)
    s = random_state(rng, 3)
    out = exact_evolve(h, 0.0, s)
    np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-12)


@pytest.mark.parametrize("t", [0.3, 1.1, 2.7])
def test_exact_evolve_single_qubit_larmor(t):
    h = OperatorSum.from_terms([PauliTerm("Z")])
    s = init_product_state([(1, 1)])
    out = exact_evolve(h, t, s)
    x_obs = OperatorSum.from_terms([PauliTerm("X")])
    assert expectation(out, x_obs) == pytest.approx(np.cos(2 * t), abs=1e-12)


def test_exact_evolve_matches_scaling_and_squaring_oracle(tfim_ruth3, paper_state):
    h = tfim_ruth3.partition.hamiltonian
    t = 0.3
    evolved = exact_evolve(h, t, paper_state)
    oracle = scipy.linalg.expm(-1j * t * to_dense(h).matrix) @ paper_state.amplitudes
    np.testing.assert_allclose(evolved.amplitudes, oracle, atol=1e-9)


def test_exact_evolve_group_property(rng):
    h = random_hermitian_sum(rng, 3, 5)
    s = random_state(rng, 3)
    once = exact_evolve(h, 0.9, s)
    split = exact_evolve(h, 0.5, exact_evolve(h, 0.4, s))
    np.testing.assert_allclose(once.amplitudes, split.amplitudes, atol=1e-10)


def test_exact_evolve_requires_hermitian(rng):
    bad = OperatorSum.from_terms([PauliTerm("Z", 1j)])
    with pytest.raises(HermiticityError):
        exact_evolve(bad, 0.1, init_product_state([(1, 0)]))


def test_exact_evolve_dimension_mismatch():
    h = OperatorSum.from_terms([PauliTerm("ZZ")])
    with pytest.raises(DimensionMismatchError):
        exact_evolve(h, 0.1, init_product_state([(1, 0)]))


def test_expectation_benchmark_observable_on_all_zeros(tfim_ruth3):
    zeros = init_product_state([(1, 0)] * 4)
    assert expectation(zeros, tfim_ruth3.observable) == pytest.approx(1.0, abs=1e-12)


def test_expectation_plus_state_z_vanishes():
    plus = init_product_state([(1, 1)])
    z = OperatorSum.from_terms([PauliTerm("Z")])
    assert expectation(plus, z) == pytest.approx(0.0, abs=1e-12)


def test_expectation_matches_dense_oracle(paper_state):
    obs = OperatorSum.from_terms(
        [PauliTerm("I" * i + "Z" + "I" * (3 - i), 0.25) for i in range(4)]
    )
    dense = to_dense(obs).matrix
    amps = paper_state.amplitudes
    oracle = float(np.real(np.vdot(amps, dense @ amps)))
    assert expectation(paper_state, obs) == pytest.approx(oracle, abs=1e-12)


def test_expectation_requires_hermitian(paper_state):
    bad = OperatorSum.from_terms([PauliTerm("ZIII", 1j)])
    with pytest.raises(HermiticityError):
        expectation(paper_state, bad)


def test_expectation_is_real_on_random_states(rng):
    obs = random_hermitian_sum(rng, 3, 6)
    for _ in range(20):
        value = expectation(random_state(rng, 3), obs)
        assert isinstance(value, float)


def test_rotation_agrees_with_exact_evolution(rng):
    # single-term Hamiltonian coeff * P with t * coeff equal to the angle
    coeff = 0.7
    h = OperatorSum.from_terms([PauliTerm("XZY", coeff)])
    s = random_state(rng, 3)
    t = 0.43
    via_gate = apply_pauli_rotation(s, PauliRotation("XZY", coeff * t))
    via_exact = exact_evolve(h, t, s)
    np.testing.assert_allclose(via_gate.amplitudes, via_exact.amplitudes, atol=1e-10)


def test_circuit_unitary_matches_application(rng):
    gates = (PauliRotation("ZZ", 0.3), PauliRotation("XI", 0.2))
    c = Circuit(gates, 2)
    s = random_state(rng, 2)
    np.testing.assert_allclose(
        circuit_unitary(c) @ s.amplitudes,
        apply_circuit(s, c).amplitudes,
        atol=1e-12,
    )


def test_exact_unitary_is_unitary(rng):
    h = random_hermitian_sum(rng, 2, 4)
    u = exact_unitary(h, 0.8)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-10)


def test_jitter_disabled_by_default(paper_state, tfim_ruth3):
    from trotterprof.simulator import measure

    exact = expectation(paper_state, tfim_ruth3.observable)
    assert measure(paper_state, tfim_ruth3.observable) == exact
    noisy = measure(
        paper_state, tfim_ruth3.observable, GaussianJitter.from_seed(0.1, 7)
    )
    assert noisy != exact


def test_state_vector_normalization_guard():
    with pytest.raises(DegenerateInputError):
        StateVector(np.array([1.0, 1.0], dtype=complex), 1)
    with pytest.raises(DegenerateInputError):
        StateVector.normalized(np.zeros(4))
