"""Statevector kernels, gate matrices, and logical/physical agreement."""

import cmath
import math

import numpy as np
import pytest

from dqas.circuits import CNOT, SWAP, U, Circuit
from dqas.hamiltonians import PauliHamiltonian, build_tfim
from dqas.simulator import (
    SimulationError,
    apply_circuit,
    apply_physical,
    expectation,
    fidelity,
    physical_events,
    random_state,
    u_matrix,
    zero_state,
)

from conftest import random_pool_circuit


def test_u_identity_at_zero_angles():
    c = Circuit.from_ops(1, [(U, (0,))])
    out = apply_circuit(c, [0.0, 0.0, 0.0])
    assert np.allclose(out, zero_state(1))


def test_u_pi_zero_pi_is_x():
    c = Circuit.from_ops(1, [(U, (0,))])
    out = apply_circuit(c, [math.pi, 0.0, math.pi])
    assert np.allclose(out, [0.0, 1.0], atol=1e-12)


def test_cnot_flips_target_when_control_set():
    c = Circuit.from_ops(2, [(CNOT, (0, 1))])
    state = np.zeros(4, dtype=complex)
    state[2] = 1.0  # |10>: qubit 0 high bit set
    out = apply_circuit(c, [], state)
    assert np.allclose(out, [0, 0, 0, 1])


def test_swap_exchanges_wires():
    c = Circuit.from_ops(2, [(SWAP, (0, 1))])
    state = np.zeros(4, dtype=complex)
    state[1] = 1.0  # |01>
    out = apply_circuit(c, [], state)
    expected = np.zeros(4)
    expected[2] = 1.0  # |10>
    assert np.allclose(out, expected)


def test_u_matrix_against_direct_evaluation():
    rng = np.random.default_rng(9)
    for _ in range(100):
        theta, phi, lam = rng.uniform(0, 2 * np.pi, 3)
        ref = np.array(
            [
                [math.cos(theta / 2), -cmath.exp(1j * lam) * math.sin(theta / 2)],
                [
                    cmath.exp(1j * phi) * math.sin(theta / 2),
                    cmath.exp(1j * (phi + lam)) * math.cos(theta / 2),
                ],
            ]
        )
        assert np.allclose(u_matrix(theta, phi, lam), ref, atol=1e-14)
        assert np.allclose(u_matrix(theta, phi, lam) @ ref.conj().T, np.eye(2), atol=1e-12)


def test_norm_preserved_by_random_circuits(two_qpu_device):
    rng = np.random.default_rng(3)
    for seed in range(10):
        c = random_pool_circuit(two_qpu_device, np.random.default_rng(seed), method="both")
        params = rng.uniform(0, 2 * np.pi, c.n_params)
        out = apply_circuit(c, params)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_linearity_in_initial_state(two_qpu_device):
    c = random_pool_circuit(two_qpu_device, np.random.default_rng(8), n_gates=15)
    params = np.random.default_rng(1).uniform(0, 2 * np.pi, c.n_params)
    rng = np.random.default_rng(2)
    a, b = random_state(6, rng), random_state(6, rng)
    alpha, beta = 0.3 + 0.1j, -0.7 + 0.4j
    combo = apply_circuit(c, params, alpha * a + beta * b)
    parts = alpha * apply_circuit(c, params, a) + beta * apply_circuit(c, params, b)
    assert np.allclose(combo, parts, atol=1e-12)


def test_dimension_mismatch_rejected():
    c = Circuit.from_ops(2, [(U, (0,))])
    with pytest.raises(SimulationError):
        apply_circuit(c, [0.1])
    with pytest.raises(SimulationError):
        apply_circuit(c, [0.1, 0.2, 0.3], np.ones(8, dtype=complex) / np.sqrt(8))


def test_expectation_basics():
    z0 = PauliHamiltonian.build([(1.0, "Z")])
    assert expectation(zero_state(1), z0) == pytest.approx(1.0)
    tfim = build_tfim(6, True)
    assert expectation(zero_state(6), tfim) == pytest.approx(6.0)


def test_expectation_matches_dense_oracle():
    h = build_tfim(5, True)
    dense = h.to_dense()
    rng = np.random.default_rng(0)
    for _ in range(10):
        psi = random_state(5, rng)
        assert expectation(psi, h) == pytest.approx(float(np.vdot(psi, dense @ psi).real), abs=1e-9)


def test_expectation_dimension_check():
    with pytest.raises(SimulationError):
        expectation(zero_state(3), build_tfim(4, True))


@pytest.mark.parametrize("method", ["telegate", "teledata", "both"])
def test_logical_physical_agreement(two_qpu_device, method):
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        c = random_pool_circuit(two_qpu_device, rng, method=method)
        params = np.random.default_rng(seed).uniform(0, 2 * np.pi, c.n_params)
        logical = apply_circuit(c, params)
        physical = apply_physical(c, params, two_qpu_device)
        assert fidelity(logical, physical) >= 1.0 - 1e-9


def test_local_circuit_trivially_agrees(two_qpu_device):
    rng = np.random.default_rng(4)
    c = random_pool_circuit(two_qpu_device, rng, method="telegate")
    local = Circuit(
        gates=tuple(g for g in c.gates),
        n_logical=c.n_logical,
        n_params=c.n_params,
        ebits=c.ebits,
        assignment=c.assignment,
        final_assignment=c.final_assignment,
    )
    params = np.zeros(c.n_params)
    assert fidelity(apply_circuit(local, params), apply_physical(local, params, two_qpu_device)) >= 1 - 1e-12


def test_bell_distributions_match_ebits(two_qpu_device):
    for seed in range(15):
        c = random_pool_circuit(two_qpu_device, np.random.default_rng(seed), method="both")
        events, _ = physical_events(c, two_qpu_device)
        assert sum(1 for e in events if e[0] == "bell") == c.ebits
