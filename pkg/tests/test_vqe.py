"""Energy/gradient correctness and the multi-restart training protocol."""

import numpy as np
import pytest

from dqas.circuits import U, Circuit, layered_ansatz
from dqas.hamiltonians import PauliHamiltonian, build_tfim, exact_ground_energy
from dqas.simulator import apply_circuit, expectation
from dqas.vqe import TrainConfig, energy_and_gradient, train_query

from conftest import random_pool_circuit


def finite_difference(circuit, params, h, eps=1e-5):
    grad = np.zeros_like(params)
    for i in range(len(params)):
        hi = params.copy()
        lo = params.copy()
        hi[i] += eps
        lo[i] -= eps
        e_hi = expectation(apply_circuit(circuit, hi), h)
        e_lo = expectation(apply_circuit(circuit, lo), h)
        grad[i] = (e_hi - e_lo) / (2 * eps)
    return grad


def test_gradient_matches_finite_differences(two_qpu_device):
    h = build_tfim(6, True)
    for seed in range(5):
        c = random_pool_circuit(two_qpu_device, np.random.default_rng(seed), n_gates=14)
        if c.n_params == 0:
            continue
        params = np.random.default_rng(100 + seed).uniform(0, 2 * np.pi, c.n_params)
        _, grad = energy_and_gradient(c, params, h)
        fd = finite_difference(c, params, h)
        # floor the denominator: near-zero derivatives are dominated by the
        # difference quotient's own roundoff, not by the analytic gradient
        rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-3)
        assert rel.max() < 1e-5


def test_single_u_against_closed_form():
    circuit = Circuit.from_ops(1, [(U, (0,))])
    z = PauliHamiltonian.build([(1.0, "Z")])
    for theta in (0.3, 1.2, 2.9):
        e, g = energy_and_gradient(circuit, np.array([theta, 0.0, 0.0]), z)
        assert e == pytest.approx(np.cos(theta), abs=1e-12)
        assert g[0] == pytest.approx(-np.sin(theta), abs=1e-12)


def test_zero_parameter_circuit_is_constant():
    circuit = Circuit.from_ops(2, [])
    h = build_tfim(2, True)
    e, g = energy_and_gradient(circuit, np.zeros(0), h)
    assert e == pytest.approx(expectation(apply_circuit(circuit, []), h))
    assert g.size == 0
    result = train_query(circuit, h, TrainConfig(n_restarts=3, target_energy=-1.0), 0)
    assert result.iterations_used == (0, 0, 0)
    assert result.best_energy == pytest.approx(e)


def test_restart_permutation_preserves_best():
    h = build_tfim(4, True)
    c = layered_ansatz(4, 1)
    cfg = TrainConfig(max_iters=120, n_restarts=4, target_energy=exact_ground_energy(h))
    seeds = (11, 22, 33, 44)
    a = train_query(c, h, cfg, 0, restart_seeds=seeds)
    b = train_query(c, h, cfg, 0, restart_seeds=seeds[::-1])
    assert a.restart_energies == b.restart_energies[::-1]
    assert a.best_energy == b.best_energy


def test_variational_bound_and_descent(two_qpu_device):
    h = build_tfim(6, True)
    e0 = exact_ground_energy(h)
    cfg = TrainConfig(max_iters=150, n_restarts=3, target_energy=e0)
    for seed in range(4):
        c = random_pool_circuit(two_qpu_device, np.random.default_rng(seed), n_gates=18)
        result = train_query(c, h, cfg, seed)
        assert result.best_energy >= e0 - 1e-9
        assert result.best_energy == pytest.approx(min(result.restart_energies))
        # descent: final best never exceeds the starting energy of any restart
        if c.n_params:
            starts = [
                expectation(
                    apply_circuit(
                        c, np.random.default_rng(s).uniform(0, 2 * np.pi, c.n_params)
                    ),
                    h,
                )
                for s in result_seeds(result, cfg, seed)
            ]
            assert result.best_energy <= min(starts) + 1e-6


def result_seeds(result, cfg, master):
    rng = np.random.default_rng(master)
    return tuple(int(s) for s in rng.integers(0, 2**63 - 1, size=cfg.n_restarts))


def test_training_deterministic():
    h = build_tfim(4, True)
    c = layered_ansatz(4, 2)
    cfg = TrainConfig(max_iters=100, n_restarts=2, target_energy=exact_ground_energy(h))
    a = train_query(c, h, cfg, 7)
    b = train_query(c, h, cfg, 7)
    assert a.restart_energies == b.restart_energies
    assert np.array_equal(a.best_params, b.best_params)


def test_accuracy_stop_short_circuits():
    h = build_tfim(4, True)
    e0 = exact_ground_energy(h)
    c = layered_ansatz(4, 3)
    cfg = TrainConfig(max_iters=6000, n_restarts=2, target_energy=e0)
    result = train_query(c, h, cfg, 3)
    if result.solved:
        assert max(result.iterations_used) < 6000


def test_mismatched_hamiltonian_rejected():
    from dqas.simulator import SimulationError
    with pytest.raises(SimulationError):
        energy_and_gradient(layered_ansatz(3, 1), np.zeros(9), build_tfim(4, True))


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(accuracy_threshold=0.0)
