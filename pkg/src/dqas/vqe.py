"""VQE training of a candidate circuit: Adam descent with multi-restart queries.

Gradients are exact, computed by reverse sweep through the statevector: after
the forward pass the bra side carries H applied to the final state, both
sides are unwound gate by gate, and each angle contributes
2 Re <bra| U^dag dU |ket> evaluated in the unwound frame. All restarts of a
query run as rows of one batch; rows are computed independently so results
match one-at-a-time runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CNOT, U, Circuit
from .hamiltonians import CompiledPauliSum, PauliHamiltonian
from .simulator import (
    SimulationError,
    apply_cnot,
    apply_swap,
    apply_1q,
    sim_ops,
    u_matrices,
    u_partials,
)

_DENSE_H_LIMIT = 10


@dataclass(frozen=True)
class TrainConfig:
    """Stopping rules and optimizer settings for one query."""

    learning_rate: float = 0.01
    max_iters: int = 10000
    n_restarts: int = 10
    accuracy_threshold: float = 0.0016
    target_energy: float | None = None
    convergence_window: int = 50
    convergence_tol: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if min(self.learning_rate, self.max_iters, self.n_restarts) <= 0:
            raise ValueError("learning_rate, max_iters and n_restarts must be positive")
        if self.accuracy_threshold <= 0 or self.convergence_window <= 0:
            raise ValueError("accuracy_threshold and convergence_window must be positive")


@dataclass(frozen=True)
class QueryResult:
    """Outcome of one multi-restart training query."""

    best_energy: float
    best_params: np.ndarray
    restart_energies: tuple[float, ...]
    iterations_used: tuple[int, ...]
    solved: bool

    def to_row(self) -> dict:
        return {
            "best_energy": self.best_energy,
            "restart_energies": list(self.restart_energies),
            "iterations": list(self.iterations_used),
            "solved": self.solved,
        }


class AdjointEngine:
    """Reusable energy-and-gradient evaluator for one (circuit, Hamiltonian) pair."""

    def __init__(self, circuit: Circuit, h: PauliHamiltonian):
        if h.n != circuit.n_logical:
            raise SimulationError(
                f"Hamiltonian acts on {h.n} qubits, circuit has {circuit.n_logical}"
            )
        self.n = circuit.n_logical
        self.n_params = circuit.n_params
        self.ops = sim_ops(circuit)
        if h.n <= _DENSE_H_LIMIT:
            self._h_t = np.ascontiguousarray(h.to_dense().T)
            self._h_masks = None
        else:
            self._h_t = None
            self._h_masks = CompiledPauliSum(h)

    def _apply_h(self, psi: np.ndarray) -> np.ndarray:
        if self._h_t is not None:
            return psi @ self._h_t
        return self._h_masks.apply(psi)

    def energy_and_gradient(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Energies (R,) and gradients (R, P) for a (R, P) parameter batch."""
        n = self.n
        r = params.shape[0]
        angles = params.reshape(r, -1, 3)
        mats = u_matrices(angles) if self.n_params else None

        ket = np.zeros((r, 2**n), dtype=complex)
        ket[:, 0] = 1.0
        for op in self.ops:
            if op[0] == U:
                ket = apply_1q(ket, mats[:, op[2] // 3], op[1], n)
            elif op[0] == CNOT:
                apply_cnot(ket, op[1], op[2], n)
            else:
                apply_swap(ket, op[1], op[2], n)

        bra = self._apply_h(ket)
        energy = np.einsum("re,re->r", ket.conj(), bra).real
        grad = np.zeros_like(params)
        if self.n_params == 0:
            return energy, grad

        # G = U^dag dU per angle, evaluated once for all gates
        partials = u_partials(angles)
        gmats = np.einsum("rgji,rgkjl->rgkil", mats.conj(), partials)
        inv = np.concatenate([mats, mats], axis=0).conj().transpose(0, 1, 3, 2)
        stack = np.concatenate([ket, bra], axis=0)
        for op in reversed(self.ops):
            if op[0] == U:
                g = op[2] // 3
                stack = apply_1q(stack, inv[:, g], op[1], n)
                # reduce bra/ket to the 2x2 transition matrix on this wire
                shape = (r, -1, 2, 1 << (n - op[1] - 1))
                t = np.einsum(
                    "rlit,rljt->rij",
                    stack[r:].reshape(shape).conj(),
                    stack[:r].reshape(shape),
                )
                grad[:, op[2] : op[2] + 3] = 2.0 * np.einsum(
                    "rkij,rij->rk", gmats[:, g], t
                ).real
            elif op[0] == CNOT:
                apply_cnot(stack, op[1], op[2], n)
            else:
                apply_swap(stack, op[1], op[2], n)
        return energy, grad


def energy_and_gradient(
    circuit: Circuit, params: np.ndarray, h: PauliHamiltonian
) -> tuple[float, np.ndarray]:
    """Energy and its exact gradient for one parameter vector."""
    params = np.asarray(params, dtype=float).reshape(1, -1)
    if params.shape[1] != circuit.n_params:
        raise SimulationError(f"expected {circuit.n_params} parameters, got {params.shape[1]}")
    energy, grad = AdjointEngine(circuit, h).energy_and_gradient(params)
    return float(energy[0]), grad[0]


def train_query(
    circuit: Circuit,
    h: PauliHamiltonian,
    cfg: TrainConfig,
    rng: np.random.Generator | int,
    restart_seeds: tuple[int, ...] | None = None,
) -> QueryResult:
    """Train one candidate with independent random restarts; keep the minimum.

    Each restart starts from angles uniform on [0, 2pi) and stops on reaching
    the accuracy threshold above ``cfg.target_energy``, on its best energy
    stalling for ``convergence_window`` iterations, or at ``max_iters``.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if restart_seeds is None:
        restart_seeds = tuple(int(s) for s in rng.integers(0, 2**63 - 1, size=cfg.n_restarts))
    engine = AdjointEngine(circuit, h)
    r = len(restart_seeds)
    p = circuit.n_params
    params = (
        np.stack([np.random.default_rng(s).uniform(0.0, 2.0 * np.pi, size=p) for s in restart_seeds])
        if p
        else np.zeros((r, 0))
    )

    if p == 0:
        energy, _ = engine.energy_and_gradient(params)
        best = float(energy.min())
        solved = cfg.target_energy is not None and best - cfg.target_energy <= cfg.accuracy_threshold
        return QueryResult(
            best_energy=best,
            best_params=np.zeros(0),
            restart_energies=tuple(float(e) for e in energy),
            iterations_used=(0,) * r,
            solved=solved,
        )

    m = np.zeros_like(params)
    v = np.zeros_like(params)
    best_e = np.full(r, np.inf)
    best_params = params.copy()
    anchor_e = np.full(r, np.inf)
    anchor_iter = np.zeros(r, dtype=int)
    stop_iter = np.full(r, cfg.max_iters, dtype=int)
    frozen = np.zeros(r, dtype=bool)
    final_e = np.full(r, np.inf)

    for it in range(1, cfg.max_iters + 1):
        energy, grad = engine.energy_and_gradient(params)

        track = (energy < best_e) & ~frozen
        best_e = np.where(track, energy, best_e)
        best_params[track] = params[track]
        final_e = np.where(frozen, final_e, best_e)

        # plateau detection on the running best
        moved = (~frozen) & (best_e < anchor_e - cfg.convergence_tol)
        anchor_e = np.where(moved, best_e, anchor_e)
        anchor_iter = np.where(moved, it, anchor_iter)

        hit_accuracy = np.zeros(r, dtype=bool)
        if cfg.target_energy is not None:
            hit_accuracy = best_e - cfg.target_energy <= cfg.accuracy_threshold
        stalled = (it - anchor_iter) >= cfg.convergence_window
        stopping = (~frozen) & (hit_accuracy | stalled)
        stop_iter = np.where(stopping, it, stop_iter)
        frozen |= stopping
        if frozen.all():
            break

        # Adam step (rows past their stop keep moving but stay frozen in the record)
        m = cfg.adam_beta1 * m + (1 - cfg.adam_beta1) * grad
        v = cfg.adam_beta2 * v + (1 - cfg.adam_beta2) * grad**2
        m_hat = m / (1 - cfg.adam_beta1**it)
        v_hat = v / (1 - cfg.adam_beta2**it)
        params = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)

    final_e = np.where(frozen, final_e, best_e)
    idx = int(np.argmin(final_e))
    best = float(final_e[idx])
    solved = cfg.target_energy is not None and best - cfg.target_energy <= cfg.accuracy_threshold
    return QueryResult(
        best_energy=best,
        best_params=best_params[idx].copy(),
        restart_energies=tuple(float(e) for e in final_e),
        iterations_used=tuple(int(i) for i in np.minimum(stop_iter, cfg.max_iters)),
        solved=solved,
    )
