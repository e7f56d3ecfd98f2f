"""Dense statevector simulation of circuits, logical and full-register.

Conventions: a state over n qubits is a complex array whose last axis has
length 2^n; qubit 0 is the most significant bit of the basis index. Batched
states have shape (B, 2^n) and every kernel treats rows independently, so
batched results match one-at-a-time runs.

The logical path (:func:`apply_circuit`) plays gates on the logical wires
recorded at generation time; relocations are wire bookkeeping and touch no
amplitudes. The reference path (:func:`apply_physical`) simulates every qubit
of the device, expanding each nonlocal gate into its Bell-pair distribution,
entangling primitives and deferred-measurement corrections, and must agree
with the logical path up to global phase.
"""

from __future__ import annotations

import numpy as np

from .circuits import CNOT, SWAP, U, Circuit
from .device import AssignmentTracker, DeviceGraph
from .hamiltonians import CompiledPauliSum, PauliHamiltonian
from .vcg import VcgState

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


class SimulationError(ValueError):
    """Raised on dimension mismatches or oversized registers."""


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state of n qubits."""
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def u_matrices(params: np.ndarray) -> np.ndarray:
    """(..., 3) angle triples (theta, phi, lam) -> (..., 2, 2) unitaries."""
    theta, phi, lam = params[..., 0], params[..., 1], params[..., 2]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(params.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = -np.exp(1j * lam) * s
    out[..., 1, 0] = np.exp(1j * phi) * s
    out[..., 1, 1] = np.exp(1j * (phi + lam)) * c
    return out


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    return u_matrices(np.array([theta, phi, lam]))


def u_partials(params: np.ndarray) -> np.ndarray:
    """(..., 3) angles -> (..., 3, 2, 2) derivatives w.r.t. theta, phi, lam."""
    theta, phi, lam = params[..., 0], params[..., 1], params[..., 2]
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    eip, eil, eipl = np.exp(1j * phi), np.exp(1j * lam), np.exp(1j * (phi + lam))
    out = np.zeros(params.shape[:-1] + (3, 2, 2), dtype=complex)
    out[..., 0, 0, 0] = -0.5 * s
    out[..., 0, 0, 1] = -0.5 * eil * c
    out[..., 0, 1, 0] = 0.5 * eip * c
    out[..., 0, 1, 1] = -0.5 * eipl * s
    out[..., 1, 1, 0] = 1j * eip * s
    out[..., 1, 1, 1] = 1j * eipl * c
    out[..., 2, 0, 1] = -1j * eil * s
    out[..., 2, 1, 1] = 1j * eipl * c
    return out


# -- kernels on (B, 2^n) batches -------------------------------------------


def apply_1q(psi: np.ndarray, mat: np.ndarray, wire: int, n: int) -> np.ndarray:
    """Apply a 2x2 matrix (shared or per-row (B,2,2)) to one wire; returns new array."""
    b = psi.shape[0]
    view = psi.reshape(b, -1, 2, 1 << (n - wire - 1))
    x = view[:, :, 0, :]
    y = view[:, :, 1, :]
    out = np.empty_like(view)
    if mat.ndim == 2:
        out[:, :, 0, :] = mat[0, 0] * x + mat[0, 1] * y
        out[:, :, 1, :] = mat[1, 0] * x + mat[1, 1] * y
    else:
        m = mat[:, :, :, None, None]
        out[:, :, 0, :] = m[:, 0, 0] * x + m[:, 0, 1] * y
        out[:, :, 1, :] = m[:, 1, 0] * x + m[:, 1, 1] * y
    return out.reshape(b, -1)


def _view4(psi: np.ndarray, w1: int, w2: int, n: int) -> np.ndarray:
    """Reshape so axes 2 and 4 are the bits of wires w1 < w2."""
    b = psi.shape[0]
    return psi.reshape(b, 2**w1, 2, 2 ** (w2 - w1 - 1), 2, -1)


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> None:
    """In-place CNOT on a (B, 2^n) batch."""
    lo, hi = min(control, target), max(control, target)
    view = _view4(psi, lo, hi, n)
    if control < target:
        tmp = view[:, :, 1, :, 0, :].copy()
        view[:, :, 1, :, 0, :] = view[:, :, 1, :, 1, :]
        view[:, :, 1, :, 1, :] = tmp
    else:
        tmp = view[:, :, 0, :, 1, :].copy()
        view[:, :, 0, :, 1, :] = view[:, :, 1, :, 1, :]
        view[:, :, 1, :, 1, :] = tmp


def apply_swap(psi: np.ndarray, w1: int, w2: int, n: int) -> None:
    """In-place SWAP on a (B, 2^n) batch."""
    lo, hi = min(w1, w2), max(w1, w2)
    view = _view4(psi, lo, hi, n)
    tmp = view[:, :, 0, :, 1, :].copy()
    view[:, :, 0, :, 1, :] = view[:, :, 1, :, 0, :]
    view[:, :, 1, :, 0, :] = tmp


def apply_cz(psi: np.ndarray, w1: int, w2: int, n: int) -> None:
    """In-place controlled-Z (symmetric) on a (B, 2^n) batch."""
    lo, hi = min(w1, w2), max(w1, w2)
    view = _view4(psi, lo, hi, n)
    view[:, :, 1, :, 1, :] *= -1.0


# -- logical simulation ------------------------------------------------------


def sim_ops(circuit: Circuit) -> list[tuple]:
    """Wire-level op list for the logical register; relocations drop out."""
    ops = []
    for g in circuit.gates:
        if g.kind == U:
            ops.append((U, g.wires[0], g.param_slot))
        elif g.kind == CNOT:
            ops.append((CNOT, g.wires[0], g.wires[1]))
        elif g.kind == SWAP and not g.is_relocation:
            ops.append((SWAP, g.wires[0], g.wires[1]))
    return ops


def apply_circuit_batch(circuit: Circuit, params: np.ndarray) -> np.ndarray:
    """Run the circuit from |0...0> for every row of a (B, n_params) batch."""
    n = circuit.n_logical
    b = params.shape[0]
    if params.shape[1] != circuit.n_params:
        raise SimulationError(
            f"expected {circuit.n_params} parameters, got {params.shape[1]}"
        )
    psi = np.zeros((b, 2**n), dtype=complex)
    psi[:, 0] = 1.0
    mats = u_matrices(params.reshape(b, -1, 3)) if circuit.n_params else None
    for op in sim_ops(circuit):
        if op[0] == U:
            psi = apply_1q(psi, mats[:, op[2] // 3], op[1], n)
        elif op[0] == CNOT:
            apply_cnot(psi, op[1], op[2], n)
        else:
            apply_swap(psi, op[1], op[2], n)
    return psi


def apply_circuit(circuit: Circuit, params: np.ndarray, initial: np.ndarray | None = None) -> np.ndarray:
    """Statevector after the circuit acts on ``initial`` (default |0...0>)."""
    n = circuit.n_logical
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.n_params:
        raise SimulationError(f"expected {circuit.n_params} parameters, got {params.size}")
    if initial is None:
        psi = zero_state(n)[None, :].copy()
    else:
        initial = np.asarray(initial, dtype=complex)
        if initial.shape != (2**n,):
            raise SimulationError(f"initial state must have dimension {2**n}")
        psi = initial[None, :].copy()
    mats = u_matrices(params.reshape(-1, 3)) if circuit.n_params else None
    for op in sim_ops(circuit):
        if op[0] == U:
            psi = apply_1q(psi, mats[op[2] // 3], op[1], n)
        elif op[0] == CNOT:
            apply_cnot(psi, op[1], op[2], n)
        else:
            apply_swap(psi, op[1], op[2], n)
    return psi[0]


def expectation(state: np.ndarray, hamiltonian: PauliHamiltonian) -> float:
    """<psi|H|psi>; the imaginary residue of a Hermitian H is discarded."""
    state = np.asarray(state)
    if state.shape != (2**hamiltonian.n,):
        raise SimulationError(
            f"state dimension {state.shape} does not match n={hamiltonian.n}"
        )
    val = np.vdot(state, CompiledPauliSum(hamiltonian).apply(state))
    return float(val.real)


# -- full-register reference simulation --------------------------------------

PHYSICAL_LIMIT = 16


def physical_events(circuit: Circuit, device: DeviceGraph) -> tuple[list[tuple], dict[int, int]]:
    """Replay the circuit into primitive full-register events.

    Returns the event list and the final qubit->wire placement. Cycles still
    open at the end are closed with cat-disentanglers so the communication
    qubits disentangle from the data.
    """
    from .generation import replay_gate  # deferred: generation imports this module's siblings

    state = VcgState(device)
    tracker = AssignmentTracker(circuit.assignment)
    events: list[tuple] = []
    for gate in circuit.gates:
        events += replay_gate(state, tracker, gate)
    for idx, owner in enumerate(state.link_owner):
        if owner is not None:
            events += state.release_link(idx)
    return events, dict(tracker.wire_of)


def apply_physical(circuit: Circuit, params: np.ndarray, device: DeviceGraph) -> np.ndarray:
    """Simulate every device qubit and reduce to the logical wires.

    Communication qubits, empty qubits and teleport residues all end in |0>
    under the deferred-measurement unitarization, so the reduction is a
    hyperslice; its norm is checked before returning.
    """
    qubits = device.qubits
    n_total = len(qubits)
    if n_total > PHYSICAL_LIMIT:
        raise SimulationError(f"full register of {n_total} qubits exceeds dense limit")
    axis = {q: i for i, q in enumerate(qubits)}
    params = np.asarray(params, dtype=float).reshape(-1)
    mats = u_matrices(params.reshape(-1, 3)) if circuit.n_params else None

    events, final_wires = physical_events(circuit, device)
    psi = zero_state(n_total)[None, :].copy()
    for ev in events:
        kind = ev[0]
        if kind == "u":
            psi = apply_1q(psi, mats[ev[2] // 3], axis[ev[1]], n_total)
        elif kind == "h":
            psi = apply_1q(psi, _H, axis[ev[1]], n_total)
        elif kind == "cnot":
            apply_cnot(psi, axis[ev[1]], axis[ev[2]], n_total)
        elif kind == "cz":
            apply_cz(psi, axis[ev[1]], axis[ev[2]], n_total)
        elif kind == "swap":
            apply_swap(psi, axis[ev[1]], axis[ev[2]], n_total)
        elif kind == "bell":
            psi = apply_1q(psi, _H, axis[ev[1]], n_total)
            apply_cnot(psi, axis[ev[1]], axis[ev[2]], n_total)
        else:
            raise SimulationError(f"unknown event {ev!r}")

    # bring logical wires to the front in wire order, everything else behind
    wire_axes = [axis[q] for q, _ in sorted(final_wires.items(), key=lambda kv: kv[1])]
    rest = [i for i in range(n_total) if i not in wire_axes]
    tensor = psi[0].reshape((2,) * n_total).transpose(wire_axes + rest)
    reduced = tensor.reshape(2**circuit.n_logical, -1)[:, 0]
    norm = np.linalg.norm(reduced)
    if norm < 1.0 - 1e-6:
        raise SimulationError(
            f"non-logical qubits did not return to |0> (residual norm {norm:.6f})"
        )
    return reduced / norm
