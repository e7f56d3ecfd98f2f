"""Random generation of distributed circuits.

Gates are drawn by kind from a fixed mix, placed uniformly over the currently
legal positions, and dropped when redundant. Nonlocal CNOTs go through either
the gate-teleporting route (a cat-entangler puts the control in control mode
and grants virtual edges, reusable for free until released) or the
state-teleporting route (the mover relocates into an empty qubit beside the
far comm qubit, then the gate is local). Rejected draws do not consume a gate
slot; a long run of consecutive rejections aborts generation.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .circuits import CNOT, SWAP, TELEDATA, TELEGATE, U, Circuit, Gate, GenMeta
from .device import (
    AssignmentTracker,
    DeviceGraph,
    QubitAssignment,
    device_hash,
    sample_assignment,
)
from .vcg import PositionSets, VcgError, VcgState, derive_position_sets

METHOD_TELEGATE = "telegate"
METHOD_TELEDATA = "teledata"
METHOD_BOTH = "both"
METHODS = (METHOD_TELEGATE, METHOD_TELEDATA, METHOD_BOTH)

GATE_KINDS = (U, CNOT, SWAP)

DEFAULT_MAX_REJECTS = 1000

# per-circuit draws used by the search pipeline
GATE_MIX_CHOICES = ((0.4, 0.2, 0.4), (0.5, 0.25, 0.25), (0.6, 0.3, 0.1))
P_NONLOCAL_CHOICES = (0.1, 0.2, 0.3, 0.4)


class GenerationError(RuntimeError):
    """Raised when a circuit request cannot be satisfied or a replay is illegal."""


class RedundancyTracker:
    """State needed to reject gates that collapse with earlier ones.

    Wire-indexed history follows the quantum state through relocations;
    position-indexed history (repeat-SWAP bookkeeping) does not, since a
    repeated SWAP is pointless only relative to its physical location.
    """

    def __init__(self) -> None:
        self.last_on_wire: dict[int, tuple[int, str, str]] = {}
        self.touched: set[int] = set()
        self.last_swap: dict[frozenset, int] = {}
        self.last_multi: dict[int, int] = {}
        self.n_recorded = 0

    def is_redundant(self, kind: str, qubits: tuple[int, ...], wires: tuple[int, ...]) -> bool:
        if kind == U:
            last = self.last_on_wire.get(wires[0])
            return last is not None and last[1] == U
        if kind == CNOT:
            wc, wt = wires
            if wc not in self.touched:
                return True  # control still |0>, the gate is the identity
            lc = self.last_on_wire.get(wc)
            lt = self.last_on_wire.get(wt)
            return (
                lc is not None
                and lt is not None
                and lc[0] == lt[0]
                and lc[1] == CNOT
                and lc[2] == "control"
                and lt[2] == "target"
            )
        if kind == SWAP:
            prev = self.last_swap.get(frozenset(qubits))
            if prev is not None:
                since = max(self.last_multi.get(q, -1) for q in qubits)
                if since <= prev:
                    return True  # same pair again with no two-qubit activity in between
            if len(wires) == 2 and not (wires[0] in self.touched or wires[1] in self.touched):
                return True  # both wires still |0>; only relocations may shuffle fresh qubits
            return False
        raise GenerationError(f"unknown gate kind {kind!r}")

    def record(self, gate: Gate) -> None:
        idx = self.n_recorded
        self.n_recorded += 1
        if gate.kind == U:
            self.last_on_wire[gate.wires[0]] = (idx, U, "single")
            self.touched.add(gate.wires[0])
            return
        if gate.kind == CNOT:
            wc, wt = gate.wires
            self.last_on_wire[wc] = (idx, CNOT, "control")
            self.last_on_wire[wt] = (idx, CNOT, "target")
            self.touched.update((wc, wt))
            involved = set(gate.qubits)
            if gate.nonlocal_kind == TELEDATA:
                involved.update((gate.mover, gate.landing))
            for q in involved:
                self.last_multi[q] = idx
            return
        self.last_swap[frozenset(gate.qubits)] = idx
        for q in gate.qubits:
            self.last_multi[q] = idx
        if not gate.is_relocation:
            for w in gate.wires:
                self.last_on_wire[w] = (idx, SWAP, "swap")
            self.touched.update(gate.wires)


def is_redundant(history: Circuit | Sequence[Gate], candidate: Gate) -> bool:
    """Replay ``history`` and test whether ``candidate`` would be dropped."""
    tracker = RedundancyTracker()
    gates = history.gates if isinstance(history, Circuit) else history
    for g in gates:
        tracker.record(g)
    return tracker.is_redundant(candidate.kind, candidate.qubits, candidate.wires)


def teledata_routes(
    state: VcgState, tracker: AssignmentTracker, control: int, target: int
) -> list[tuple[int, int, int]]:
    """All (mover, link index, landing) options for teleporting one endpoint.

    A route is valid when the mover sits next to the near comm qubit and some
    empty landing qubit sits next to both the far comm qubit and the other
    gate endpoint (so the gate becomes local after the move).
    """
    device = state.device
    data = set(device.data_qubits)
    routes: list[tuple[int, int, int]] = []
    for mover, partner in ((control, target), (target, control)):
        for idx in range(len(state.links)):
            try:
                near, far = state.near_far(idx, mover)
            except VcgError:
                continue
            if mover not in device.coupling_neighbors(near):
                continue
            for landing in sorted(device.coupling_neighbors(far) & data):
                if not tracker.is_empty(landing):
                    continue
                if not device.has_coupling(landing, partner):
                    continue
                routes.append((mover, idx, landing))
    return routes


def apply_teledata(
    state: VcgState,
    assignment: QubitAssignment,
    mover: int,
    route: tuple[int, int, int],
) -> tuple[VcgState, QubitAssignment]:
    """Teleport ``mover`` along ``route`` = (near comm, far comm, landing).

    Releases the link if held, takes the mover out of control mode if needed,
    charges one ebit, and returns the updated assignment with the mover's
    logical qubit on the landing site and the mover now empty.
    """
    near, far, landing = route
    pair = (near, far) if near < far else (far, near)
    try:
        link_idx = state.links.index(pair)
    except ValueError:
        raise GenerationError(f"no quantum link joins {near} and {far}") from None
    tracker = AssignmentTracker(assignment)
    if tracker.is_empty(mover):
        raise GenerationError(f"mover {mover} holds no logical qubit")
    if not tracker.is_empty(landing):
        raise GenerationError(f"landing qubit {landing} is not empty")
    if state.control_mode(mover):
        state.cat_disentangle(mover)
    state.consume_for_teleport(link_idx, mover, landing)
    tracker.relocate(mover, landing)
    return state, tracker.snapshot()


def replay_gate(state: VcgState, tracker: AssignmentTracker, gate: Gate) -> list[tuple]:
    """Apply one recorded gate to the link state and placement, emitting events.

    Validates every placement precondition, so replaying a generated circuit
    from scratch doubles as a legality check. The generator itself goes
    through this function, keeping generation and replay in lockstep.
    """
    device = state.device
    events: list[tuple] = []
    if gate.kind == U:
        q = gate.qubits[0]
        if tracker.is_empty(q):
            raise GenerationError(f"U gate on empty qubit {q}")
        if state.control_mode(q):
            events += state.cat_disentangle(q)
        events.append(("u", q, gate.param_slot))
        return events

    if gate.kind == CNOT:
        c, t = gate.qubits
        if tracker.is_empty(c) or tracker.is_empty(t):
            raise GenerationError(f"CNOT touches an empty qubit: ({c},{t})")
        if gate.nonlocal_kind is None:
            if (min(c, t), max(c, t)) not in state.sets.local_pairs:
                raise GenerationError(f"({c},{t}) is not a local two-qubit position")
            if state.control_mode(t):
                events += state.cat_disentangle(t)
            events.append(("cnot", c, t))
            return events
        if gate.nonlocal_kind == TELEGATE:
            near, far = gate.link
            if gate.opened:
                pair = (near, far) if near < far else (far, near)
                try:
                    link_idx = state.links.index(pair)
                except ValueError:
                    raise GenerationError(f"unknown link {gate.link}") from None
                events += state.cat_entangle(c, link_idx)
                if not state.is_active_edge(c, t):
                    raise GenerationError(
                        f"target {t} is not reachable from {c} over link {gate.link}"
                    )
            elif not state.is_active_edge(c, t):
                raise GenerationError(f"({c},{t}) is not an active virtual edge")
            events.append(("cnot", far, t))
            return events
        # teleported-state route
        mover, landing = gate.mover, gate.landing
        partner = t if mover == c else c
        if state.control_mode(partner):
            events += state.cat_disentangle(partner)
        if state.control_mode(mover):
            events += state.cat_disentangle(mover)
        near, far = gate.link
        pair = (near, far) if near < far else (far, near)
        try:
            link_idx = state.links.index(pair)
        except ValueError:
            raise GenerationError(f"unknown link {gate.link}") from None
        if not tracker.is_empty(landing):
            raise GenerationError(f"landing qubit {landing} is not empty")
        if tracker.is_empty(mover):
            raise GenerationError(f"mover {mover} holds no logical qubit")
        events += state.consume_for_teleport(link_idx, mover, landing)
        tracker.relocate(mover, landing)
        c_pos = landing if mover == c else c
        t_pos = landing if mover == t else t
        if not device.has_coupling(c_pos, t_pos):
            raise GenerationError(
                f"teleported gate is not local: no coupling ({c_pos},{t_pos})"
            )
        events.append(("cnot", c_pos, t_pos))
        return events

    # SWAP
    a, b = gate.qubits
    if (min(a, b), max(a, b)) not in state.sets.swap_pairs:
        raise GenerationError(f"({a},{b}) is not a permissible SWAP position")
    empty_a, empty_b = tracker.is_empty(a), tracker.is_empty(b)
    if empty_a and empty_b:
        raise GenerationError(f"SWAP ({a},{b}) has no nonempty participant")
    if (empty_a or empty_b) != gate.is_relocation:
        raise GenerationError(f"SWAP ({a},{b}) emptiness disagrees with recorded wires")
    for q in (a, b):
        if state.control_mode(q):
            events += state.cat_disentangle(q)
    if empty_a:
        tracker.relocate(b, a)
    elif empty_b:
        tracker.relocate(a, b)
    events.append(("swap", a, b))
    return events


def _pick(rng: np.random.Generator, items: list):
    return items[int(rng.integers(len(items)))]


class _Generator:
    """One generation run; holds the sampling state for Algorithm-style emission."""

    def __init__(
        self,
        device: DeviceGraph,
        sets: PositionSets,
        assignment: QubitAssignment,
        rng: np.random.Generator,
        method: str,
    ):
        self.device = device
        self.sets = sets
        self.rng = rng
        self.method = method
        self.state = VcgState(device, sets)
        self.tracker = AssignmentTracker(assignment)
        self.red = RedundancyTracker()
        self.param_slot = 0
        self.cycles = 0
        self.link_cycle: dict[int, int] = {}
        self.local_ordered = sorted(
            (c, t)
            for a, b in sets.local_pairs
            for c, t in ((a, b), (b, a))
        )
        self.swap_sorted = sorted(sets.swap_pairs)
        self.tg_sorted = sorted(sets.telegate_pairs)
        self.td_sorted = sorted(sets.teledata_pairs)
        self.both_sorted = sorted(sets.telegate_pairs | sets.teledata_pairs)

    def _nonempty(self, q: int) -> bool:
        return not self.tracker.is_empty(q)

    def _wires(self, *qs: int) -> tuple[int, ...]:
        return tuple(self.tracker.wire(q) for q in qs)

    def draw(self, gate_dist: Sequence[float], p_nonlocal: float) -> Gate | None:
        kind = GATE_KINDS[int(self.rng.choice(3, p=gate_dist))]
        if kind == U:
            return self._draw_u()
        if kind == CNOT:
            if self.rng.random() > p_nonlocal:
                return self._draw_local_cnot()
            return self._draw_nonlocal()
        return self._draw_swap()

    def _draw_u(self) -> Gate | None:
        nonempty = [q for q in self.device.data_qubits if self._nonempty(q)]
        if not nonempty:
            return None
        q = _pick(self.rng, nonempty)
        wires = self._wires(q)
        if self.red.is_redundant(U, (q,), wires):
            return None
        return Gate(kind=U, qubits=(q,), wires=wires, param_slot=self.param_slot)

    def _draw_local_cnot(self) -> Gate | None:
        cands = [
            (c, t) for c, t in self.local_ordered if self._nonempty(c) and self._nonempty(t)
        ]
        if not cands:
            return None
        c, t = _pick(self.rng, cands)
        wires = self._wires(c, t)
        if self.red.is_redundant(CNOT, (c, t), wires):
            return None
        return Gate(kind=CNOT, qubits=(c, t), wires=wires)

    def _draw_swap(self) -> Gate | None:
        cands = [
            (a, b) for a, b in self.swap_sorted if self._nonempty(a) or self._nonempty(b)
        ]
        if not cands:
            return None
        a, b = _pick(self.rng, cands)
        wires = tuple(self.tracker.wire(q) for q in (a, b) if self._nonempty(q))
        if self.red.is_redundant(SWAP, (a, b), wires):
            return None
        return Gate(kind=SWAP, qubits=(a, b), wires=wires)

    def _draw_nonlocal(self) -> Gate | None:
        if self.method == METHOD_TELEGATE:
            pool = self.tg_sorted
        elif self.method == METHOD_TELEDATA:
            pool = self.td_sorted
        else:
            pool = self.both_sorted
        cands = [(c, t) for c, t in pool if self._nonempty(c) and self._nonempty(t)]
        if not cands:
            return None
        c, t = _pick(self.rng, cands)
        wires = self._wires(c, t)
        if self.red.is_redundant(CNOT, (c, t), wires):
            return None
        in_tg = self.method != METHOD_TELEDATA and (c, t) in self.sets.telegate_pairs
        in_td = self.method != METHOD_TELEGATE and (c, t) in self.sets.teledata_pairs
        if in_tg:
            if self.state.is_active_edge(c, t):
                return self._reuse_gate(c, t, wires)
            routes = teledata_routes(self.state, self.tracker, c, t) if in_td else []
            if routes and self.rng.random() < 0.5:
                return self._teledata_gate(c, t, wires, routes)
            return self._telegate_gate(c, t, wires)
        routes = teledata_routes(self.state, self.tracker, c, t)
        if not routes:
            return None
        return self._teledata_gate(c, t, wires, routes)

    def _reuse_gate(self, c: int, t: int, wires: tuple[int, int]) -> Gate:
        idx = next(
            i
            for i in range(len(self.state.links))
            if self.state.link_owner[i] == c and t in self.state.link_targets[i]
        )
        near = self.state.link_near[idx]
        a, b = self.state.links[idx]
        far = b if near == a else a
        return Gate(
            kind=CNOT,
            qubits=(c, t),
            wires=wires,
            nonlocal_kind=TELEGATE,
            cycle=self.link_cycle[idx],
            link=(near, far),
            opened=False,
        )

    def _telegate_gate(self, c: int, t: int, wires: tuple[int, int]) -> Gate | None:
        links = self.state.links_for_control(c, t)
        if not links:
            return None
        idx = _pick(self.rng, links)
        near, far = self.state.near_far(idx, c)
        gate = Gate(
            kind=CNOT,
            qubits=(c, t),
            wires=wires,
            nonlocal_kind=TELEGATE,
            cycle=self.cycles,
            link=(near, far),
            opened=True,
        )
        self.link_cycle[idx] = self.cycles
        return gate

    def _teledata_gate(
        self, c: int, t: int, wires: tuple[int, int], routes: list[tuple[int, int, int]]
    ) -> Gate:
        movers = sorted({m for m, _, _ in routes})
        mover = _pick(self.rng, movers)
        mover, idx, landing = _pick(self.rng, [r for r in routes if r[0] == mover])
        near, far = self.state.near_far(idx, mover)
        return Gate(
            kind=CNOT,
            qubits=(c, t),
            wires=wires,
            nonlocal_kind=TELEDATA,
            cycle=self.cycles,
            link=(near, far),
            mover=mover,
            landing=landing,
        )

    def emit(self, gate: Gate) -> None:
        replay_gate(self.state, self.tracker, gate)
        self.red.record(gate)
        if gate.kind == U:
            self.param_slot += 3
        if gate.nonlocal_kind == TELEDATA or (gate.nonlocal_kind == TELEGATE and gate.opened):
            self.cycles += 1


def generate(
    device: DeviceGraph,
    n_gates: int,
    gate_dist: Sequence[float],
    p_nonlocal: float,
    method: str,
    n_logical: int,
    rng: np.random.Generator,
    *,
    sets: PositionSets | None = None,
    seed: int = -1,
    max_rejects: int = DEFAULT_MAX_REJECTS,
) -> Circuit:
    """Generate one distributed circuit of exactly ``n_gates`` gates.

    ``gate_dist`` is the (U, CNOT, SWAP) mix; ``p_nonlocal`` the chance a
    CNOT draw goes nonlocal; ``method`` one of telegate/teledata/both. The
    logical-to-data placement is sampled per circuit from ``rng``, making
    placements part of the search space. Deterministic given inputs and rng
    state; ``seed`` is recorded in the circuit metadata only.
    """
    gate_dist = tuple(float(p) for p in gate_dist)
    if len(gate_dist) != 3 or any(p < 0 for p in gate_dist) or abs(sum(gate_dist) - 1.0) > 1e-9:
        raise GenerationError(f"gate mix must be 3 probabilities summing to 1, got {gate_dist}")
    if not 0.0 <= p_nonlocal <= 1.0:
        raise GenerationError(f"p_nonlocal must lie in [0, 1], got {p_nonlocal}")
    if method not in METHODS:
        raise GenerationError(f"method must be one of {METHODS}, got {method!r}")
    if n_gates < 0:
        raise GenerationError("n_gates must be nonnegative")

    sets = sets if sets is not None else derive_position_sets(device)
    assignment = sample_assignment(device, n_logical, rng)
    gen = _Generator(device, sets, assignment, rng, method)
    gates: list[Gate] = []
    rejects = 0
    while len(gates) < n_gates:
        gate = gen.draw(gate_dist, p_nonlocal)
        if gate is None:
            rejects += 1
            if rejects >= max_rejects:
                raise GenerationError(
                    f"no legal gate found after {max_rejects} consecutive draws "
                    f"({len(gates)}/{n_gates} gates placed)"
                )
            continue
        rejects = 0
        gen.emit(gate)
        gates.append(gate)

    return Circuit(
        gates=tuple(gates),
        n_logical=n_logical,
        n_params=gen.param_slot,
        ebits=gen.state.ebits,
        assignment=assignment,
        final_assignment=gen.tracker.snapshot(),
        device_hash=device_hash(device),
        meta=GenMeta(seed=seed, gate_mix=gate_dist, p_nonlocal=float(p_nonlocal), method=method),
    )
