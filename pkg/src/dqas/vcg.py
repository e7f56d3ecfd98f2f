"""Virtual connectivity graph: static gate-position sets and dynamic link state.

The static sets say where each gate kind may be placed on data qubits. The
dynamic state tracks which quantum link is held by which control qubit (after
a cat-entangler) and the virtual edges that ownership grants. State changes
emit primitive operation events so a reference simulator can replay the exact
physical sequence, with mid-circuit measurements deferred into controlled
gates:

    ("bell", a, b)   distribute a fresh entangled pair on comm qubits a, b
    ("cnot", c, t)   CNOT, also the deferred conditional-X correction
    ("cz", a, b)     deferred conditional-Z correction
    ("h", q)         Hadamard
    ("u", q, slot)   parameterized single-qubit gate
    ("swap", a, b)   SWAP
"""

from __future__ import annotations

from dataclasses import dataclass

from .device import DeviceGraph

Event = tuple


class VcgError(ValueError):
    """Raised when a cat-entangler/teleport precondition is violated."""


@dataclass(frozen=True)
class PositionSets:
    """Permissible data-qubit positions for each gate placement category.

    ``local_pairs`` and ``swap_pairs`` are unordered (sorted) pairs;
    ``telegate_pairs`` and ``teledata_pairs`` are ordered (control, target).
    """

    local_pairs: frozenset[tuple[int, int]]
    swap_pairs: frozenset[tuple[int, int]]
    telegate_pairs: frozenset[tuple[int, int]]
    teledata_pairs: frozenset[tuple[int, int]]

    def dump(self) -> str:
        """Debug listing, one category per line."""
        lines = []
        for name in ("local_pairs", "swap_pairs", "telegate_pairs", "teledata_pairs"):
            pairs = ",".join(f"({a},{b})" for a, b in sorted(getattr(self, name)))
            lines.append(f"{name}: {pairs}")
        return "\n".join(lines) + "\n"


def derive_position_sets(device: DeviceGraph) -> PositionSets:
    """Compute the static permissible-position sets from the device graph.

    Local two-qubit positions are data-data couplings. SWAPs that leave both
    neighborhoods unchanged are dropped. Nonlocal positions pair the data
    neighbors of the two ends of each link: directly for the gate-teleport
    route, and widened by one coupling hop on the moving side for the
    state-teleport route (the moved qubit lands next to the far comm qubit,
    so its partner must be one hop from there).
    """
    data = set(device.data_qubits)
    local = frozenset(p for p in device.couplings if p[0] in data and p[1] in data)

    adj: dict[int, set[int]] = {q: set() for q in device.qubits}
    for a, b in local:
        adj[a].add(b)
        adj[b].add(a)
    swap = frozenset(
        (a, b) for a, b in local if (adj[a] - {b}) != (adj[b] - {a})
    )

    telegate: set[tuple[int, int]] = set()
    teledata: set[tuple[int, int]] = set()
    for link in device.links:
        for near, far in (link, link[::-1]):
            near_d = device.coupling_neighbors(near) & data
            far_d = device.coupling_neighbors(far) & data
            telegate |= {(c, t) for c in near_d for t in far_d}
            teledata |= {(c, t) for c in hop_of(device, near, data) for t in far_d}
            teledata |= {(c, t) for c in near_d for t in hop_of(device, far, data)}
    return PositionSets(
        local_pairs=local,
        swap_pairs=swap,
        telegate_pairs=frozenset(telegate),
        teledata_pairs=frozenset(teledata),
    )


def hop_of(device: DeviceGraph, comm: int, data: set[int]) -> set[int]:
    """Data qubits within two couplings of ``comm``, excluding ``comm``."""
    out: set[int] = set()
    for y in device.coupling_neighbors(comm):
        out |= device.coupling_neighbors(y)
    return (out & data) - {comm}


class VcgState:
    """Dynamic link occupancy, control modes and virtual edges.

    Single-owner mutable state for one generation or replay run. One ebit is
    charged when a link is consumed (cat-entangler or teleport); releasing a
    held link is free.
    """

    def __init__(self, device: DeviceGraph, sets: PositionSets | None = None):
        self.device = device
        self.sets = sets if sets is not None else derive_position_sets(device)
        self.links: tuple[tuple[int, int], ...] = device.link_list
        self.link_owner: list[int | None] = [None] * len(self.links)
        self.link_near: list[int | None] = [None] * len(self.links)
        self.link_targets: list[frozenset[int]] = [frozenset()] * len(self.links)
        self.ebits = 0

    # -- queries ----------------------------------------------------------

    def control_mode(self, q: int) -> bool:
        return any(owner == q for owner in self.link_owner)

    def owned_links(self, q: int) -> list[int]:
        return [i for i, owner in enumerate(self.link_owner) if owner == q]

    def virtual_edges(self) -> frozenset[tuple[int, int]]:
        edges = set()
        for i, owner in enumerate(self.link_owner):
            if owner is not None:
                edges |= {(owner, t) for t in self.link_targets[i]}
        return frozenset(edges)

    def is_active_edge(self, c: int, t: int) -> bool:
        return any(
            self.link_owner[i] == c and t in self.link_targets[i]
            for i in range(len(self.links))
        )

    def near_far(self, link_idx: int, side_qubit: int) -> tuple[int, int]:
        """Orient a link so the first endpoint shares a QPU with ``side_qubit``."""
        a, b = self.links[link_idx]
        qpu = self.device.qpu_of[side_qubit]
        if self.device.qpu_of[a] == qpu:
            return a, b
        if self.device.qpu_of[b] == qpu:
            return b, a
        raise VcgError(f"qubit {side_qubit} is on neither side of link {self.links[link_idx]}")

    def links_for_control(self, control: int, target: int) -> list[int]:
        """Links usable to drive a nonlocal CNOT from ``control`` to ``target``."""
        out = []
        for i in range(len(self.links)):
            try:
                near, far = self.near_far(i, control)
            except VcgError:
                continue
            if control in self.device.coupling_neighbors(near) and target in (
                self.device.coupling_neighbors(far)
            ):
                out.append(i)
        return out

    # -- transitions ------------------------------------------------------

    def cat_entangle(self, control: int, link_idx: int) -> list[Event]:
        """Put ``control`` in control mode over a link, releasing any holder.

        Grants virtual edges from ``control`` to every data neighbor of the
        far comm qubit and charges one ebit.
        """
        near, far = self.near_far(link_idx, control)
        if control not in self.device.coupling_neighbors(near) or not self.device.is_data(control):
            raise VcgError(f"qubit {control} is not a data neighbor of comm qubit {near}")
        events: list[Event] = []
        if self.link_owner[link_idx] is not None:
            events += self.release_link(link_idx)
        data = set(self.device.data_qubits)
        self.link_owner[link_idx] = control
        self.link_near[link_idx] = near
        self.link_targets[link_idx] = frozenset(self.device.coupling_neighbors(far) & data)
        self.ebits += 1
        events += [
            ("bell", near, far),
            ("cnot", control, near),
            ("cnot", near, far),
        ]
        return events

    def release_link(self, link_idx: int) -> list[Event]:
        """Cat-disentangle the holder of one link (no ebit charge)."""
        owner = self.link_owner[link_idx]
        if owner is None:
            raise VcgError(f"link {self.links[link_idx]} is not in use")
        near = self.link_near[link_idx]
        far = self.links[link_idx][0] if near == self.links[link_idx][1] else self.links[link_idx][1]
        self.link_owner[link_idx] = None
        self.link_near[link_idx] = None
        self.link_targets[link_idx] = frozenset()
        # deferred measurement of the far comm qubit plus cleanup back to |0>
        return [("h", far), ("cz", far, owner), ("h", far), ("h", near)]

    def cat_disentangle(self, control: int) -> list[Event]:
        """Take ``control`` out of control mode, releasing every link it holds."""
        owned = self.owned_links(control)
        if not owned:
            raise VcgError(f"qubit {control} is not in control mode")
        events: list[Event] = []
        for idx in owned:
            events += self.release_link(idx)
        return events

    def consume_for_teleport(self, link_idx: int, mover: int, landing: int) -> list[Event]:
        """Teleport ``mover`` across a link into ``landing``; one ebit.

        The link is released first if held. The moved state arrives on the
        far comm qubit and is swapped onto the landing qubit; the deferred
        corrections leave mover and both comm qubits back in |0>.
        """
        near, far = self.near_far(link_idx, mover)
        if mover not in self.device.coupling_neighbors(near) or not self.device.is_data(mover):
            raise VcgError(f"mover {mover} is not a data neighbor of comm qubit {near}")
        if landing not in self.device.coupling_neighbors(far) or not self.device.is_data(landing):
            raise VcgError(f"landing {landing} is not a data neighbor of comm qubit {far}")
        events: list[Event] = []
        if self.link_owner[link_idx] is not None:
            events += self.release_link(link_idx)
        self.ebits += 1
        events += [
            ("bell", near, far),
            ("cnot", mover, near),
            ("h", mover),
            ("cnot", near, far),
            ("cz", mover, far),
            ("h", mover),
            ("h", near),
            ("swap", far, landing),
        ]
        return events

    def check(self) -> None:
        """Assert internal consistency (used by property tests)."""
        for i, owner in enumerate(self.link_owner):
            if owner is None:
                assert self.link_targets[i] == frozenset()
                assert self.link_near[i] is None
            else:
                assert self.link_targets[i], "held link must grant virtual edges"
                assert self.link_near[i] in self.links[i]
                assert self.device.is_data(owner)
        assert self.ebits >= 0


def cat_entangle(state: VcgState, control: int, link_idx: int) -> VcgState:
    """Functional-style wrapper around :meth:`VcgState.cat_entangle`."""
    state.cat_entangle(control, link_idx)
    return state


def cat_disentangle(state: VcgState, control: int) -> VcgState:
    """Functional-style wrapper around :meth:`VcgState.cat_disentangle`."""
    state.cat_disentangle(control)
    return state
