"""Model of a multi-QPU system: qubits, couplings, quantum links, qubit assignment.

A device is an undirected graph over qubits. Couplings connect qubits on the
same QPU; links connect communication qubits on different QPUs and are the
only channel for inter-QPU entanglement. Data qubits hold logical qubits,
communication qubits never do.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

ROLE_DATA = "data"
ROLE_COMM = "communication"

_QUBIT_KEYS = {"id", "role", "qpu"}
_TOP_KEYS = {"qubits", "couplings", "links"}


class DeviceError(ValueError):
    """Raised for malformed or inconsistent device descriptions."""


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class DeviceGraph:
    """Validated topology of a distributed quantum computing system.

    ``couplings`` and ``links`` hold undirected edges as sorted id pairs.
    """

    roles: dict[int, str]
    qpu_of: dict[int, int]
    couplings: frozenset[tuple[int, int]]
    links: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        self._validate()

    @cached_property
    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.roles))

    @cached_property
    def data_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in self.qubits if self.roles[q] == ROLE_DATA)

    @cached_property
    def comm_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in self.qubits if self.roles[q] == ROLE_COMM)

    @cached_property
    def link_list(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.links))

    @cached_property
    def _coupling_adj(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {q: set() for q in self.qubits}
        for a, b in self.couplings:
            adj[a].add(b)
            adj[b].add(a)
        return {q: frozenset(s) for q, s in adj.items()}

    def coupling_neighbors(self, q: int) -> frozenset[int]:
        """Neighbors of ``q`` through intra-QPU couplings only."""
        return self._coupling_adj[q]

    def has_coupling(self, a: int, b: int) -> bool:
        return _pair(a, b) in self.couplings

    def is_data(self, q: int) -> bool:
        return self.roles[q] == ROLE_DATA

    def _validate(self) -> None:
        ids = set(self.roles)
        if not ids:
            raise DeviceError("device has no qubits")
        if set(self.qpu_of) != ids:
            raise DeviceError("qpu map does not cover exactly the declared qubits")
        for q, role in self.roles.items():
            if role not in (ROLE_DATA, ROLE_COMM):
                raise DeviceError(f"qubit {q}: unknown role {role!r}")
        for a, b in self.couplings:
            if a == b:
                raise DeviceError(f"coupling ({a},{b}) is a self-loop")
            if a not in ids or b not in ids:
                raise DeviceError(f"coupling ({a},{b}) references unknown qubit")
            if self.qpu_of[a] != self.qpu_of[b]:
                raise DeviceError(f"coupling ({a},{b}) crosses QPUs")
        for a, b in self.links:
            if a not in ids or b not in ids:
                raise DeviceError(f"link ({a},{b}) references unknown qubit")
            if self.roles[a] != ROLE_COMM or self.roles[b] != ROLE_COMM:
                raise DeviceError(f"link ({a},{b}) must join two communication qubits")
            if self.qpu_of[a] == self.qpu_of[b]:
                raise DeviceError(f"link ({a},{b}) must join different QPUs")
        for q in self.qubits:
            if self.roles[q] != ROLE_DATA:
                continue
            comm = [n for n in self._coupling_adj_raw(q) if self.roles[n] == ROLE_COMM]
            if len(comm) > 1:
                raise DeviceError(
                    f"data qubit {q} touches {len(comm)} communication qubits; at most one allowed"
                )

    def _coupling_adj_raw(self, q: int) -> list[int]:
        # used during validation, before cached properties are safe to build
        out = []
        for a, b in self.couplings:
            if a == q:
                out.append(b)
            elif b == q:
                out.append(a)
        return out


def load_device(config_text: str) -> DeviceGraph:
    """Parse and validate a device description.

    Format (JSON): ``{"qubits": [{"id", "role", "qpu"}, ...],
    "couplings": [[a, b], ...], "links": [[a, b], ...]}`` with roles
    ``"data"`` or ``"communication"``. Unknown keys are rejected.
    """
    try:
        raw = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise DeviceError(f"invalid device config: {exc}") from exc
    if not isinstance(raw, dict):
        raise DeviceError("device config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise DeviceError(f"unknown device config keys: {sorted(unknown)}")
    roles: dict[int, str] = {}
    qpu_of: dict[int, int] = {}
    for entry in raw.get("qubits", []):
        if not isinstance(entry, dict):
            raise DeviceError("each qubit entry must be an object")
        extra = set(entry) - _QUBIT_KEYS
        if extra:
            raise DeviceError(f"unknown qubit keys: {sorted(extra)}")
        try:
            qid = int(entry["id"])
            role = str(entry["role"])
            qpu = int(entry["qpu"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DeviceError(f"malformed qubit entry {entry!r}") from exc
        if qid in roles:
            raise DeviceError(f"duplicate qubit id {qid}")
        roles[qid] = role
        qpu_of[qid] = qpu

    def edge_set(key: str) -> frozenset[tuple[int, int]]:
        out = set()
        for item in raw.get(key, []):
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise DeviceError(f"{key} entries must be pairs, got {item!r}")
            out.add(_pair(int(item[0]), int(item[1])))
        return frozenset(out)

    return DeviceGraph(
        roles=roles,
        qpu_of=qpu_of,
        couplings=edge_set("couplings"),
        links=edge_set("links"),
    )


def device_to_text(device: DeviceGraph) -> str:
    """Canonical serialization; ``load_device(device_to_text(d))`` round-trips."""
    doc = {
        "qubits": [
            {"id": q, "role": device.roles[q], "qpu": device.qpu_of[q]}
            for q in device.qubits
        ],
        "couplings": [list(p) for p in sorted(device.couplings)],
        "links": [list(p) for p in sorted(device.links)],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def device_hash(device: DeviceGraph) -> str:
    return hashlib.sha256(device_to_text(device).encode()).hexdigest()[:16]


def default_device() -> DeviceGraph:
    """Two 5-qubit bow-tie QPUs joined by one quantum link.

    QPU 0: data q0..q3, communication q4 (neighbors q2, q3).
    QPU 1: data q6..q9, communication q5 (neighbors q6, q7).
    """
    roles = {q: ROLE_DATA for q in range(10)}
    roles[4] = ROLE_COMM
    roles[5] = ROLE_COMM
    qpu_of = {q: (0 if q <= 4 else 1) for q in range(10)}
    couplings = frozenset(
        [
            (0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4),
            (5, 6), (5, 7), (6, 7), (7, 8), (7, 9), (8, 9),
        ]
    )
    return DeviceGraph(roles=roles, qpu_of=qpu_of, couplings=couplings, links=frozenset([(4, 5)]))


@dataclass(frozen=True)
class QubitAssignment:
    """Injective placement of logical qubits onto data qubits.

    ``logical_to_qubit[w]`` is the data qubit holding logical wire ``w``;
    ``empty`` holds the data qubits left unassigned.
    """

    logical_to_qubit: dict[int, int]
    empty: frozenset[int]

    def __post_init__(self) -> None:
        image = list(self.logical_to_qubit.values())
        if len(set(image)) != len(image):
            raise DeviceError("assignment is not injective")
        if set(image) & self.empty:
            raise DeviceError("assignment image overlaps the empty set")

    @property
    def n_logical(self) -> int:
        return len(self.logical_to_qubit)

    @cached_property
    def qubit_to_logical(self) -> dict[int, int]:
        return {q: w for w, q in self.logical_to_qubit.items()}

    def data_qubits(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.logical_to_qubit.values()) | self.empty))

    def to_dict(self) -> dict:
        return {
            "map": {str(w): q for w, q in sorted(self.logical_to_qubit.items())},
            "empty": sorted(self.empty),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QubitAssignment":
        return cls(
            logical_to_qubit={int(w): int(q) for w, q in d["map"].items()},
            empty=frozenset(int(q) for q in d["empty"]),
        )

    @classmethod
    def trivial(cls, n: int, n_total: int | None = None) -> "QubitAssignment":
        """Identity placement on qubits 0..n-1 (for hand-built circuits)."""
        total = n if n_total is None else n_total
        return cls(
            logical_to_qubit={w: w for w in range(n)},
            empty=frozenset(range(n, total)),
        )


def sample_assignment(device: DeviceGraph, n_logical: int, rng: np.random.Generator) -> QubitAssignment:
    """Draw a uniform random injective logical-to-data placement."""
    data = device.data_qubits
    if n_logical > len(data):
        raise DeviceError(
            f"cannot place {n_logical} logical qubits on {len(data)} data qubits"
        )
    chosen = rng.choice(len(data), size=n_logical, replace=False)
    mapping = {w: data[i] for w, i in enumerate(chosen)}
    empty = frozenset(data) - set(mapping.values())
    return QubitAssignment(logical_to_qubit=mapping, empty=empty)


class AssignmentTracker:
    """Mutable view of an assignment as relocations move logical qubits around."""

    def __init__(self, assignment: QubitAssignment):
        self.wire_of: dict[int, int] = dict(assignment.qubit_to_logical)
        self.empty: set[int] = set(assignment.empty)

    def is_empty(self, q: int) -> bool:
        return q in self.empty

    def wire(self, q: int) -> int:
        return self.wire_of[q]

    def relocate(self, src: int, dst: int) -> None:
        """Move the logical qubit on ``src`` to the empty qubit ``dst``."""
        if dst not in self.empty:
            raise DeviceError(f"relocation target {dst} is not empty")
        if src in self.empty:
            raise DeviceError(f"relocation source {src} is empty")
        self.wire_of[dst] = self.wire_of.pop(src)
        self.empty.discard(dst)
        self.empty.add(src)

    def snapshot(self) -> QubitAssignment:
        return QubitAssignment(
            logical_to_qubit={w: q for q, w in self.wire_of.items()},
            empty=frozenset(self.empty),
        )
