"""Circuit representation: gates on physical data qubits with resolved wires.

Gates record both the physical data-qubit positions they were placed on and
the logical wires they act on in simulation. A SWAP with an empty participant
is a pure relocation: it occupies two physical positions but touches no
logical wire (``wires`` is empty), and a state-teleport CNOT carries its
route (link orientation, mover, landing) so the physical sequence can be
replayed exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .device import QubitAssignment

U = "U"
CNOT = "CNOT"
SWAP = "SWAP"

TELEGATE = "telegate"
TELEDATA = "teledata"


class CircuitError(ValueError):
    """Raised for malformed gates or circuits."""


@dataclass(frozen=True)
class Gate:
    """One gate: kind, physical positions, logical wires, nonlocal annotations.

    ``param_slot`` indexes the first of three consecutive angles for a U gate.
    For nonlocal CNOTs, ``cycle`` identifies the ebit cycle, ``link`` is the
    (near, far) comm-qubit orientation used, ``opened`` marks a gate whose
    cat-entangler started a new cycle, and ``mover``/``landing`` describe a
    teleported relocation.
    """

    kind: str
    qubits: tuple[int, ...]
    wires: tuple[int, ...]
    param_slot: int | None = None
    nonlocal_kind: str | None = None
    cycle: int | None = None
    link: tuple[int, int] | None = None
    opened: bool = False
    mover: int | None = None
    landing: int | None = None

    def __post_init__(self) -> None:
        if self.kind == U:
            if len(self.qubits) != 1 or self.param_slot is None:
                raise CircuitError(f"U gate needs 1 position and a param slot: {self}")
        elif self.kind in (CNOT, SWAP):
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise CircuitError(f"{self.kind} needs 2 distinct positions: {self}")
        else:
            raise CircuitError(f"unknown gate kind {self.kind!r}")

    @property
    def is_relocation(self) -> bool:
        """True for a SWAP that moves a logical qubit into an empty slot."""
        return self.kind == SWAP and len(self.wires) < 2

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "qubits": list(self.qubits), "wires": list(self.wires)}
        if self.param_slot is not None:
            d["param_slot"] = self.param_slot
        if self.nonlocal_kind is not None:
            d.update(nonlocal_kind=self.nonlocal_kind, cycle=self.cycle, link=list(self.link))
            if self.nonlocal_kind == TELEGATE:
                d["opened"] = self.opened
            else:
                d.update(mover=self.mover, landing=self.landing)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(
            kind=d["kind"],
            qubits=tuple(d["qubits"]),
            wires=tuple(d["wires"]),
            param_slot=d.get("param_slot"),
            nonlocal_kind=d.get("nonlocal_kind"),
            cycle=d.get("cycle"),
            link=tuple(d["link"]) if d.get("link") is not None else None,
            opened=d.get("opened", False),
            mover=d.get("mover"),
            landing=d.get("landing"),
        )


@dataclass(frozen=True)
class GenMeta:
    """Provenance of a generated circuit: inputs that reproduce it exactly."""

    seed: int
    gate_mix: tuple[float, float, float]
    p_nonlocal: float
    method: str

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "gate_mix": list(self.gate_mix),
            "p_nonlocal": self.p_nonlocal,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenMeta":
        return cls(
            seed=int(d["seed"]),
            gate_mix=tuple(d["gate_mix"]),
            p_nonlocal=float(d["p_nonlocal"]),
            method=str(d["method"]),
        )


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list with parameter count, ebit cost and placement."""

    gates: tuple[Gate, ...]
    n_logical: int
    n_params: int
    ebits: int
    assignment: QubitAssignment
    final_assignment: QubitAssignment
    device_hash: str = ""
    meta: GenMeta | None = None

    def __len__(self) -> int:
        return len(self.gates)

    def data_qubits(self) -> tuple[int, ...]:
        return self.assignment.data_qubits()

    def count_ebits(self) -> int:
        """Recount ebits from gate annotations (one per cycle or teleport)."""
        cycles = {g.cycle for g in self.gates if g.nonlocal_kind == TELEGATE}
        teleports = sum(1 for g in self.gates if g.nonlocal_kind == TELEDATA)
        return len(cycles) + teleports

    def to_text(self) -> str:
        doc = {
            "format": "dqas-circuit/1",
            "device_hash": self.device_hash,
            "n_logical": self.n_logical,
            "n_params": self.n_params,
            "ebits": self.ebits,
            "assignment": self.assignment.to_dict(),
            "final_assignment": self.final_assignment.to_dict(),
            "meta": self.meta.to_dict() if self.meta else None,
            "gates": [g.to_dict() for g in self.gates],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        doc = json.loads(text)
        if doc.get("format") != "dqas-circuit/1":
            raise CircuitError(f"unsupported circuit format {doc.get('format')!r}")
        return cls(
            gates=tuple(Gate.from_dict(g) for g in doc["gates"]),
            n_logical=int(doc["n_logical"]),
            n_params=int(doc["n_params"]),
            ebits=int(doc["ebits"]),
            assignment=QubitAssignment.from_dict(doc["assignment"]),
            final_assignment=QubitAssignment.from_dict(doc["final_assignment"]),
            device_hash=doc.get("device_hash", ""),
            meta=GenMeta.from_dict(doc["meta"]) if doc.get("meta") else None,
        )

    @classmethod
    def from_ops(cls, n_wires: int, ops: list[tuple[str, tuple[int, ...]]]) -> "Circuit":
        """Build a plain local circuit on dense wires 0..n_wires-1 (tests, ansatz building)."""
        gates = []
        slot = 0
        for kind, pos in ops:
            pos = tuple(pos)
            if any(p >= n_wires or p < 0 for p in pos):
                raise CircuitError(f"position {pos} outside 0..{n_wires - 1}")
            if kind == U:
                gates.append(Gate(kind=U, qubits=pos, wires=pos, param_slot=slot))
                slot += 3
            else:
                gates.append(Gate(kind=kind, qubits=pos, wires=pos))
        assignment = QubitAssignment.trivial(n_wires)
        return cls(
            gates=tuple(gates),
            n_logical=n_wires,
            n_params=slot,
            ebits=0,
            assignment=assignment,
            final_assignment=assignment,
        )


def layered_ansatz(n_wires: int, layers: int) -> Circuit:
    """Hardware-efficient ladder: per layer, a U on every wire then a CNOT ring."""
    ops: list[tuple[str, tuple[int, ...]]] = []
    for _ in range(layers):
        ops += [(U, (w,)) for w in range(n_wires)]
        ops += [(CNOT, (w, (w + 1) % n_wires)) for w in range(n_wires)]
    return Circuit.from_ops(n_wires, ops)
