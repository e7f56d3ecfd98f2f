"""Circuit DAG representation and exact source-to-sink path counting.

One global source and one global sink; every gate is a node, and each qubit
position a gate occupies contributes one incoming and one outgoing edge along
that position's wire. Parallel edges are kept distinct, so an empty circuit
on n wires has exactly n source-to-sink paths. Counts are exact Python
integers; they grow exponentially with the number of two-qubit gates.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from .circuits import Circuit


@dataclass(frozen=True)
class CircuitDag:
    """Directed acyclic multigraph with nodes 0 (source) .. n_nodes-1 (sink).

    ``edges`` lists (u, v) instances; repeats are genuine parallel edges.
    Node order (gate emission order) is already topological.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return self.n_nodes - 1


def build_dag(
    circuit: Circuit, n_wires: int, wire_map: Mapping[int, int] | None = None
) -> CircuitDag:
    """Build the wire-following DAG of a circuit.

    Gate positions are physical ids; ``wire_map`` translates them to dense
    wire indices below ``n_wires`` (identity by default). Each wire runs from
    the source through its gates to the sink.
    """
    last = [0] * n_wires  # most recent node on each wire; 0 is the source
    edges: list[tuple[int, int]] = []
    for i, gate in enumerate(circuit.gates):
        node = i + 1
        for q in gate.qubits:
            w = wire_map[q] if wire_map is not None else q
            if not 0 <= w < n_wires:
                raise ValueError(f"gate position {q} maps to wire {w} outside 0..{n_wires - 1}")
            edges.append((last[w], node))
            last[w] = node
    sink = len(circuit.gates) + 1
    for w in range(n_wires):
        edges.append((last[w], sink))
    return CircuitDag(n_nodes=sink + 1, edges=tuple(edges))


def count_paths(dag: CircuitDag) -> int:
    """Exact number of distinct source-to-sink paths (parallel edges distinct)."""
    counts = [0] * dag.n_nodes
    counts[dag.source] = 1
    # node ids are topologically ordered by construction
    for u, v in sorted(dag.edges, key=lambda e: e[0]):
        counts[v] += counts[u]
    return counts[dag.sink]
