"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from dqas.device import ROLE_COMM, ROLE_DATA, DeviceGraph, default_device
from dqas.vcg import derive_position_sets


@pytest.fixture(scope="session")
def two_qpu_device() -> DeviceGraph:
    return default_device()


@pytest.fixture(scope="session")
def two_qpu_sets(two_qpu_device):
    return derive_position_sets(two_qpu_device)


@pytest.fixture(scope="session")
def single_qpu_device() -> DeviceGraph:
    roles = {q: ROLE_DATA for q in range(4)}
    return DeviceGraph(
        roles=roles,
        qpu_of={q: 0 for q in range(4)},
        couplings=frozenset([(0, 1), (1, 2), (2, 3), (0, 2)]),
        links=frozenset(),
    )


def random_device(rng: np.random.Generator) -> DeviceGraph:
    """Random valid device with at most 12 qubits and one comm qubit per QPU."""
    n_qpus = int(rng.integers(1, 4))
    roles: dict[int, str] = {}
    qpu_of: dict[int, int] = {}
    couplings: set[tuple[int, int]] = set()
    comm: list[int] = []
    nid = 0
    for qpu in range(n_qpus):
        size = int(rng.integers(2, 5))
        ids = list(range(nid, nid + size))
        nid += size
        for q in ids:
            roles[q] = ROLE_DATA
            qpu_of[q] = qpu
        for i in range(1, size):
            j = int(rng.integers(0, i))
            couplings.add((ids[j], ids[i]))
        for _ in range(int(rng.integers(0, size))):
            a, b = rng.choice(size, size=2, replace=False)
            pair = (ids[min(a, b)], ids[max(a, b)])
            couplings.add(pair)
        if n_qpus > 1:
            pick = ids[int(rng.integers(size))]
            roles[pick] = ROLE_COMM
            comm.append(pick)
    links: set[tuple[int, int]] = set()
    if len(comm) >= 2:
        for i in range(len(comm) - 1):
            links.add((min(comm[i], comm[i + 1]), max(comm[i], comm[i + 1])))
    return DeviceGraph(
        roles=roles, qpu_of=qpu_of, couplings=frozenset(couplings), links=frozenset(links)
    )


def oracle_position_sets(device: DeviceGraph):
    """Membership-predicate evaluation of the position-set definitions.

    Written pair-by-pair over all qubits, independent of the set-algebra
    implementation under test.
    """
    data = set(device.data_qubits)
    qubits = device.qubits

    def coupled(x, y):
        return x != y and (min(x, y), max(x, y)) in device.couplings

    local = {
        (a, b)
        for a in qubits
        for b in qubits
        if a < b and coupled(a, b) and a in data and b in data
    }

    def local_nbrs(x):
        return {y for y in qubits if (min(x, y), max(x, y)) in local and y != x}

    swap = {(a, b) for (a, b) in local if local_nbrs(a) - {b} != local_nbrs(b) - {a}}

    def nbrs(x):
        return {y for y in qubits if coupled(x, y)}

    def two_hop_data(x):
        reach = set()
        for y in nbrs(x):
            reach |= nbrs(y)
        return (reach & data) - {x}

    telegate: set[tuple[int, int]] = set()
    teledata: set[tuple[int, int]] = set()
    for link in device.links:
        for u, v in (link, link[::-1]):
            near = nbrs(u) & data
            far = nbrs(v) & data
            for c in near:
                for t in far:
                    telegate.add((c, t))
            for c in two_hop_data(u):
                for t in far:
                    teledata.add((c, t))
            for c in near:
                for t in two_hop_data(v):
                    teledata.add((c, t))
    return local, swap, telegate, teledata


def enumerate_paths(dag) -> int:
    """Exhaustive DFS walk of every source-to-sink path (no DP)."""
    adj = defaultdict(list)
    for u, v in dag.edges:
        adj[u].append(v)

    def walk(u: int) -> int:
        if u == dag.sink:
            return 1
        return sum(walk(v) for v in adj[u])

    return walk(dag.source)


def random_pool_circuit(device, rng, n_gates=None, method="telegate", n_logical=6):
    """One circuit drawn the way the search pipeline draws them."""
    from dqas.generation import GATE_MIX_CHOICES, P_NONLOCAL_CHOICES, generate

    mix = GATE_MIX_CHOICES[int(rng.integers(len(GATE_MIX_CHOICES)))]
    p_nl = P_NONLOCAL_CHOICES[int(rng.integers(len(P_NONLOCAL_CHOICES)))]
    if n_gates is None:
        n_gates = int(rng.integers(1, 21))
    return generate(device, n_gates, mix, p_nl, method, n_logical, rng)
