"""Device parsing, validation, serialization and assignment sampling."""

import json

import numpy as np
import pytest

from dqas.device import (
    AssignmentTracker,
    DeviceError,
    QubitAssignment,
    default_device,
    device_to_text,
    load_device,
    sample_assignment,
)

FIG_CONFIG = {
    "qubits": [
        {"id": 0, "role": "data", "qpu": 0},
        {"id": 1, "role": "data", "qpu": 0},
        {"id": 2, "role": "data", "qpu": 0},
        {"id": 3, "role": "data", "qpu": 0},
        {"id": 4, "role": "communication", "qpu": 0},
        {"id": 5, "role": "communication", "qpu": 1},
        {"id": 6, "role": "data", "qpu": 1},
        {"id": 7, "role": "data", "qpu": 1},
        {"id": 8, "role": "data", "qpu": 1},
        {"id": 9, "role": "data", "qpu": 1},
    ],
    "couplings": [
        [0, 1], [0, 2], [1, 2], [2, 3], [2, 4], [3, 4],
        [5, 6], [5, 7], [6, 7], [7, 8], [7, 9], [8, 9],
    ],
    "links": [[4, 5]],
}


def test_two_qpu_config_loads():
    device = load_device(json.dumps(FIG_CONFIG))
    assert len(device.data_qubits) == 8
    assert device.comm_qubits == (4, 5)
    assert device.coupling_neighbors(5) == frozenset({6, 7})
    assert device.coupling_neighbors(4) >= {2, 3}
    assert device == default_device()


def test_single_qpu_no_links_loads(single_qpu_device):
    assert single_qpu_device.link_list == ()
    assert len(single_qpu_device.data_qubits) == 4


def test_link_on_data_qubit_rejected():
    bad = json.loads(json.dumps(FIG_CONFIG))
    bad["links"] = [[0, 5]]
    with pytest.raises(DeviceError, match="communication"):
        load_device(json.dumps(bad))


def test_coupling_across_qpus_rejected():
    bad = json.loads(json.dumps(FIG_CONFIG))
    bad["couplings"].append([3, 6])
    with pytest.raises(DeviceError, match="crosses"):
        load_device(json.dumps(bad))


def test_data_qubit_with_two_comm_neighbors_rejected():
    bad = json.loads(json.dumps(FIG_CONFIG))
    bad["qubits"][3]["role"] = "communication"  # qubit 3, besides 4, now touches 2
    with pytest.raises(DeviceError, match="at most one"):
        load_device(json.dumps(bad))


def test_unknown_keys_rejected():
    bad = dict(FIG_CONFIG, extra=1)
    with pytest.raises(DeviceError, match="unknown"):
        load_device(json.dumps(bad))
    bad = json.loads(json.dumps(FIG_CONFIG))
    bad["qubits"][0]["color"] = "red"
    with pytest.raises(DeviceError, match="unknown"):
        load_device(json.dumps(bad))


def test_malformed_text_rejected():
    with pytest.raises(DeviceError):
        load_device("not json {")
    with pytest.raises(DeviceError):
        load_device(json.dumps({"qubits": [{"id": 0}]}))


def test_serialization_round_trips_bit_exactly():
    text = device_to_text(load_device(json.dumps(FIG_CONFIG)))
    assert device_to_text(load_device(text)) == text


def test_assignment_saturating(two_qpu_device):
    a = sample_assignment(two_qpu_device, 8, np.random.default_rng(0))
    assert a.empty == frozenset()
    assert sorted(a.logical_to_qubit.values()) == list(two_qpu_device.data_qubits)


def test_assignment_partial(two_qpu_device):
    a = sample_assignment(two_qpu_device, 6, np.random.default_rng(1))
    assert len(a.empty) == 2
    assert len(set(a.logical_to_qubit.values())) == 6


def test_assignment_too_many_logical(two_qpu_device):
    with pytest.raises(DeviceError):
        sample_assignment(two_qpu_device, 9, np.random.default_rng(0))


def test_assignment_always_injective_into_data(two_qpu_device):
    data = set(two_qpu_device.data_qubits)
    for seed in range(200):
        a = sample_assignment(two_qpu_device, 5, np.random.default_rng(seed))
        image = list(a.logical_to_qubit.values())
        assert len(set(image)) == 5
        assert set(image) <= data
        assert a.empty == data - set(image)


def test_assignment_deterministic(two_qpu_device):
    a = sample_assignment(two_qpu_device, 6, np.random.default_rng(42))
    b = sample_assignment(two_qpu_device, 6, np.random.default_rng(42))
    assert a.logical_to_qubit == b.logical_to_qubit


def test_assignment_rejects_non_injective():
    with pytest.raises(DeviceError):
        QubitAssignment(logical_to_qubit={0: 1, 1: 1}, empty=frozenset())


def test_tracker_relocation():
    a = QubitAssignment(logical_to_qubit={0: 2, 1: 3}, empty=frozenset({7}))
    tracker = AssignmentTracker(a)
    tracker.relocate(2, 7)
    assert tracker.is_empty(2)
    assert tracker.wire(7) == 0
    snap = tracker.snapshot()
    assert snap.logical_to_qubit == {0: 7, 1: 3}
    assert snap.empty == frozenset({2})
    with pytest.raises(DeviceError):
        tracker.relocate(3, 3)
