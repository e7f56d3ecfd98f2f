"""Spin-model builders, the file format, and the exact diagonalization oracle."""

import numpy as np
import pytest

from dqas.hamiltonians import (
    HamiltonianError,
    PauliHamiltonian,
    build_heisenberg,
    build_tfim,
    exact_ground_energy,
    load_hamiltonian,
)

# frozen from dense diagonalization of the 64x64 matrices
TFIM6_GROUND = -7.72740661031254
HEISENBERG6_GROUND = -11.211102550927983


def kron_word(word: str) -> np.ndarray:
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.array([[1, 0], [0, -1]]),
    }
    out = np.eye(1)
    for ch in word:
        out = np.kron(out, mats[ch])
    return out


def test_tfim_term_counts():
    assert len(build_tfim(6, True).terms) == 12
    assert len(build_tfim(3, False).terms) == 5
    with pytest.raises(HamiltonianError):
        build_tfim(1)


def test_tfim_two_site_periodic_merges_bond():
    h = build_tfim(2, True)
    coeffs = dict((w, c) for c, w in h.terms)
    assert coeffs["ZZ"] == pytest.approx(2.0)
    dense = h.to_dense()
    oracle = 2.0 * kron_word("ZZ") + kron_word("XI") + kron_word("IX")
    assert np.allclose(dense, oracle)


def test_heisenberg_counts_and_weights():
    h = build_heisenberg(6, True)
    assert len(h.terms) == 24
    assert all(c == pytest.approx(1.0) for c, _ in h.terms)


def test_heisenberg_dense_matches_kron_oracle():
    h = build_heisenberg(4, True)
    oracle = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        j = (i + 1) % 4
        for p in "XYZ":
            word = "".join(p if k in (i, j) else "I" for k in range(4))
            oracle += kron_word(word)
        oracle += kron_word("".join("Z" if k == i else "I" for k in range(4)))
    assert np.allclose(h.to_dense(), oracle)


def test_load_basic_format():
    h = load_hamiltonian("1.0 ZZIIII\n0.5 XIIIII\n")
    assert h.n == 6
    assert len(h.terms) == 2


def test_load_merges_duplicates():
    h = load_hamiltonian("0.3 ZIIIII\n# comment line\n0.3 ZIIIII\n")
    assert h.terms == ((0.6, "ZIIIII"),)


def test_load_rejects_bad_input():
    with pytest.raises(HamiltonianError, match="lengths"):
        load_hamiltonian("1.0 ZZ\n1.0 XXX\n")
    with pytest.raises(HamiltonianError, match="coefficient"):
        load_hamiltonian("abc ZZ\n")
    with pytest.raises(HamiltonianError, match="characters"):
        load_hamiltonian("1.0 ZQ\n")
    with pytest.raises(HamiltonianError):
        load_hamiltonian("# nothing\n")


def test_dense_matrices_are_hermitian():
    for h in (build_tfim(5, True), build_heisenberg(4, False),
              load_hamiltonian("0.5 XY\n-0.25 YZ\n1.5 ZI\n")):
        dense = h.to_dense()
        assert np.max(np.abs(dense - dense.conj().T)) < 1e-12


def test_single_qubit_ground_energy():
    assert exact_ground_energy(PauliHamiltonian.build([(1.0, "Z")])) == pytest.approx(-1.0)


def test_frozen_ground_energies():
    assert exact_ground_energy(build_tfim(6, True)) == pytest.approx(TFIM6_GROUND, abs=1e-9)
    assert exact_ground_energy(build_heisenberg(6, True)) == pytest.approx(
        HEISENBERG6_GROUND, abs=1e-9
    )


def test_ground_energy_order_invariant():
    h = build_heisenberg(5, True)
    shuffled = PauliHamiltonian.build(list(h.terms)[::-1])
    assert exact_ground_energy(h) == pytest.approx(exact_ground_energy(shuffled), abs=1e-12)


def test_sparse_path_agrees_with_dense():
    h = build_tfim(9, True)  # n > 8 goes through the Lanczos path
    dense_min = float(np.linalg.eigvalsh(PauliHamiltonian.build(list(h.terms)).to_dense())[0])
    assert exact_ground_energy(h) == pytest.approx(dense_min, rel=1e-9)
