"""Pauli-sum Hamiltonians: spin-model builders, file loading, exact ground energy.

Strings are words over I/X/Y/Z with position i acting on qubit i. Qubit 0 is
the most significant bit of the basis index, matching the statevector layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DENSE_LIMIT = 14


class HamiltonianError(ValueError):
    """Raised for malformed Hamiltonian specifications."""


def _merge(terms: list[tuple[float, str]]) -> tuple[tuple[float, str], ...]:
    acc: dict[str, float] = {}
    for coeff, word in terms:
        acc[word] = acc.get(word, 0.0) + coeff
    return tuple((c, w) for w, c in sorted(acc.items()))


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted sum of Pauli words; duplicate words are merged on build."""

    terms: tuple[tuple[float, str], ...]
    n: int

    @classmethod
    def build(cls, terms: list[tuple[float, str]]) -> "PauliHamiltonian":
        if not terms:
            raise HamiltonianError("empty Hamiltonian")
        lengths = {len(word) for _, word in terms}
        if len(lengths) != 1:
            raise HamiltonianError(f"inconsistent Pauli string lengths: {sorted(lengths)}")
        n = lengths.pop()
        for coeff, word in terms:
            if not np.isfinite(coeff):
                raise HamiltonianError(f"non-finite coefficient {coeff!r}")
            bad = set(word) - set("IXYZ")
            if bad:
                raise HamiltonianError(f"invalid Pauli characters {sorted(bad)} in {word!r}")
        return cls(terms=_merge(terms), n=n)

    def to_dense(self) -> np.ndarray:
        """Full 2^n x 2^n matrix; the ground-truth construction for tests."""
        if self.n > 12:
            raise HamiltonianError(f"dense matrix too large for n={self.n}")
        dim = 2**self.n
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, word in self.terms:
            m = np.ones((1, 1), dtype=complex)
            for ch in word:
                m = np.kron(m, _PAULI[ch])
            out += coeff * m
        return out

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        out = None
        for coeff, word in self.terms:
            m = scipy.sparse.identity(1, dtype=complex, format="csr")
            for ch in word:
                m = scipy.sparse.kron(m, scipy.sparse.csr_matrix(_PAULI[ch]), format="csr")
            out = coeff * m if out is None else out + coeff * m
        return out


def _word(n: int, ops: dict[int, str]) -> str:
    return "".join(ops.get(i, "I") for i in range(n))


def build_tfim(n: int, periodic: bool = True) -> PauliHamiltonian:
    """Transverse-field Ising chain: sum of Z_i Z_{i+1} and X_i, unit weights."""
    if n < 2:
        raise HamiltonianError("TFIM needs at least 2 qubits")
    terms = []
    bonds = n if periodic else n - 1
    for i in range(bonds):
        terms.append((1.0, _word(n, {i: "Z", (i + 1) % n: "Z"})))
    for i in range(n):
        terms.append((1.0, _word(n, {i: "X"})))
    return PauliHamiltonian.build(terms)


def build_heisenberg(n: int, periodic: bool = True) -> PauliHamiltonian:
    """Heisenberg chain with field: X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1} + Z_i."""
    if n < 2:
        raise HamiltonianError("Heisenberg model needs at least 2 qubits")
    terms = []
    bonds = n if periodic else n - 1
    for i in range(bonds):
        j = (i + 1) % n
        for p in "XYZ":
            terms.append((1.0, _word(n, {i: p, j: p})))
    for i in range(n):
        terms.append((1.0, _word(n, {i: "Z"})))
    return PauliHamiltonian.build(terms)


def load_hamiltonian(file_text: str) -> PauliHamiltonian:
    """Parse ``<coefficient> <pauli_word>`` lines; ``#`` starts a comment."""
    terms: list[tuple[float, str]] = []
    for lineno, raw in enumerate(file_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianError(f"line {lineno}: expected '<coefficient> <pauli_word>'")
        try:
            coeff = float(parts[0])
        except ValueError as exc:
            raise HamiltonianError(f"line {lineno}: bad coefficient {parts[0]!r}") from exc
        terms.append((coeff, parts[1].upper()))
    return PauliHamiltonian.build(terms)


def exact_ground_energy(h: PauliHamiltonian) -> float:
    """Minimum eigenvalue by exact diagonalization (dense small, Lanczos larger)."""
    if h.n > DENSE_LIMIT:
        raise HamiltonianError(f"exact diagonalization limited to n <= {DENSE_LIMIT}")
    if h.n <= 8:
        return float(np.linalg.eigvalsh(h.to_dense())[0])
    vals = scipy.sparse.linalg.eigsh(h.to_sparse(), k=1, which="SA", return_eigenvectors=False)
    return float(vals[0])


class CompiledPauliSum:
    """Fast H|psi> application via per-term bit masks and phase tables."""

    def __init__(self, h: PauliHamiltonian):
        self.n = h.n
        dim = 2**h.n
        idx = np.arange(dim)
        self.flips: list[int] = []
        self.phases: list[np.ndarray] = []
        for coeff, word in h.terms:
            flip = 0
            zy = 0
            n_y = 0
            for w, ch in enumerate(word):
                bit = 1 << (h.n - 1 - w)  # qubit 0 is the most significant bit
                if ch in "XY":
                    flip |= bit
                if ch in "ZY":
                    zy |= bit
                if ch == "Y":
                    n_y += 1
            parity = _popcount(idx & zy) & 1
            phase = coeff * (1j**n_y) * np.where(parity, -1.0, 1.0)
            self.flips.append(flip)
            self.phases.append(phase.astype(complex))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """H @ psi for a flat (..., 2^n) array, acting on the last axis."""
        idx = np.arange(psi.shape[-1])
        out = np.zeros_like(psi)
        for flip, phase in zip(self.flips, self.phases):
            src = idx ^ flip
            out += phase[src] * psi[..., src]
        return out


def _popcount(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    x = arr.copy()
    while x.any():
        out += x & 1
        x >>= 1
    return out
