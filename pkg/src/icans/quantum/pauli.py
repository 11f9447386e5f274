"""Pauli-sum observables and qubit-wise commuting measurement groups.

Qubit 0 is the leftmost character of a Pauli word and the most significant
bit of a computational-basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DENSE_QUBIT_CAP = 6

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S_DAG = np.diag([1, -1j]).astype(complex)

# Single-qubit unitaries V with V P V^dag = Z, so a Z readout after V measures P.
BASIS_CHANGE = {
    "I": np.eye(2, dtype=complex),
    "Z": np.eye(2, dtype=complex),
    "X": _HADAMARD,
    "Y": _HADAMARD @ _S_DAG,
}


def bit_table(n_qubits: int) -> np.ndarray:
    """Return a (2**n, n) array of basis-index bits, qubit 0 most significant."""
    idx = np.arange(2**n_qubits)
    shifts = n_qubits - 1 - np.arange(n_qubits)
    return (idx[:, None] >> shifts[None, :]) & 1


def pauli_action(word: str) -> tuple[np.ndarray, np.ndarray]:
    """Permutation and phase such that ``(P psi)[y] = phase[y] * psi[perm[y]]``."""
    n = len(word)
    bits = bit_table(n)
    flip = 0
    for q, ch in enumerate(word):
        if ch in "XY":
            flip |= 1 << (n - 1 - q)
    perm = np.arange(2**n) ^ flip
    src_bits = bits[perm]
    phase = np.ones(2**n, dtype=complex)
    for q, ch in enumerate(word):
        b = src_bits[:, q]
        if ch == "Z":
            phase *= 1 - 2 * b
        elif ch == "Y":
            # Y|0> = i|1>, Y|1> = -i|0>
            phase *= 1j * (1 - 2 * b)
    return perm, phase


@dataclass(frozen=True)
class MeasurementGroup:
    """Qubit-wise commuting terms read out together in one circuit execution.

    ``values[k]`` is the summed contribution of the group's terms when the
    rotated register is read out as basis index ``k``.
    """

    basis: str
    term_indices: tuple[int, ...]
    values: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class PauliObservable:
    """Real-weighted sum of Pauli words in canonical (merged) form."""

    n_qubits: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        for coeff, word in self.terms:
            if len(word) != self.n_qubits:
                raise ValueError(f"word {word!r} does not have length {self.n_qubits}")
            if set(word) - set("IXYZ"):
                raise ValueError(f"word {word!r} has characters outside IXYZ")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, str]], n_qubits: int | None = None):
        """Build a canonical observable, merging duplicate words in first-seen order."""
        merged: dict[str, float] = {}
        for coeff, word in terms:
            word = word.upper()
            merged[word] = merged.get(word, 0.0) + float(coeff)
        if n_qubits is None:
            if not merged:
                raise ValueError("n_qubits is required for an empty observable")
            n_qubits = len(next(iter(merged)))
        return cls(n_qubits, tuple((c, w) for w, c in merged.items()))

    @classmethod
    def zero_projector(cls, n_qubits: int) -> "PauliObservable":
        """|0...0><0...0| = prod_q (I + Z_q)/2 expanded into 2**n Z-type words."""
        weight = 2.0**-n_qubits
        terms = []
        for bits in bit_table(n_qubits):
            terms.append((weight, "".join("Z" if b else "I" for b in bits)))
        return cls.from_terms(terms, n_qubits)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def words(self) -> list[str]:
        return [w for _, w in self.terms]

    def coefficient_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def scaled(self, factor: float) -> "PauliObservable":
        return PauliObservable(self.n_qubits, tuple((factor * c, w) for c, w in self.terms))

    def __add__(self, other: "PauliObservable") -> "PauliObservable":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return PauliObservable.from_terms(self.terms + other.terms, self.n_qubits)

    def __neg__(self) -> "PauliObservable":
        return self.scaled(-1.0)

    def __sub__(self, other: "PauliObservable") -> "PauliObservable":
        return self + (-other)

    @classmethod
    def identity(cls, n_qubits: int, coeff: float = 1.0) -> "PauliObservable":
        return cls(n_qubits, ((float(coeff), "I" * n_qubits),))

    def to_matrix(self) -> np.ndarray:
        dim = 2**self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for coeff, word in self.terms:
            out += coeff * reduce(np.kron, [PAULI_MATRICES[ch] for ch in word], np.eye(1))
        return out

    def groupings(self) -> list[MeasurementGroup]:
        """Greedy qubit-wise commuting partition of the terms.

        Identity terms carry no measurement and are folded into the first
        group as a constant offset.
        """
        return _groupings(self)


def _compatible(basis: list[str], word: str) -> bool:
    return all(b == "I" or w == "I" or b == w for b, w in zip(basis, word))


def _groupings(obs: PauliObservable) -> list[MeasurementGroup]:
    n = obs.n_qubits
    bases: list[list[str]] = []
    members: list[list[int]] = []
    identity_terms = []
    for t, (_, word) in enumerate(obs.terms):
        if set(word) == {"I"}:
            identity_terms.append(t)
            continue
        for basis, mem in zip(bases, members):
            if _compatible(basis, word):
                for q, ch in enumerate(word):
                    if ch != "I":
                        basis[q] = ch
                mem.append(t)
                break
        else:
            bases.append(list(word))
            members.append([t])
    if not bases:
        bases.append(["I"] * n)
        members.append([])
    members[0] = identity_terms + members[0]

    bits = bit_table(n)
    signs = 1 - 2 * bits
    groups = []
    for basis, mem in zip(bases, members):
        values = np.zeros(2**n)
        for t in mem:
            coeff, word = obs.terms[t]
            support = [q for q, ch in enumerate(word) if ch != "I"]
            values += coeff * np.prod(signs[:, support], axis=1)
        groups.append(MeasurementGroup("".join(basis), tuple(mem), values))
    return groups


def eigen_bounds(obs: PauliObservable, max_qubits: int = DENSE_QUBIT_CAP) -> tuple[float, float]:
    """Exact (lambda_min, lambda_max) by dense diagonalization."""
    if obs.n_qubits > max_qubits:
        raise ValueError(
            f"observable on {obs.n_qubits} qubits exceeds the dense cap of {max_qubits}"
        )
    evals = np.linalg.eigvalsh(obs.to_matrix())
    return float(evals[0]), float(evals[-1])


def pauli_words_commute_qubitwise(words: Sequence[str]) -> bool:
    basis = ["I"] * len(words[0])
    for w in words:
        if not _compatible(basis, w):
            return False
        basis = [w[q] if w[q] != "I" else basis[q] for q in range(len(w))]
    return True
