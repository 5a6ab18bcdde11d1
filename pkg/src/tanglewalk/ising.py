"""Diagonal Pauli-Z Hamiltonians obtained from binary polynomials.

Convention used everywhere in the package: qubit i corresponds to index
bit i (LSB first), bit value 0 maps to Z eigenvalue +1 and bit value 1
to -1.  Substituting x_i -> (1 - Z_i)/2 turns a multilinear binary
polynomial into a Z-term list whose computational-basis energies
reproduce the binary cost exactly (dyadic-rational arithmetic).
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DomainError, SizeCapError
from .polynomials import BinaryPolynomial, Monomial

DIAGONAL_QUBIT_CAP = 26


class IsingPolynomial:
    """constant + sum over qubit sets S of coeff_S * prod_{i in S} Z_i."""

    __slots__ = ("num_qubits", "terms", "constant")

    def __init__(self, num_qubits: int, terms=None, constant=0.0):
        if num_qubits < 0:
            raise DomainError(f"num_qubits must be >= 0, got {num_qubits}")
        self.num_qubits = num_qubits
        self.constant = constant
        self.terms: dict[Monomial, float] = {}
        if terms:
            for qubits, coeff in dict(terms).items():
                self.add_term(qubits, coeff)

    def add_term(self, qubits, coeff):
        if coeff == 0:
            return
        key = tuple(sorted(set(qubits)))
        if not key:
            self.constant += coeff
            return
        for q in key:
            if not 0 <= q < self.num_qubits:
                raise DomainError(f"qubit index {q} outside [0, {self.num_qubits})")
        new = self.terms.get(key, 0) + coeff
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IsingPolynomial)
            and self.num_qubits == other.num_qubits
            and self.terms == other.terms
            and self.constant == other.constant
        )

    def __repr__(self) -> str:
        return (
            f"IsingPolynomial(num_qubits={self.num_qubits}, "
            f"terms={len(self.terms)}, constant={self.constant})"
        )

    def to_dict(self) -> dict:
        return {
            "n_vars": self.num_qubits,
            "constant": self.constant,
            "terms": [
                {"vars": list(mono), "c": coeff}
                for mono, coeff in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IsingPolynomial":
        h = cls(data["n_vars"], constant=data.get("constant", 0))
        for entry in data["terms"]:
            h.add_term(entry["vars"], entry["c"])
        return h


def to_ising(p: BinaryPolynomial) -> IsingPolynomial:
    """Substitute x_i -> (1 - Z_i)/2 and collect Z terms.

    Each degree-d binary monomial expands into 2^d Z terms with
    coefficients coeff / 2^d, signed by the subset parity.
    """
    h = IsingPolynomial(p.num_vars)
    for mono, coeff in p.terms.items():
        d = len(mono)
        base = coeff / (2**d) if d else coeff
        for r in range(d + 1):
            sign = -1 if r % 2 else 1
            for subset in combinations(mono, r):
                h.add_term(subset, sign * base)
    return h


def ising_energy(h: IsingPolynomial, x: Sequence[int]) -> float:
    """Energy of a computational-basis state given as a bit vector."""
    if len(x) != h.num_qubits:
        raise DomainError(f"expected {h.num_qubits} bits, got {len(x)}")
    total = h.constant
    for qubits, coeff in h.terms.items():
        z = 1
        for q in qubits:
            z *= 1 - 2 * x[q]
        total += coeff * z
    return total


def diagonal(h: IsingPolynomial, qubit_cap: int = DIAGONAL_QUBIT_CAP) -> np.ndarray:
    """Vector of all 2^n basis energies, index bit i = value of qubit i."""
    n = h.num_qubits
    if n > qubit_cap:
        raise SizeCapError(f"diagonal of {n} qubits exceeds cap {qubit_cap}")
    idx = np.arange(1 << n, dtype=np.uint64)
    energies = np.full(1 << n, float(h.constant))
    for qubits, coeff in h.terms.items():
        mask = np.uint64(sum(1 << q for q in qubits))
        parity = (np.bitwise_count(idx & mask) & 1).astype(np.int64)
        energies += coeff * (1 - 2 * parity)
    return energies
