"""Sparse multilinear polynomials over {0,1} variables.

Monomials are canonical sorted tuples of distinct variable indices
(``x**2 == x`` is applied when terms are inserted), the constant term is
keyed by the empty tuple, and zero coefficients are never stored.
Coefficients stay exact Python ints whenever the inputs are integral.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Sequence

from .errors import DomainError

Monomial = tuple[int, ...]


class BinaryPolynomial:
    """Multilinear polynomial p(x) = sum over monomials of coeff * prod(x_i)."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[Monomial, float] | None = None):
        if num_vars < 0:
            raise DomainError(f"num_vars must be >= 0, got {num_vars}")
        self.num_vars = num_vars
        self.terms: dict[Monomial, float] = {}
        if terms:
            for mono, coeff in terms.items():
                self.add_term(mono, coeff)

    def add_term(self, variables: Iterable[int], coeff):
        """Accumulate ``coeff`` on the monomial of ``variables`` (multilinear)."""
        if coeff == 0:
            return
        mono = tuple(sorted(set(variables)))
        for v in mono:
            if not 0 <= v < self.num_vars:
                raise DomainError(f"variable index {v} outside [0, {self.num_vars})")
        new = self.terms.get(mono, 0) + coeff
        if new == 0:
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = new

    def add_polynomial(self, other: "BinaryPolynomial", scale=1):
        for mono, coeff in other.terms.items():
            self.add_term(mono, coeff * scale)

    def multiply(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        out = BinaryPolynomial(max(self.num_vars, other.num_vars))
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out.add_term(set(m1) | set(m2), c1 * c2)
        return out

    def scaled(self, factor) -> "BinaryPolynomial":
        return BinaryPolynomial(
            self.num_vars, {m: c * factor for m, c in self.terms.items()}
        )

    def evaluate(self, x: Sequence[int]):
        if len(x) != self.num_vars:
            raise DomainError(f"expected {self.num_vars} bits, got {len(x)}")
        total = 0
        for mono, coeff in self.terms.items():
            if all(x[v] for v in mono):
                total += coeff
        return total

    @property
    def constant(self):
        return self.terms.get((), 0)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def copy(self) -> "BinaryPolynomial":
        return BinaryPolynomial(self.num_vars, self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryPolynomial)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        return f"BinaryPolynomial(num_vars={self.num_vars}, terms={len(self.terms)})"

    def to_dict(self) -> dict:
        return {
            "n_vars": self.num_vars,
            "terms": [
                {"vars": list(mono), "c": coeff}
                for mono, coeff in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BinaryPolynomial":
        if "n_vars" not in data or "terms" not in data:
            raise DomainError("polynomial JSON requires 'n_vars' and 'terms'")
        poly = cls(data["n_vars"])
        for i, entry in enumerate(data["terms"]):
            if "vars" not in entry or "c" not in entry:
                raise DomainError(f"terms[{i}] must carry 'vars' and 'c'")
            poly.add_term(entry["vars"], entry["c"])
        return poly


def eval_binary(p: BinaryPolynomial, x: Sequence[int]):
    """Evaluate ``p`` on a bit vector."""
    return p.evaluate(x)


def save_polynomial(p: BinaryPolynomial, path: str):
    with open(path, "w") as fh:
        json.dump(p.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_polynomial(path: str) -> BinaryPolynomial:
    with open(path) as fh:
        return BinaryPolynomial.from_dict(json.load(fh))
