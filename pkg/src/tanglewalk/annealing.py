"""Single-flip Metropolis annealer, used as a classical baseline."""

from __future__ import annotations

import math
import random

from .errors import DomainError
from .polynomials import BinaryPolynomial


def simulated_annealing(
    poly: BinaryPolynomial,
    steps: int = 2000,
    t_start: float = 5.0,
    t_end: float = 0.05,
    seed: int = 0,
) -> tuple[tuple[int, ...], float]:
    """Minimise a binary polynomial by single-flip Metropolis moves.

    The temperature follows a geometric schedule from ``t_start`` down to
    ``t_end``.  Returns the best assignment seen and its value; with
    ``steps == 0`` that is just the random initial assignment.
    """
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    if t_start <= 0 or t_end <= 0:
        raise DomainError("temperatures must be positive")
    rng = random.Random(seed)
    n = poly.num_vars
    x = [rng.randint(0, 1) for _ in range(n)]

    # Per-variable term index so a flip is O(terms touching the variable).
    touching: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(n)]
    for mono, coeff in poly.terms.items():
        for v in mono:
            touching[v].append((mono, coeff))

    def flip_delta(i: int) -> float:
        delta = 0
        for mono, coeff in touching[i]:
            if all(x[v] for v in mono if v != i):
                delta += coeff if not x[i] else -coeff
        return delta

    energy = poly.evaluate(x)
    best = list(x)
    best_energy = energy
    if n == 0 or steps == 0:
        return tuple(best), best_energy

    ratio = (t_end / t_start) ** (1 / max(steps - 1, 1))
    temperature = t_start
    for _ in range(steps):
        i = rng.randrange(n)
        delta = flip_delta(i)
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            x[i] ^= 1
            energy += delta
            if energy < best_energy:
                best_energy = energy
                best = list(x)
        temperature *= ratio
    return tuple(best), best_energy
