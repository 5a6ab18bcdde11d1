"""Oversampling arithmetic under an independent two-qubit-error model."""

from __future__ import annotations

import math

from .errors import DomainError


def p_good(error_rate: float, gate_count: int) -> float:
    """Probability a shot sees zero two-qubit errors: (1 - e)^G."""
    if not 0 < error_rate < 1:
        raise DomainError(f"error rate must lie in (0, 1), got {error_rate}")
    if gate_count < 0:
        raise DomainError(f"gate count must be >= 0, got {gate_count}")
    return (1 - error_rate) ** gate_count


def required_shots(error_rate: float, gate_count: int, good_samples: int) -> int:
    """Shots needed so that roughly ``good_samples`` are error-free."""
    if good_samples < 1:
        raise DomainError(f"good sample target must be >= 1, got {good_samples}")
    good = p_good(error_rate, gate_count)
    if good == 0.0:
        raise DomainError(
            f"zero-error probability underflows for e={error_rate}, G={gate_count}"
        )
    return math.ceil(good_samples / good)
