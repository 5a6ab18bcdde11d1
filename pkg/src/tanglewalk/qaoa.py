"""Warm-started linear-ramp QAOA simulation and the iterative bias-update loop.

One iteration prepares a product state from per-qubit bit-flip
probabilities, applies p alternating layers of the diagonal cost phase
and a rotated single-qubit mixer (for which the product state is an
eigenstate), samples the exact output distribution, keeps the best
fraction of shots, and feeds an energy-weighted Z expectation back into
the next iteration's bit-flip probabilities.

The simulation is an exact dense statevector; widths are capped so a
single state fits comfortably in memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, SizeCapError
from .ising import IsingPolynomial, diagonal

STATEVECTOR_QUBIT_CAP = 26
CLIP_EPSILON = 0.15
FEEDBACK_TEMPERATURE_START = 0.015
FEEDBACK_TEMPERATURE_END = 0.045


@dataclass(frozen=True)
class QaoaSchedule:
    """Fixed linear-ramp parameters: betas descend, gammas ascend."""

    p: int
    betas: tuple[float, ...]
    gammas: tuple[float, ...]
    dbeta: float
    dgamma: float


def lr_schedule(p: int, dbeta: float, dgamma: float) -> QaoaSchedule:
    """beta_k = (1 - (2k-1)/2p) * dbeta and gamma_k = ((2k-1)/2p) * dgamma."""
    if p < 1:
        raise DomainError(f"layer count p must be >= 1, got {p}")
    ramp = [(2 * k - 1) / (2 * p) for k in range(1, p + 1)]
    betas = tuple((1 - r) * dbeta for r in ramp)
    gammas = tuple(r * dgamma for r in ramp)
    return QaoaSchedule(p, betas, gammas, dbeta, dgamma)


def initial_prior(kind: str, layout) -> np.ndarray:
    """Per-qubit bit-flip probabilities before the first iteration.

    QUBO layouts are one-hot per step, so each bit starts at 1/(2N);
    HUBO layouts start unbiased at 1/2.
    """
    if kind == "qubo":
        return np.full(layout.num_vars, 1.0 / (2 * layout.N))
    if kind == "hubo":
        return np.full(layout.num_vars, 0.5)
    raise DomainError(f"unknown encoding kind {kind!r}")


def _mixer_matrix(beta: float, phi: float) -> np.ndarray:
    # Ry(phi) . Rz(-2 beta) . Ry(-phi): the rotated mixer exponential.
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    rz = np.array([[np.exp(1j * beta), 0], [0, np.exp(-1j * beta)]], dtype=complex)
    return ry @ rz @ ry.conj().T


def _apply_single_qubit(state: np.ndarray, gate: np.ndarray, qubit: int, n: int):
    view = state.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    lo = view[:, 0, :].copy()
    hi = view[:, 1, :]
    view[:, 0, :] = gate[0, 0] * lo + gate[0, 1] * hi
    view[:, 1, :] = gate[1, 0] * lo + gate[1, 1] * hi


def simulate(
    h: IsingPolynomial,
    prior: Sequence[float],
    schedule: QaoaSchedule,
    qubit_cap: int = STATEVECTOR_QUBIT_CAP,
    energies: np.ndarray | None = None,
) -> np.ndarray:
    """Exact output distribution of one warm-started LR-QAOA circuit.

    Returns |amplitude|^2 over all 2^n basis states.  ``energies`` may be
    passed to reuse a precomputed cost diagonal.
    """
    n = h.num_qubits
    if n > qubit_cap:
        raise SizeCapError(f"{n} qubits exceeds statevector cap {qubit_cap}")
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (n,):
        raise DomainError(f"prior must have {n} entries, got shape {prior.shape}")
    if np.any(prior < 0) or np.any(prior > 1):
        raise DomainError("prior probabilities must lie in [0, 1]")
    if energies is None:
        energies = diagonal(h, qubit_cap)

    phi = 2 * np.arcsin(np.sqrt(prior))
    state = np.ones(1, dtype=complex)
    for q in range(n):
        amp = np.array([np.cos(phi[q] / 2), np.sin(phi[q] / 2)], dtype=complex)
        state = np.kron(amp, state)

    for beta, gamma in zip(schedule.betas, schedule.gammas):
        state *= np.exp(-1j * gamma * energies)
        for q in range(n):
            _apply_single_qubit(state, _mixer_matrix(beta, phi[q]), q, n)
    return np.abs(state) ** 2


@dataclass
class SampleBatch:
    """Multiset of measured basis states with energies attached.

    Distinct outcomes are stored index-sorted; multiplicities sum to the
    shot count.
    """

    num_qubits: int
    indices: np.ndarray
    counts: np.ndarray
    energies: np.ndarray
    shots: int
    iteration: int = 0

    def bit_matrix(self) -> np.ndarray:
        cols = np.arange(self.num_qubits, dtype=np.uint64)
        return ((self.indices[:, None] >> cols) & 1).astype(np.int8)

    def records(self) -> list[tuple[tuple[int, ...], float, int]]:
        bits = self.bit_matrix()
        return [
            (tuple(int(b) for b in bits[i]), float(self.energies[i]), int(self.counts[i]))
            for i in range(len(self.indices))
        ]

    @property
    def min_energy(self) -> float:
        if len(self.energies) == 0:
            raise DomainError("empty batch has no minimum energy")
        return float(self.energies.min())


def sample(
    probs: np.ndarray, shots: int, seed, energies: np.ndarray, iteration: int = 0
) -> SampleBatch:
    """Multinomial draw from an exact distribution, deterministic in the seed."""
    if shots < 0:
        raise DomainError(f"shots must be >= 0, got {shots}")
    probs = np.asarray(probs, dtype=float)
    n = int(np.log2(len(probs)))
    if 1 << n != len(probs):
        raise DomainError("probability vector length must be a power of two")
    if shots == 0:
        empty = np.array([], dtype=np.uint64)
        return SampleBatch(n, empty, empty.astype(np.int64), empty.astype(float), 0, iteration)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs / probs.sum())
    hit = np.nonzero(counts)[0]
    return SampleBatch(
        num_qubits=n,
        indices=hit.astype(np.uint64),
        counts=counts[hit].astype(np.int64),
        energies=np.asarray(energies, dtype=float)[hit],
        shots=shots,
        iteration=iteration,
    )


def cvar_filter(batch: SampleBatch, alpha: float) -> SampleBatch:
    """Keep the ceil(alpha * shots) lowest-energy shots.

    Ties at the cutoff are broken by ascending basis-state index so
    repeated runs retain the same shots.
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if batch.shots == 0:
        return batch
    keep = int(np.ceil(alpha * batch.shots))
    order = np.lexsort((batch.indices, batch.energies))
    kept_counts = np.zeros_like(batch.counts)
    remaining = keep
    for pos in order:
        if remaining <= 0:
            break
        take = min(int(batch.counts[pos]), remaining)
        kept_counts[pos] = take
        remaining -= take
    hit = np.nonzero(kept_counts)[0]
    return SampleBatch(
        num_qubits=batch.num_qubits,
        indices=batch.indices[hit],
        counts=kept_counts[hit],
        energies=batch.energies[hit],
        shots=keep,
        iteration=batch.iteration,
    )


def beta_t(
    iteration: int,
    j_max: int = 5,
    start: float = FEEDBACK_TEMPERATURE_START,
    end: float = FEEDBACK_TEMPERATURE_END,
) -> float:
    """Feedback inverse temperature: quadratic ramp between the endpoints."""
    if iteration < 1:
        raise DomainError(f"iteration must be >= 1, got {iteration}")
    if j_max <= 1:
        return start
    frac = (iteration - 1) / (j_max - 1)
    return start + (end - start) * frac**2


def update_prior(
    batch: SampleBatch,
    feedback_beta: float,
    epsilon: float = CLIP_EPSILON,
    shift_energies: bool = False,
) -> np.ndarray:
    """Energy-weighted bit-flip probabilities for the next iteration.

    Samples are weighted by exp(-beta_T * E^2); the weighted Z expectation
    per qubit gives p_i = (1 - <Z_i>)/2, clipped to [epsilon, 1-epsilon]
    to keep exploring.  Energies enter as-is unless ``shift_energies``
    subtracts the batch minimum first.
    """
    if batch.shots == 0 or len(batch.indices) == 0:
        raise DomainError("cannot update prior from an empty batch")
    energies = batch.energies
    if shift_energies:
        energies = energies - energies.min()
    log_w = -feedback_beta * energies**2
    weights = batch.counts * np.exp(log_w - log_w.max())
    probs = weights / weights.sum()
    z = probs @ (1 - 2 * batch.bit_matrix())
    return np.clip((1 - z) / 2, epsilon, 1 - epsilon)


@dataclass(frozen=True)
class RunConfig:
    """Knobs for one iterative run; seeds make reruns bit-identical."""

    p: int
    dbeta: float
    dgamma: float
    shots: int
    alpha: float = 1.0
    iterations: int = 5
    seed: int = 0
    epsilon: float = CLIP_EPSILON
    target_energy: float | None = None
    shift_energies: bool = False
    qubit_cap: int = STATEVECTOR_QUBIT_CAP

    def validate(self):
        if self.p < 1:
            raise DomainError("p must be >= 1")
        if self.shots < 1:
            raise DomainError("shots must be >= 1")
        if not 0 < self.alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    feedback_beta: float
    prior: tuple[float, ...]
    histogram: tuple[tuple[float, int], ...]
    best_energy: float
    best_index: int
    kept_shots: int


@dataclass
class RunRecord:
    """Full trace of an iterative run; best-so-far never increases."""

    kind: str
    config: RunConfig
    iterations: list[IterationRecord] = field(default_factory=list)
    best_energy: float = float("inf")
    best_index: int = -1
    best_bits: tuple[int, ...] = ()
    optimum_iteration: int | None = None
    termination: str = ""
    decoded_walk: dict | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": {
                "p": self.config.p,
                "dbeta": self.config.dbeta,
                "dgamma": self.config.dgamma,
                "shots": self.config.shots,
                "alpha": self.config.alpha,
                "iterations": self.config.iterations,
                "seed": self.config.seed,
                "epsilon": self.config.epsilon,
                "target_energy": self.config.target_energy,
            },
            "iterations": [
                {
                    "iteration": rec.iteration,
                    "feedback_beta": rec.feedback_beta,
                    "prior": list(rec.prior),
                    "histogram": [[e, c] for e, c in rec.histogram],
                    "best_energy": rec.best_energy,
                    "best_index": rec.best_index,
                    "kept_shots": rec.kept_shots,
                }
                for rec in self.iterations
            ],
            "best_energy": self.best_energy,
            "best_index": self.best_index,
            "best_bits": list(self.best_bits),
            "optimum_iteration": self.optimum_iteration,
            "termination": self.termination,
            "decoded_walk": self.decoded_walk,
        }


def _histogram(batch: SampleBatch) -> tuple[tuple[float, int], ...]:
    hist: dict[float, int] = {}
    for energy, count in zip(batch.energies, batch.counts):
        hist[float(energy)] = hist.get(float(energy), 0) + int(count)
    return tuple(sorted(hist.items()))


def _bits_of(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> q) & 1 for q in range(n))


def iterative_qaoa(
    h: IsingPolynomial,
    kind: str,
    config: RunConfig,
    layout=None,
    prior: np.ndarray | None = None,
    decoder: Callable[[tuple[int, ...]], dict] | None = None,
) -> RunRecord:
    """Run the full feedback loop: simulate, sample, filter, update.

    ``prior`` overrides the layout-derived initial distribution.  When
    ``config.target_energy`` is set, the loop halts as soon as any shot
    reaches it.  ``decoder`` (bits -> dict) fills ``decoded_walk`` for
    the best assignment seen.
    """
    config.validate()
    if prior is None:
        if layout is None:
            raise DomainError("either a layout or an explicit prior is required")
        prior = initial_prior(kind, layout)
    prior = np.asarray(prior, dtype=float)
    schedule = lr_schedule(config.p, config.dbeta, config.dgamma)
    energies = diagonal(h, config.qubit_cap)
    seeds = np.random.SeedSequence(config.seed).spawn(config.iterations)

    record = RunRecord(kind=kind, config=config)
    termination = "max_iterations"
    for j in range(1, config.iterations + 1):
        probs = simulate(h, prior, schedule, config.qubit_cap, energies=energies)
        batch = sample(probs, config.shots, seeds[j - 1], energies, iteration=j)
        kept = cvar_filter(batch, config.alpha)
        fb = beta_t(j, config.iterations)

        iteration_best = int(batch.indices[int(np.argmin(batch.energies))])
        if batch.min_energy < record.best_energy:
            record.best_energy = batch.min_energy
            record.best_index = iteration_best
            record.best_bits = _bits_of(iteration_best, h.num_qubits)
        record.iterations.append(
            IterationRecord(
                iteration=j,
                feedback_beta=fb,
                prior=tuple(float(p) for p in prior),
                histogram=_histogram(batch),
                best_energy=batch.min_energy,
                best_index=iteration_best,
                kept_shots=kept.shots,
            )
        )
        if (
            config.target_energy is not None
            and record.optimum_iteration is None
            and batch.min_energy <= config.target_energy
        ):
            record.optimum_iteration = j
            termination = "optimum_sampled"
            break
        prior = update_prior(kept, fb, config.epsilon, config.shift_energies)
    record.termination = termination
    if decoder is not None and record.best_index >= 0:
        record.decoded_walk = decoder(record.best_bits)
    return record


def p_opt(probs: np.ndarray, optimal_indices: Iterable[int]) -> float:
    """Probability mass the distribution assigns to the optimal set."""
    probs = np.asarray(probs, dtype=float)
    return float(sum(probs[int(i)] for i in set(optimal_indices)))


def sweep(
    h: IsingPolynomial,
    prior: np.ndarray,
    grid: Iterable[tuple[float, float]],
    p_values: Iterable[int],
    qubit_cap: int = STATEVECTOR_QUBIT_CAP,
) -> list[tuple[int, float, float, float]]:
    """Evaluate p_opt over a (dbeta, dgamma) grid for each circuit depth.

    The optimal set is the argmin of the cost diagonal.  Rows come back
    sorted by (p, dbeta, dgamma) regardless of input order.
    """
    energies = diagonal(h, qubit_cap)
    optimal = set(np.flatnonzero(energies == energies.min()).tolist())
    rows = []
    for p in sorted(set(p_values)):
        for dbeta, dgamma in sorted(set(grid)):
            probs = simulate(h, prior, lr_schedule(p, dbeta, dgamma), qubit_cap, energies=energies)
            rows.append((p, dbeta, dgamma, p_opt(probs, optimal)))
    return rows
