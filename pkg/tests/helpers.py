"""Independent oracles used by the tests.

Nothing here may call back into the production code paths it checks:
polynomial scans walk all assignments directly, and the circuit oracle
multiplies explicitly built dense matrices (scipy expm for the mixer).
"""

import numpy as np

try:
    from scipy.linalg import expm
except ImportError:  # pragma: no cover
    expm = None


def all_assignments(num_vars: int) -> np.ndarray:
    """(2^n, n) matrix of bit rows, LSB-first columns."""
    idx = np.arange(1 << num_vars)
    return ((idx[:, None] >> np.arange(num_vars)) & 1).astype(np.int8)


def brute_force_energies(poly) -> np.ndarray:
    """Evaluate a BinaryPolynomial on every assignment, index-aligned."""
    bits = all_assignments(poly.num_vars)
    values = np.zeros(1 << poly.num_vars)
    for mono, coeff in poly.terms.items():
        if mono:
            values += coeff * bits[:, list(mono)].prod(axis=1)
        else:
            values += coeff
    return values


def qubo_terms_direct(g, layout, lam1, lam2, x) -> float:
    """Unexpanded evaluation of the three QUBO contributions for one assignment."""
    one_hot = 0.0
    for t in range(1, layout.T + 1):
        s = sum(x[layout.var(t, a)] for a in range(2 * layout.N))
        one_hot += (s - 1) ** 2
    edge = 0.0
    for t in range(1, layout.T):
        hits = sum(x[layout.var(t, a)] * x[layout.var(t + 1, b)] for a, b in g.edges)
        edge += 1 - hits
    freq = 0.0
    for v in range(layout.N):
        visits = sum(
            x[layout.var(t, 2 * v + o)] for t in range(1, layout.T + 1) for o in (0, 1)
        )
        freq += (visits - g.weights[v]) ** 2
    return lam1 * one_hot + lam2 * edge + freq


# ---------------------------------------------------------------------------
# Dense-matrix circuit oracle (explicit kron products, expm mixers)

I2 = np.eye(2)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def kron_chain(factors) -> np.ndarray:
    """Tensor product with qubit 0 as the least-significant index bit."""
    out = np.eye(1)
    for f in factors:  # qubit q ends up q positions from the bottom
        out = np.kron(f, out)
    return out


def dense_cost_matrix(h) -> np.ndarray:
    """H as an explicit dense diagonal matrix built from kron'd Z factors."""
    n = h.num_qubits
    mat = h.constant * np.eye(1 << n)
    for qubits, coeff in h.terms.items():
        factors = [PAULI_Z if q in qubits else I2 for q in range(n)]
        mat = mat + coeff * kron_chain(factors)
    return mat


def dense_qaoa_distribution(h, prior, betas, gammas) -> np.ndarray:
    """Output distribution via explicit dense gate-matrix products."""
    n = h.num_qubits
    prior = np.asarray(prior, dtype=float)
    state = kron_chain(
        [np.array([[np.sqrt(1 - p)], [np.sqrt(p)]]) for p in prior]
    ).ravel().astype(complex)
    cost_diag = np.diag(dense_cost_matrix(h)).copy()
    phis = 2 * np.arcsin(np.sqrt(prior))
    for beta, gamma in zip(betas, gammas):
        state = np.exp(-1j * gamma * cost_diag) * state
        locals_2x2 = [
            expm(-1j * beta * (-np.sin(phi) * PAULI_X - np.cos(phi) * PAULI_Z))
            for phi in phis
        ]
        state = kron_chain(locals_2x2) @ state
    return np.abs(state) ** 2


def parse_wcnf(text: str):
    """(num_vars, hard clauses, [(weight, clause)]) from classic or 2022 style."""
    hard, soft = [], []
    num_vars = 0
    top = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p wcnf"):
            parts = line.split()
            num_vars, top = int(parts[2]), int(parts[4])
            continue
        parts = line.split()
        if parts[0] == "h":
            clause = [int(x) for x in parts[1:-1]]
            hard.append(clause)
        else:
            weight = int(parts[0])
            clause = [int(x) for x in parts[1:-1]]
            if top is not None and weight == top:
                hard.append(clause)
            else:
                soft.append((weight, clause))
        for lit in clause:
            num_vars = max(num_vars, abs(lit))
    return num_vars, hard, soft


def eval_clause(clause, assignment) -> bool:
    return any(
        (lit > 0) == bool(assignment.get(abs(lit), False)) for lit in clause
    )
