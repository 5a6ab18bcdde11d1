"""Build logical QAOA circuits and compile them to coupling-limited topologies.

Two compile strategies are provided:

* ``compile_naive``: every multi-qubit Z rotation becomes a CX ladder,
  a rotation, and the inverse ladder; non-adjacent operands are routed
  with shortest-path SWAPs that permute the layout permanently.
* ``compile_parity``: rotations are planned over Steiner trees of their
  physical supports.  CX networks collect the parity of the rotated set
  into a coupled pair (executed as one RZZ) or a single qubit (RZ),
  conduit qubits are cancelled with sandwich CXs, and each rotation's
  network is mirrored so the run stays diagonal.  Rotations are ordered
  to maximise shared network prefixes, which a commutation-aware
  peephole pass then cancels between consecutive rotations.  No SWAPs
  are inserted: parity collection reaches across the topology, so no
  interaction is ever left non-local.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import CircuitIR, Gate, metrics
from .errors import DomainError, TanglewalkError
from .ising import IsingPolynomial
from .qaoa import QaoaSchedule
from .topology import Topology

EXHAUSTIVE_LAYOUT_CAP = 5040  # candidate assignments tried exhaustively
DEFAULT_ORDER_CAP = 8  # rotations ordered by exhaustive permutation search


@dataclass
class CompiledCircuit:
    """Topology-respecting circuit plus layout maps and size metrics."""

    circuit: CircuitIR
    initial_layout: dict[int, int]
    final_layout: dict[int, int]
    method: str
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.circuit.has_multirz:
            raise DomainError("compiled circuits may not contain MULTIRZ gates")
        if not self.metrics:
            self.metrics = metrics(self.circuit)


def cost_layer_gates(h: IsingPolynomial, gamma: float) -> list[Gate]:
    """Diagonal gates implementing exp(-i gamma (H - constant))."""
    gates = []
    for qubits, coeff in sorted(h.terms.items()):
        theta = 2 * gamma * coeff
        if len(qubits) == 1:
            gates.append(Gate("RZ", qubits, theta))
        else:
            gates.append(Gate("MULTIRZ", qubits, theta))
    return gates


def qaoa_circuit(
    h: IsingPolynomial, schedule: QaoaSchedule, prior: Sequence[float]
) -> CircuitIR:
    """Logical warm-started LR-QAOA circuit for a diagonal cost Hamiltonian.

    Ry rotations prepare the biased product state; each layer applies the
    cost phase (one MULTIRZ per Z term, the constant being a global
    phase) and then the rotated mixer, emitted per qubit as the gate
    sequence Ry(-phi), Rz(-2 beta), Ry(phi).
    """
    n = h.num_qubits
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (n,):
        raise DomainError(f"prior must have {n} entries")
    phi = 2 * np.arcsin(np.sqrt(prior))
    circ = CircuitIR(n)
    for q in range(n):
        circ.append("RY", (q,), float(phi[q]))
    for beta, gamma in zip(schedule.betas, schedule.gammas):
        circ.extend(cost_layer_gates(h, gamma))
        for q in range(n):
            circ.append("RY", (q,), float(-phi[q]))
            circ.append("RZ", (q,), float(-2 * beta))
            circ.append("RY", (q,), float(phi[q]))
    return circ


# ---------------------------------------------------------------------------
# Layout bookkeeping and naive compilation


class _Placement:
    """Mutable logical <-> physical assignment."""

    def __init__(self, layout: dict[int, int], num_physical: int):
        self.l2p = dict(layout)
        self.p2l: dict[int, int] = {p: l for l, p in self.l2p.items()}
        if len(self.p2l) != len(self.l2p):
            raise DomainError("layout maps two logical qubits to one physical qubit")
        if any(not 0 <= p < num_physical for p in self.l2p.values()):
            raise DomainError("layout targets a physical qubit outside the topology")

    def swap_physical(self, a: int, b: int):
        la, lb = self.p2l.pop(a, None), self.p2l.pop(b, None)
        if la is not None:
            self.l2p[la] = b
            self.p2l[b] = la
        if lb is not None:
            self.l2p[lb] = a
            self.p2l[a] = lb


def _route_adjacent(topo: Topology, place: _Placement, moving: int, target: int, out: list[Gate]):
    """SWAP the qubit holding ``moving`` along a shortest path until coupled."""
    while not topo.coupled(place.l2p[moving], place.l2p[target]):
        path = topo.shortest_path(place.l2p[moving], place.l2p[target])
        out.append(Gate("SWAP", (path[0], path[1])))
        place.swap_physical(path[0], path[1])


def compile_naive(
    circ: CircuitIR, topo: Topology, layout_seed: int | None = None
) -> CompiledCircuit:
    """Baseline: CX ladders for every rotation, shortest-path SWAP routing."""
    initial_layout = _initial_layout(circ, topo, layout_seed)
    place = _Placement(initial_layout, topo.num_qubits)
    out: list[Gate] = []
    for g in circ.gates:
        if len(g.qubits) == 1:
            out.append(Gate(g.name, (place.l2p[g.qubits[0]],), g.theta))
        elif g.name in ("CX", "RZZ", "SWAP") or (g.name == "MULTIRZ" and len(g.qubits) == 2):
            a, b = g.qubits
            _route_adjacent(topo, place, a, b, out)
            name = "RZZ" if g.name == "MULTIRZ" else g.name
            out.append(Gate(name, (place.l2p[a], place.l2p[b]), g.theta))
            if g.name == "SWAP":
                place.swap_physical(place.l2p[a], place.l2p[b])
        elif g.name == "MULTIRZ":
            # CX ladder over logical pairs; each leg is routed at its current
            # positions, so the mirror stays correct even when routing for a
            # later leg has moved qubits in between.
            order = sorted(g.qubits, key=lambda q: place.l2p[q])
            ladder = list(zip(order, order[1:]))
            for prev, cur in ladder:
                _route_adjacent(topo, place, prev, cur, out)
                out.append(Gate("CX", (place.l2p[prev], place.l2p[cur])))
            out.append(Gate("RZ", (place.l2p[order[-1]],), g.theta))
            for prev, cur in reversed(ladder):
                _route_adjacent(topo, place, prev, cur, out)
                out.append(Gate("CX", (place.l2p[prev], place.l2p[cur])))
        else:  # pragma: no cover - Gate validation forbids other names
            raise DomainError(f"cannot compile gate {g.name}")
    return CompiledCircuit(
        CircuitIR(topo.num_qubits, out),
        initial_layout=initial_layout,
        final_layout=dict(place.l2p),
        method="naive",
    )


def _initial_layout(circ: CircuitIR, topo: Topology, seed: int | None) -> dict[int, int]:
    if topo.num_qubits < circ.num_qubits:
        raise DomainError(
            f"topology has {topo.num_qubits} qubits, circuit needs {circ.num_qubits}"
        )
    if seed is None:
        return {q: q for q in range(circ.num_qubits)}
    rng = np.random.default_rng(seed)
    order = rng.permutation(topo.num_qubits)[: circ.num_qubits]
    return {q: int(order[q]) for q in range(circ.num_qubits)}


# ---------------------------------------------------------------------------
# Parity-network compilation


def _steiner_tree(topo: Topology, terminals: frozenset[int]) -> dict[int, list[int]]:
    """Deterministic approximate Steiner tree as an adjacency dict."""
    terms = sorted(terminals)
    tree_nodes = {terms[0]}
    adj: dict[int, list[int]] = {terms[0]: []}
    for _ in terms[1:]:
        missing = [t for t in terms if t not in tree_nodes]
        if not missing:
            break
        best_path = None
        for t in missing:
            path = _path_to_set(topo, t, tree_nodes)
            if best_path is None or (len(path), path) < (len(best_path), best_path):
                best_path = path
        for a, b in zip(best_path, best_path[1:]):
            adj.setdefault(a, [])
            adj.setdefault(b, [])
            if b not in adj[a]:
                adj[a].append(b)
                adj[b].append(a)
            tree_nodes.add(a)
            tree_nodes.add(b)
    return {node: sorted(nbrs) for node, nbrs in adj.items()}


def _path_to_set(topo: Topology, start: int, targets: set[int]) -> list[int]:
    """Shortest path from ``start`` to any node of ``targets`` (BFS, sorted ties)."""
    if start in targets:
        return [start]
    from collections import deque

    parent = {start: start}
    frontier = deque([start])
    while frontier:
        cur = frontier.popleft()
        for nb in topo.neighbors(cur):
            if nb in parent:
                continue
            parent[nb] = cur
            if nb in targets:
                path = [nb]
                while path[-1] != start:
                    path.append(parent[path[-1]])
                return path[::-1]
            frontier.append(nb)
    raise DomainError("topology is disconnected")


def _collect_gates(
    adj: dict[int, list[int]], root: int, members: frozenset[int], banned: int | None = None
) -> list[Gate]:
    """CX network folding every member parity of the subtree into ``root``.

    Member children contribute one CX toward the parent; conduit children
    are sandwiched (CX before and after their own collection) so their
    resident value cancels out of the accumulated parity.
    """

    def subtree_has_member(node: int, parent: int | None) -> bool:
        if node in members:
            return True
        return any(
            subtree_has_member(c, node)
            for c in adj[node]
            if c != parent and c != banned
        )

    gates: list[Gate] = []

    def rec(node: int, parent: int | None):
        for child in adj[node]:
            if child == parent or child == banned:
                continue
            if not subtree_has_member(child, node):
                continue
            if child in members:
                rec(child, node)
                gates.append(Gate("CX", (child, node)))
            else:
                gates.append(Gate("CX", (child, node)))
                rec(child, node)
                gates.append(Gate("CX", (child, node)))

    rec(root, None)
    return gates


@dataclass(frozen=True)
class _RotationPlan:
    network: tuple[Gate, ...]  # parity-collection CXs (mirrored after the rotation)
    rotation: Gate

    @property
    def two_qubit_cost(self) -> int:
        return 2 * len(self.network) + (1 if self.rotation.name == "RZZ" else 0)

    def emit(self) -> list[Gate]:
        return list(self.network) + [self.rotation] + list(reversed(self.network))


def _plan_rotation(topo: Topology, support: frozenset[int], theta: float) -> _RotationPlan:
    """Pick the cheapest parity-collection plan for one Z rotation."""
    if len(support) == 1:
        (q,) = support
        return _RotationPlan((), Gate("RZ", (q,), theta))
    adj = _steiner_tree(topo, support)
    candidates: list[tuple[tuple, _RotationPlan]] = []

    for u in sorted(adj):
        for v in adj[u]:
            if u > v:
                continue
            members_here = (u in support) + (v in support)
            if members_here == 0:
                continue
            network: list[Gate] = []
            if members_here == 1:
                conduit, member = (u, v) if v in support else (v, u)
                network.append(Gate("CX", (conduit, member)))
            network += _collect_gates(adj, u, support, banned=v)
            network += _collect_gates(adj, v, support, banned=u)
            plan = _RotationPlan(tuple(network), Gate("RZZ", (u, v), theta))
            rank = (plan.two_qubit_cost, 0, (-u, -v))
            candidates.append((rank, plan))

    for root in sorted(support):
        network = _collect_gates(adj, root, support)
        plan = _RotationPlan(tuple(network), Gate("RZ", (root,), theta))
        rank = (plan.two_qubit_cost, 1, (-root,))
        candidates.append((rank, plan))

    candidates.sort(key=lambda item: item[0])
    return candidates[0][1]


def _prefix_overlap(a: _RotationPlan, b: _RotationPlan) -> int:
    count = 0
    for ga, gb in zip(a.network, b.network):
        if ga == gb:
            count += 1
        else:
            break
    return count


def _order_plans(plans: list[_RotationPlan], order_cap: int) -> list[int]:
    """Order rotations to maximise shared network prefixes between neighbours."""
    m = len(plans)
    if m <= 1:
        return list(range(m))
    overlap = [[_prefix_overlap(plans[i], plans[j]) for j in range(m)] for i in range(m)]
    if m <= order_cap:
        best_order, best_score = None, -1
        for perm in itertools.permutations(range(m)):
            score = sum(overlap[a][b] for a, b in zip(perm, perm[1:]))
            if score > best_score:
                best_order, best_score = perm, score
        return list(best_order)
    # Greedy chain growth: extend whichever end gains the most overlap.
    remaining = set(range(m))
    chain = [0]
    remaining.discard(0)
    while remaining:
        head, tail = chain[0], chain[-1]
        best = max(
            ((overlap[tail][c], -c, c, "tail") for c in remaining),
            key=lambda item: item[:2],
        )
        best_head = max(
            ((overlap[head][c], -c, c, "head") for c in remaining),
            key=lambda item: item[:2],
        )
        if best_head[:2] > best[:2]:
            best = best_head
        _, _, chosen, side = best
        if side == "tail":
            chain.append(chosen)
        else:
            chain.insert(0, chosen)
        remaining.discard(chosen)
    return chain


def _commutes_with_cx(gate: Gate, control: int, target: int) -> bool:
    touched = set(gate.qubits)
    if not touched & {control, target}:
        return True
    if gate.name in ("RZ", "RZZ", "MULTIRZ") and target not in touched:
        return True  # diagonal gates commute through the control
    if gate.name == "CX":
        c2, t2 = gate.qubits
        return t2 != control and c2 != target
    return False


def _cancel_adjacent_cx(gates: list[Gate]) -> list[Gate]:
    """Remove CX pairs separated only by gates they commute with (to fixpoint)."""
    out = list(gates)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(out):
            g = out[i]
            if g.name != "CX":
                i += 1
                continue
            control, target = g.qubits
            cancelled = False
            for j in range(i + 1, len(out)):
                other = out[j]
                if other == g:
                    del out[j]
                    del out[i]
                    i = max(i - 1, 0)
                    cancelled = True
                    changed = True
                    break
                if not _commutes_with_cx(other, control, target):
                    break
            if not cancelled:
                i += 1
    return out


def _verify_diagonal_run(gates: list[Gate], expected: list[tuple[int, float]], n: int):
    """Exact self-check of a compiled diagonal run via GF(2) parity replay.

    Each emitted rotation must fire on exactly the parity of the cost term
    it implements, and the CX network must restore the identity so the run
    stays diagonal.  Raises rather than silently emitting a wrong circuit.
    """
    rows = [1 << q for q in range(n)]
    realized: list[tuple[int, float]] = []
    for g in gates:
        if g.name == "CX":
            control, target = g.qubits
            rows[target] ^= rows[control]
        elif g.name == "RZ":
            realized.append((rows[g.qubits[0]], g.theta))
        elif g.name == "RZZ":
            a, b = g.qubits
            realized.append((rows[a] ^ rows[b], g.theta))
        else:
            raise TanglewalkError(f"internal: {g.name} in a compiled diagonal run")
    if rows != [1 << q for q in range(n)]:
        raise TanglewalkError("internal: parity network does not restore the identity")
    if sorted(realized) != sorted(expected):
        raise TanglewalkError("internal: compiled rotations do not match the cost terms")


def _compile_diagonal_run(
    gates: list[Gate], topo: Topology, place: _Placement, order_cap: int
) -> list[Gate]:
    singles: list[Gate] = []
    plans: list[_RotationPlan] = []
    expected: list[tuple[int, float]] = []
    for g in gates:
        phys = tuple(sorted(place.l2p[q] for q in g.qubits))
        expected.append((sum(1 << q for q in phys), g.theta))
        if len(phys) == 1:
            singles.append(Gate("RZ", phys, g.theta))
        else:
            plans.append(_plan_rotation(topo, frozenset(phys), g.theta))
    ordered = _order_plans(plans, order_cap)
    emitted: list[Gate] = []
    for idx in ordered:
        emitted.extend(plans[idx].emit())
    out = singles + _cancel_adjacent_cx(emitted)
    _verify_diagonal_run(out, expected, topo.num_qubits)
    return out


def compile_parity(
    circ: CircuitIR,
    topo: Topology,
    layout: dict[int, int] | None = None,
    layout_search: bool = True,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> CompiledCircuit:
    """Parity-network compilation of the diagonal blocks of a circuit.

    Maximal runs of diagonal gates are compiled together so CX networks
    cancel between rotations; other gates pass through at their mapped
    positions.  ``layout`` pins the placement, otherwise a search
    minimises the spread of rotation supports.  Falls back to the naive
    ladder result in the rare case it wins on two-qubit count.
    """
    if topo.num_qubits < circ.num_qubits:
        raise DomainError(
            f"topology has {topo.num_qubits} qubits, circuit needs {circ.num_qubits}"
        )
    if layout is None:
        layout = (
            search_layout(circ, topo) if layout_search else _initial_layout(circ, topo, None)
        )
    elif set(layout) != set(range(circ.num_qubits)):
        raise DomainError("layout must place every logical qubit of the circuit")
    place = _Placement(layout, topo.num_qubits)
    out: list[Gate] = []
    run: list[Gate] = []
    for g in circ.gates:
        if g.name in ("RZ", "RZZ", "MULTIRZ"):
            run.append(g)
            continue
        if run:
            out.extend(_compile_diagonal_run(run, topo, place, order_cap))
            run = []
        if len(g.qubits) == 1:
            out.append(Gate(g.name, (place.l2p[g.qubits[0]],), g.theta))
        else:  # CX/SWAP passthrough: route like the baseline
            a, b = g.qubits
            _route_adjacent(topo, place, a, b, out)
            out.append(Gate(g.name, (place.l2p[a], place.l2p[b]), g.theta))
            if g.name == "SWAP":
                place.swap_physical(place.l2p[a], place.l2p[b])
    if run:
        out.extend(_compile_diagonal_run(run, topo, place, order_cap))

    result = CompiledCircuit(
        CircuitIR(topo.num_qubits, out),
        initial_layout=dict(layout),
        final_layout=dict(place.l2p),
        method="parity",
    )
    fallback = compile_naive(circ, topo)
    if fallback.metrics["two_qubit_count"] < result.metrics["two_qubit_count"]:
        return CompiledCircuit(
            fallback.circuit,
            fallback.initial_layout,
            fallback.final_layout,
            method="parity-fallback",
        )
    return result


# ---------------------------------------------------------------------------
# Layout search


def rotation_supports(circ: CircuitIR) -> list[frozenset[int]]:
    """Logical qubit sets of all multi-qubit Z rotations in a circuit."""
    return [
        frozenset(g.qubits)
        for g in circ.gates
        if g.name in ("RZZ", "MULTIRZ") and len(g.qubits) >= 2
    ]


def search_layout(circ: CircuitIR, topo: Topology) -> dict[int, int]:
    """Placement minimising pairwise distance inside rotation supports.

    Tries every injective assignment when the candidate count is small,
    otherwise greedy placement by interaction affinity followed by
    pairwise-improvement passes.  Deterministic throughout.
    """
    n_log, n_phys = circ.num_qubits, topo.num_qubits
    supports = rotation_supports(circ)
    if not supports:
        return {q: q for q in range(n_log)}
    dist = [topo.distances_from(p) for p in range(n_phys)]

    def objective(assign: dict[int, int]) -> int:
        total = 0
        for sup in supports:
            qs = [assign[q] for q in sup]
            for i, a in enumerate(qs):
                for b in qs[i + 1 :]:
                    total += dist[a][b]
        return total

    count = 1
    for k in range(n_log):
        count *= n_phys - k
        if count > EXHAUSTIVE_LAYOUT_CAP:
            break
    if count <= EXHAUSTIVE_LAYOUT_CAP:
        best, best_score = None, None
        for perm in itertools.permutations(range(n_phys), n_log):
            assign = {q: perm[q] for q in range(n_log)}
            score = objective(assign)
            if best_score is None or score < best_score:
                best, best_score = assign, score
        return best

    affinity = [[0] * n_log for _ in range(n_log)]
    for sup in supports:
        for a in sup:
            for b in sup:
                if a != b:
                    affinity[a][b] += 1
    order = sorted(range(n_log), key=lambda q: (-sum(affinity[q]), q))
    eccentricity = [max(dist[p].values()) for p in range(n_phys)]
    centre = min(range(n_phys), key=lambda p: (eccentricity[p], p))
    assign: dict[int, int] = {order[0]: centre}
    used = {centre}
    for q in order[1:]:
        best_p, best_cost = None, None
        for p in range(n_phys):
            if p in used:
                continue
            cost = sum(affinity[q][other] * dist[p][assign[other]] for other in assign)
            if best_cost is None or (cost, p) < (best_cost, best_p):
                best_p, best_cost = p, cost
        assign[q] = best_p
        used.add(best_p)

    candidates = [assign, {q: q for q in range(n_log)}]
    best = min(candidates, key=objective)
    best_score = objective(best)
    for _ in range(3):  # pairwise improvement passes
        improved = False
        spots = sorted(set(best.values()) | set(range(min(n_phys, n_log + 4))))
        for qa in range(n_log):
            for spot in spots:
                trial = dict(best)
                holder = next((q for q, p in trial.items() if p == spot), None)
                if holder == qa:
                    continue
                trial[qa], old = spot, trial[qa]
                if holder is not None:
                    trial[holder] = old
                score = objective(trial)
                if score < best_score:
                    best, best_score = trial, score
                    improved = True
        if not improved:
            break
    return best
