import numpy as np
import pytest

from tanglewalk import (
    CircuitIR,
    DomainError,
    Gate,
    apply_circuit,
    build_topology,
    compile_naive,
    compile_parity,
    encode_hubo,
    generate_tangle,
    lr_schedule,
    qaoa_circuit,
    simulate,
    to_ising,
    verify_equivalence,
)
from tanglewalk.transpile import cost_layer_gates, search_layout

from helpers import dense_cost_matrix


def hubo_cost_layer(seed, n_nodes=2, gamma=0.3, T=2):
    g = generate_tangle(seed, n_nodes, 2, 0.4)
    h = to_ising(encode_hubo(g, T))
    return CircuitIR(h.num_qubits, cost_layer_gates(h, gamma)), h


def random_interaction_circuit(rng, n, count):
    gates = []
    for _ in range(count):
        size = int(rng.integers(2, min(n, 5) + 1))
        qubits = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        gates.append(Gate("MULTIRZ", qubits, float(rng.uniform(-1.5, 1.5))))
    return CircuitIR(n, gates)


class TestQaoaCircuit:
    def test_single_zz_term_gate_census(self):
        from tanglewalk import IsingPolynomial

        h = IsingPolynomial(2, {(0, 1): 1.0})
        circ = qaoa_circuit(h, lr_schedule(1, 0.8, 0.4), np.full(2, 0.5))
        names = [g.name for g in circ.gates]
        assert names.count("MULTIRZ") == 1
        multirz = next(g for g in circ.gates if g.name == "MULTIRZ")
        assert multirz.qubits == (0, 1)
        # init RYs plus 3 mixer rotations per qubit
        assert names.count("RY") == 2 + 4 and names.count("RZ") == 2

    def test_constant_hamiltonian_has_no_phase_gates(self):
        from tanglewalk import IsingPolynomial

        h = IsingPolynomial(2, constant=5.0)
        circ = qaoa_circuit(h, lr_schedule(2, 0.8, 0.4), np.zeros(2))
        assert all(g.name in ("RY", "RZ") for g in circ.gates)
        # mixer RZ angles only, no cost RZ
        assert all(g.theta != 0 for g in circ.gates if g.name == "RZ")

    @pytest.mark.parametrize("seed", [0, 1])
    def test_cost_layer_diagonal_action(self, seed):
        rng = np.random.default_rng(seed)
        from tanglewalk import IsingPolynomial

        n = 3
        terms = {(0,): 1.0, (0, 1): -2.0, (0, 1, 2): float(rng.uniform(-1, 1))}
        h = IsingPolynomial(n, terms, constant=float(rng.uniform(-1, 1)))
        gamma = float(rng.uniform(0.1, 1.0))
        layer = CircuitIR(n, cost_layer_gates(h, gamma))
        out = apply_circuit(layer, np.eye(1 << n, dtype=complex))
        energies = np.diag(dense_cost_matrix(h))
        for idx in range(1 << n):
            expected = np.exp(-1j * gamma * (energies[idx] - h.constant))
            assert out[idx, idx] == pytest.approx(expected, abs=1e-12)

    def test_matches_simulate_distribution(self, tangle2):
        h = to_ising(encode_hubo(tangle2, 2))
        prior = np.full(4, 0.3)
        schedule = lr_schedule(2, 0.75, 0.30)
        circ = qaoa_circuit(h, schedule, prior)
        state = np.zeros(16, dtype=complex)
        state[0] = 1.0
        probs_circ = np.abs(apply_circuit(circ, state)[0]) ** 2
        probs_sim = simulate(h, prior, schedule)
        assert 0.5 * np.abs(probs_circ - probs_sim).sum() < 1e-12


class TestCompileNaive:
    def test_ladder_counts(self):
        circ = CircuitIR(3, [Gate("MULTIRZ", (0, 1, 2), 0.5)])
        compiled = compile_naive(circ, build_topology("linear", 3))
        names = [g.name for g in compiled.circuit.gates]
        assert names.count("CX") == 4 and names.count("RZ") == 1
        assert compiled.metrics["two_qubit_count"] == 4

    def test_adjacent_rzz_single_gate(self):
        circ = CircuitIR(2, [Gate("RZZ", (0, 1), 0.5)])
        compiled = compile_naive(circ, build_topology("linear", 2))
        assert compiled.metrics["two_qubit_count"] == 1

    def test_routing_inserts_swaps(self):
        circ = CircuitIR(4, [Gate("RZZ", (0, 3), 0.5)])
        compiled = compile_naive(circ, build_topology("linear", 4))
        assert any(g.name == "SWAP" for g in compiled.circuit.gates)
        assert verify_equivalence(circ, compiled)

    def test_layout_seed_deterministic(self):
        circ = CircuitIR(3, [Gate("MULTIRZ", (0, 1, 2), 0.5)])
        topo = build_topology("grid", (2, 2))
        a = compile_naive(circ, topo, layout_seed=5)
        b = compile_naive(circ, topo, layout_seed=5)
        assert a.circuit.gates == b.circuit.gates
        assert verify_equivalence(circ, a)

    def test_topology_too_small(self):
        with pytest.raises(DomainError):
            compile_naive(CircuitIR(4), build_topology("linear", 3))


class TestCompileParity:
    def test_spec_zzz_plan(self):
        circ = CircuitIR(3, [Gate("MULTIRZ", (0, 1, 2), 0.7)])
        compiled = compile_parity(
            circ, build_topology("linear", 3), layout={0: 0, 1: 1, 2: 2}, layout_search=False
        )
        assert [(g.name, g.qubits) for g in compiled.circuit.gates] == [
            ("CX", (0, 1)),
            ("RZZ", (1, 2)),
            ("CX", (0, 1)),
        ]

    def test_adjacent_rzz_stays_single(self):
        circ = CircuitIR(2, [Gate("RZZ", (0, 1), 0.5)])
        compiled = compile_parity(circ, build_topology("linear", 2))
        assert compiled.metrics["two_qubit_count"] == 1
        assert all(g.name != "CX" for g in compiled.circuit.gates)

    def test_no_multirz_left(self, tangle2):
        layer, h = hubo_cost_layer(0)
        compiled = compile_parity(layer, build_topology("linear", h.num_qubits))
        assert not compiled.circuit.has_multirz

    def test_compiled_gates_on_coupling_edges(self):
        layer, h = hubo_cost_layer(1, n_nodes=3)
        topo = build_topology("grid", (2, 3))
        for compiler in (compile_parity, compile_naive):
            compiled = compiler(layer, topo)
            for g in compiled.circuit.gates:
                if g.is_two_qubit:
                    assert topo.coupled(*g.qubits)

    @pytest.mark.parametrize("seed", range(6))
    def test_equivalence_random_interactions(self, seed):
        rng = np.random.default_rng(seed)
        circ = random_interaction_circuit(rng, 5, 4)
        for topo in (build_topology("linear", 5), build_topology("grid", (2, 3))):
            parity = compile_parity(circ, topo)
            naive = compile_naive(circ, topo)
            assert verify_equivalence(circ, parity)
            assert verify_equivalence(circ, naive)
            assert (
                parity.metrics["two_qubit_count"] <= naive.metrics["two_qubit_count"]
            )

    def test_hubo_layer_equivalence_all_topologies(self):
        layer, h = hubo_cost_layer(3, n_nodes=3)
        assert h.num_qubits == 6
        for topo in (
            build_topology("linear", 6),
            build_topology("grid", (2, 3)),
            build_topology("heavy-hex", 1),
        ):
            parity = compile_parity(layer, topo)
            naive = compile_naive(layer, topo)
            assert verify_equivalence(layer, parity)
            assert verify_equivalence(layer, naive)

    def test_cancellation_across_repeated_rotation(self):
        circ = CircuitIR(
            3,
            [Gate("MULTIRZ", (0, 1, 2), 0.4), Gate("MULTIRZ", (0, 1, 2), 0.9)],
        )
        compiled = compile_parity(
            circ, build_topology("linear", 3), layout={0: 0, 1: 1, 2: 2}, layout_search=False
        )
        # networks between the two rotations cancel completely
        assert compiled.metrics["two_qubit_count"] == 4
        assert verify_equivalence(circ, compiled)

    def test_overlapping_chain_counts(self):
        sets = [(0, 1, 2), (0, 1, 2, 3), (0, 1, 2, 3, 4), (1, 2, 3, 4)]
        circ = CircuitIR(
            5, [Gate("MULTIRZ", s, 0.1 * (i + 1)) for i, s in enumerate(sets)]
        )
        topo = build_topology("linear", 5)
        parity = compile_parity(circ, topo, layout={i: i for i in range(5)}, layout_search=False)
        naive = compile_naive(circ, topo)
        assert parity.metrics["two_qubit_count"] <= 14
        assert naive.metrics["two_qubit_count"] >= 24
        assert verify_equivalence(circ, parity)
        assert verify_equivalence(circ, naive)

    def test_full_qaoa_circuit_compiles_and_verifies(self, tangle2):
        h = to_ising(encode_hubo(tangle2, 2))
        circ = qaoa_circuit(h, lr_schedule(1, 0.75, 0.30), np.full(4, 0.5))
        topo = build_topology("grid", (2, 2))
        compiled = compile_parity(circ, topo)
        assert verify_equivalence(circ, compiled)

    def test_deterministic(self):
        layer, h = hubo_cost_layer(4)
        topo = build_topology("linear", h.num_qubits)
        a = compile_parity(layer, topo)
        b = compile_parity(layer, topo)
        assert a.circuit.gates == b.circuit.gates


class TestDiagonalRunSelfCheck:
    def test_rejects_missing_mirror(self):
        from tanglewalk.errors import TanglewalkError
        from tanglewalk.transpile import _verify_diagonal_run

        good = [Gate("CX", (0, 1)), Gate("RZZ", (1, 2), 0.4), Gate("CX", (0, 1))]
        _verify_diagonal_run(good, [(0b111, 0.4)], 3)
        with pytest.raises(TanglewalkError, match="identity"):
            _verify_diagonal_run(good[:-1], [(0b111, 0.4)], 3)

    def test_rejects_wrong_rotation_support(self):
        from tanglewalk.errors import TanglewalkError
        from tanglewalk.transpile import _verify_diagonal_run

        gates = [Gate("RZZ", (1, 2), 0.4)]
        with pytest.raises(TanglewalkError, match="cost terms"):
            _verify_diagonal_run(gates, [(0b111, 0.4)], 3)


class TestSearchLayout:
    def test_exhaustive_on_small_instance(self):
        circ = CircuitIR(3, [Gate("MULTIRZ", (0, 2), 0.5)])
        layout = search_layout(circ, build_topology("linear", 3))
        # the two interacting qubits end up adjacent
        assert abs(layout[0] - layout[2]) == 1

    def test_no_interactions_keeps_identity(self):
        circ = CircuitIR(3, [Gate("RY", (0,), 0.1)])
        assert search_layout(circ, build_topology("linear", 3)) == {0: 0, 1: 1, 2: 2}

    def test_injective(self):
        layer, h = hubo_cost_layer(2, n_nodes=3)
        layout = search_layout(layer, build_topology("grid", (3, 3)))
        assert len(set(layout.values())) == h.num_qubits
