"""Tangle-walk optimisation toolkit.

Encode oriented-tangle walk instances as QUBO/HUBO binary polynomials,
solve them with an exactly simulated warm-started linear-ramp QAOA
feedback loop, and compile the cost circuits to limited-connectivity
gate sets.  Everything is deterministic given explicit seeds and is
validated against brute-force oracles in the test suite.
"""

from .annealing import simulated_annealing
from .circuits import CircuitIR, Gate, apply_circuit, metrics, verify_equivalence
from .encoding import (
    DecodedWalk,
    HuboLayout,
    QuboLayout,
    decode_hubo,
    decode_qubo,
    encode_hubo,
    encode_qubo,
    indicator_polynomial,
)
from .errors import (
    ConfigError,
    DomainError,
    ExternalSolverError,
    GenerationError,
    SizeCapError,
    TanglewalkError,
)
from .graphs import (
    OrientedGraph,
    WalkOracleResult,
    default_walk_length,
    enumerate_optimal_walks,
    flip,
    generate_tangle,
    is_valid_walk,
    load_graph,
    save_graph,
    walk_cost,
)
from .ising import IsingPolynomial, diagonal, ising_energy, to_ising
from .maxsat import (
    MaxsatLayout,
    enumerate_best_layout,
    export_wcnf,
    import_maxsat_layout,
    suggest_swap_depth,
)
from .noise import p_good, required_shots
from .polynomials import BinaryPolynomial, eval_binary, load_polynomial, save_polynomial
from .qaoa import (
    QaoaSchedule,
    RunConfig,
    RunRecord,
    SampleBatch,
    beta_t,
    cvar_filter,
    initial_prior,
    iterative_qaoa,
    lr_schedule,
    p_opt,
    sample,
    simulate,
    sweep,
    update_prior,
)
from .topology import Topology, build_topology, edge_colouring
from .transpile import (
    CompiledCircuit,
    compile_naive,
    compile_parity,
    cost_layer_gates,
    qaoa_circuit,
    search_layout,
)

__version__ = "0.1.0"
