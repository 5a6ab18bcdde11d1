"""Command-line front end.

One subcommand per library capability plus an end-to-end ``pipeline``.
All randomness flows through explicit seeds, outputs are canonical JSON
or CSV, and reruns with the same flags are byte-identical.

Exit codes: 0 ok, 2 configuration, 3 domain error, 4 size cap exceeded,
5 external-solver problem.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import maxsat
from .encoding import HuboLayout, QuboLayout, decode_hubo, decode_qubo, encode_hubo, encode_qubo
from .errors import ConfigError, DomainError, ExternalSolverError, SizeCapError
from .graphs import (
    OrientedGraph,
    default_walk_length,
    enumerate_optimal_walks,
    generate_tangle,
    graph_from_dict,
    graph_to_dict,
    walk_cost,
)
from .ising import to_ising
from .noise import p_good, required_shots
from .polynomials import BinaryPolynomial
from .qaoa import RunConfig, initial_prior, iterative_qaoa, lr_schedule, sweep
from .topology import build_topology
from .transpile import compile_naive, compile_parity, qaoa_circuit, rotation_supports

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_SIZE = 4
EXIT_SOLVER = 5

DEFAULT_SCHEDULES = {"qubo": (0.63, 0.16), "hubo": (0.75, 0.30)}


def _write_json(data, path: str | None):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def _workers() -> int:
    raw = os.environ.get("TANGLEWALK_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"TANGLEWALK_WORKERS must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# Encodings shared by several subcommands


def _resolve_schedule(kind: str, dbeta, dgamma) -> tuple[float, float]:
    default_b, default_g = DEFAULT_SCHEDULES[kind]
    return (
        default_b if dbeta is None else dbeta,
        default_g if dgamma is None else dgamma,
    )


def _encode(g: OrientedGraph, kind: str, length: int | None, args) -> tuple[BinaryPolynomial, dict]:
    T = default_walk_length(g) if length is None else length
    if kind == "qubo":
        poly = encode_qubo(g, T, args.one_hot_penalty, args.edge_penalty)
        layout = QuboLayout(T, g.node_count)
        meta = {"kind": "qubo", "T": T, "N": g.node_count}
    elif kind == "hubo":
        poly = encode_hubo(g, T, args.hubo_penalty)
        layout = HuboLayout.for_graph(g, T)
        meta = {"kind": "hubo", "T": T, "N": g.node_count, "bits_per_step": layout.bits_per_step}
    else:
        raise ConfigError(f"unknown encoding kind {kind!r}")
    return poly, meta


def _layout_from_meta(meta: dict):
    if meta.get("kind") == "qubo":
        return QuboLayout(meta["T"], meta["N"])
    if meta.get("kind") == "hubo":
        return HuboLayout(meta["T"], meta["bits_per_step"])
    raise ConfigError("polynomial file lacks a usable 'meta' block (kind/T/N)")


def _decoder(kind: str, layout, g: OrientedGraph):
    def decode(bits: tuple[int, ...]) -> dict:
        decoded = (
            decode_qubo(bits, layout, g) if kind == "qubo" else decode_hubo(bits, layout, g)
        )
        entry = {
            "feasible": decoded.feasible,
            "valid": decoded.valid,
            "bad_steps": list(decoded.bad_steps),
            "invalid_edges": list(decoded.invalid_edges),
            "steps": list(decoded.steps) if decoded.steps is not None else None,
        }
        if decoded.steps is not None:
            entry["walk_cost"] = walk_cost(g, decoded.steps)
        return entry

    return decode


def _load_instance(args) -> OrientedGraph:
    if getattr(args, "graph", None):
        return graph_from_dict(_load_json(args.graph))
    return generate_tangle(args.seed, args.nodes, args.max_weight, args.density)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args) -> int:
    g = generate_tangle(args.seed, args.nodes, args.max_weight, args.density)
    _write_json(graph_to_dict(g), args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = graph_from_dict(_load_json(args.graph))
    T = default_walk_length(g) if args.length is None else args.length
    result = enumerate_optimal_walks(g, T, args.cap)
    if not result.found:
        print(f"status no-walk (T={T})")
        return EXIT_OK
    print(f"min_cost {result.min_cost} (T={T}, optimal walks: {len(result.walks)})")
    for walk in result.walks:
        print("walk " + " ".join(str(s) for s in walk))
    return EXIT_OK


def cmd_encode(args) -> int:
    g = graph_from_dict(_load_json(args.graph))
    poly, meta = _encode(g, args.kind, args.length, args)
    data = poly.to_dict()
    data["meta"] = meta
    _write_json(data, args.output)
    return EXIT_OK


def _run_solve(g: OrientedGraph, poly: BinaryPolynomial, meta: dict, args):
    kind = meta["kind"]
    layout = _layout_from_meta(meta)
    dbeta, dgamma = _resolve_schedule(kind, args.dbeta, args.dgamma)
    config = RunConfig(
        p=args.p,
        dbeta=dbeta,
        dgamma=dgamma,
        shots=args.shots,
        alpha=args.alpha,
        iterations=args.iters,
        seed=args.run_seed,
        target_energy=args.target,
    )
    h = to_ising(poly)
    record = iterative_qaoa(
        h, kind, config, layout=layout, decoder=_decoder(kind, layout, g)
    )
    return record


def cmd_solve(args) -> int:
    data = _load_json(args.input)
    if "terms" in data:
        if "meta" not in data:
            raise ConfigError("encoded polynomial lacks 'meta'; re-run `encode`")
        if not args.graph:
            raise ConfigError("solving an encoded polynomial requires --graph for decoding")
        g = graph_from_dict(_load_json(args.graph))
        poly = BinaryPolynomial.from_dict(data)
        meta = data["meta"]
    else:
        g = graph_from_dict(data)
        poly, meta = _encode(g, args.kind, args.length, args)
    record = _run_solve(g, poly, meta, args)
    _write_json(record.to_dict(), args.output)
    if args.hist:
        with open(args.hist, "w") as fh:
            fh.write("iteration,energy,frequency\n")
            for rec in record.iterations:
                for energy, count in rec.histogram:
                    fh.write(f"{rec.iteration},{energy!r},{count}\n")
    return EXIT_OK


def _parse_grid_axis(spec: str) -> list[float]:
    if ":" in spec:
        start, stop, num = spec.split(":")
        return [float(x) for x in np.linspace(float(start), float(stop), int(num))]
    return [float(x) for x in spec.split(",")]


def _sweep_chunk(payload):
    poly_dict, meta, grid, ps = payload
    poly = BinaryPolynomial.from_dict(poly_dict)
    h = to_ising(poly)
    prior = initial_prior(meta["kind"], _layout_from_meta(meta))
    return sweep(h, prior, grid, ps)


def cmd_sweep(args) -> int:
    g = _load_instance(args)
    poly, meta = _encode(g, args.kind, args.length, args)
    ps = [int(x) for x in args.p.split(",")]
    grid = [(b, c) for b in _parse_grid_axis(args.dbetas) for c in _parse_grid_axis(args.dgammas)]
    workers = _workers()
    if workers == 1 or len(grid) < 2 * workers:
        rows = _sweep_chunk((poly.to_dict(), meta, grid, ps))
    else:
        chunks = [grid[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _sweep_chunk, [(poly.to_dict(), meta, chunk, ps) for chunk in chunks]
            )
        rows = sorted(row for part in parts for row in part)
    lines = ["p,dbeta,dgamma,p_opt"]
    for p, dbeta, dgamma, popt in rows:
        lines.append(f"{p},{dbeta!r},{dgamma!r},{popt!r}")
    text = "\n".join(lines) + "\n"
    if args.output is None or args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def _parse_topology(spec: str):
    kind, _, size = spec.partition(":")
    if kind == "linear":
        return build_topology("linear", int(size))
    if kind == "grid":
        rows, _, cols = size.partition("x")
        return build_topology("grid", (int(rows), int(cols)))
    if kind in ("heavy-hex", "heavy_hex"):
        return build_topology("heavy-hex", int(size))
    raise ConfigError(f"unknown topology {spec!r} (try linear:N, grid:RxC, heavy-hex:C)")


def cmd_compile(args) -> int:
    g = _load_instance(args)
    poly, meta = _encode(g, args.kind, args.length, args)
    h = to_ising(poly)
    kind = meta["kind"]
    dbeta, dgamma = _resolve_schedule(kind, args.dbeta, args.dgamma)
    schedule = lr_schedule(args.p, dbeta, dgamma)
    prior = initial_prior(kind, _layout_from_meta(meta))
    logical = qaoa_circuit(h, schedule, prior)
    topo = _parse_topology(args.topology)
    if args.wcnf_out:
        problem = maxsat.export_wcnf(
            [tuple(sorted(s)) for s in rotation_supports(logical)],
            topo,
            swap_depth=args.swap_depth,
            max_order=args.max_order,
        )
        with open(args.wcnf_out, "w") as fh:
            fh.write(problem.text)
    compiled = (
        compile_parity(logical, topo)
        if args.method == "parity"
        else compile_naive(logical, topo, args.layout_seed)
    )
    report = {
        "method": compiled.method,
        "topology": args.topology,
        "num_physical_qubits": topo.num_qubits,
        "num_logical_qubits": logical.num_qubits,
        "metrics": compiled.metrics,
        "initial_layout": {str(k): v for k, v in sorted(compiled.initial_layout.items())},
        "final_layout": {str(k): v for k, v in sorted(compiled.final_layout.items())},
    }
    _write_json(report, args.output)
    if args.circuit_out:
        with open(args.circuit_out, "w") as fh:
            fh.write(compiled.circuit.to_text())
    return EXIT_OK


def cmd_noise(args) -> int:
    result = {
        "p_good": p_good(args.e, args.gates),
        "shots": required_shots(args.e, args.gates, args.good),
    }
    _write_json(result, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Pipeline


@dataclass
class ExperimentConfig:
    """Round-trippable settings for an end-to-end run."""

    seed: int = 1
    nodes: int = 2
    max_weight: int = 2
    density: float = 0.25
    graph: str | None = None
    kind: str = "hubo"
    length: int | None = None
    p: int = 1
    dbeta: float | None = None
    dgamma: float | None = None
    shots: int = 400
    alpha: float = 0.1
    iters: int = 5
    seeds: tuple[int, ...] = (0,)
    target: float | None = 0.0
    one_hot_penalty: float = 10
    edge_penalty: float = 5
    hubo_penalty: float = 10
    output: str | None = None
    run_seed: int = 0  # populated per run

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        """Parse a flat key = value file (a small TOML subset)."""
        values: dict[str, object] = {}
        try:
            lines = open(path).read().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key == "seeds":
                values[key] = tuple(int(x) for x in value.strip("[]").split(",") if x.strip())
            elif value.startswith('"') and value.endswith('"'):
                values[key] = value[1:-1]
            elif value in ("true", "false"):
                values[key] = value == "true"
            elif value == "none":
                values[key] = None
            else:
                try:
                    values[key] = int(value)
                except ValueError:
                    try:
                        values[key] = float(value)
                    except ValueError:
                        raise ConfigError(f"{path}:{lineno}: unparsable value {value!r}")
        known = set(cls.__dataclass_fields__)
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**values)

    def validate(self):
        if self.kind not in ("qubo", "hubo"):
            raise ConfigError(f"kind must be qubo or hubo, got {self.kind!r}")
        if self.shots < 1 or self.iters < 1 or self.p < 1:
            raise ConfigError("shots, iters, and p must all be >= 1")
        if not 0 < self.alpha <= 1:
            raise ConfigError("alpha must lie in (0, 1]")
        if not self.seeds:
            raise ConfigError("at least one run seed is required")


def _pipeline_one(payload):
    cfg_dict, run_seed = payload
    cfg = ExperimentConfig(**cfg_dict)
    if cfg.graph:
        g = graph_from_dict(_load_json(cfg.graph))
    else:
        g = generate_tangle(cfg.seed, cfg.nodes, cfg.max_weight, cfg.density)
    args = argparse.Namespace(
        one_hot_penalty=cfg.one_hot_penalty,
        edge_penalty=cfg.edge_penalty,
        hubo_penalty=cfg.hubo_penalty,
        dbeta=cfg.dbeta,
        dgamma=cfg.dgamma,
        p=cfg.p,
        shots=cfg.shots,
        alpha=cfg.alpha,
        iters=cfg.iters,
        run_seed=run_seed,
        target=cfg.target,
    )
    poly, meta = _encode(g, cfg.kind, cfg.length, args)
    record = _run_solve(g, poly, meta, args)
    oracle = enumerate_optimal_walks(g, meta["T"])
    return record.to_dict(), oracle.min_cost


def cmd_pipeline(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig(
            seed=args.seed,
            nodes=args.nodes,
            max_weight=args.max_weight,
            density=args.density,
            graph=args.graph,
            kind=args.kind,
            length=args.length,
            p=args.p,
            dbeta=args.dbeta,
            dgamma=args.dgamma,
            shots=args.shots,
            alpha=args.alpha,
            iters=args.iters,
            seeds=tuple(int(s) for s in args.seeds.split(",")),
            target=args.target,
            output=args.output,
        )
    cfg.validate()
    cfg_dict = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    payloads = [(cfg_dict, run_seed) for run_seed in cfg.seeds]
    workers = _workers()
    if workers == 1 or len(payloads) == 1:
        results = [_pipeline_one(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pipeline_one, payloads))

    runs = []
    print(f"{'seed':>6} {'best_E':>8} {'oracle':>8} {'found_at':>9} {'walk_cost':>10}")
    for run_seed, (record, oracle_min) in zip(cfg.seeds, results):
        walk = record["decoded_walk"] or {}
        runs.append({"seed": run_seed, "oracle_min": oracle_min, "record": record})
        found = record["optimum_iteration"]
        print(
            f"{run_seed:>6} {record['best_energy']:>8g} "
            f"{('-' if oracle_min is None else oracle_min):>8} "
            f"{('-' if found is None else found):>9} "
            f"{walk.get('walk_cost', '-'):>10}"
        )
    if cfg.output:
        saved_cfg = {
            k: v
            for k, v in cfg_dict.items()
            if k not in ("output", "run_seed")
        } | {"seeds": list(cfg.seeds)}
        _write_json({"config": saved_cfg, "runs": runs}, cfg.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _add_generator_flags(sub, with_graph=True):
    sub.add_argument("--seed", type=int, default=1, help="instance generator seed")
    sub.add_argument("--nodes", type=int, default=2)
    sub.add_argument("--max-weight", dest="max_weight", type=int, default=2)
    sub.add_argument("--density", type=float, default=0.25)
    if with_graph:
        sub.add_argument("--graph", help="graph JSON file (overrides generator flags)")


def _add_encode_flags(sub):
    sub.add_argument("--kind", choices=("qubo", "hubo"), default="hubo")
    sub.add_argument("--length", type=int, default=None, help="walk length T (default: sum of weights)")
    sub.add_argument("--one-hot-penalty", dest="one_hot_penalty", type=float, default=10)
    sub.add_argument("--edge-penalty", dest="edge_penalty", type=float, default=5)
    sub.add_argument("--hubo-penalty", dest="hubo_penalty", type=float, default=10)


def _add_run_flags(sub):
    sub.add_argument("--p", type=int, default=1, help="LR-QAOA layers")
    sub.add_argument("--dbeta", type=float, default=None)
    sub.add_argument("--dgamma", type=float, default=None)
    sub.add_argument("--shots", type=int, default=400)
    sub.add_argument("--alpha", type=float, default=0.1)
    sub.add_argument("--iters", type=int, default=5)
    sub.add_argument("--run-seed", dest="run_seed", type=int, default=0)
    sub.add_argument("--target", type=float, default=None, help="stop once this energy is sampled")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tanglewalk", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("generate", help="write a planted tangle instance")
    _add_generator_flags(sub, with_graph=False)
    sub.add_argument("-o", "--output", default="-")
    sub.set_defaults(func=cmd_generate)

    sub = subs.add_parser("oracle", help="brute-force optimal walks")
    sub.add_argument("graph")
    sub.add_argument("--length", type=int, default=None)
    sub.add_argument("--cap", type=int, default=10_000_000)
    sub.set_defaults(func=cmd_oracle)

    sub = subs.add_parser("encode", help="encode a graph as a binary polynomial")
    sub.add_argument("graph")
    _add_encode_flags(sub)
    sub.add_argument("-o", "--output", default="-")
    sub.set_defaults(func=cmd_encode)

    sub = subs.add_parser("solve", help="iterative QAOA on a graph or encoded polynomial")
    sub.add_argument("input", help="graph JSON or encoded polynomial JSON")
    sub.add_argument("--graph", help="graph file when the input is a polynomial")
    _add_encode_flags(sub)
    _add_run_flags(sub)
    sub.add_argument("-o", "--output", default="-")
    sub.add_argument("--hist", help="per-iteration energy histogram CSV")
    sub.set_defaults(func=cmd_solve)

    sub = subs.add_parser("sweep", help="p_opt heatmap over (dbeta, dgamma)")
    _add_generator_flags(sub)
    _add_encode_flags(sub)
    sub.add_argument("--p", default="1", help="comma-separated layer counts")
    sub.add_argument("--dbetas", default="0.1:1.0:10", help="list a,b,c or range start:stop:count")
    sub.add_argument("--dgammas", default="0.1:1.0:10")
    sub.add_argument("-o", "--output", default="-")
    sub.set_defaults(func=cmd_sweep)

    sub = subs.add_parser("compile", help="compile the cost circuit to a topology")
    _add_generator_flags(sub)
    _add_encode_flags(sub)
    sub.add_argument("--p", type=int, default=1)
    sub.add_argument("--dbeta", type=float, default=None)
    sub.add_argument("--dgamma", type=float, default=None)
    sub.add_argument("--topology", default="linear:8", help="linear:N, grid:RxC, or heavy-hex:C")
    sub.add_argument("--method", choices=("parity", "naive"), default="parity")
    sub.add_argument("--layout-seed", dest="layout_seed", type=int, default=None)
    sub.add_argument("--wcnf-out", dest="wcnf_out", help="export the layout MAX-SAT instance")
    sub.add_argument("--swap-depth", dest="swap_depth", type=int, default=0)
    sub.add_argument("--max-order", dest="max_order", type=int, default=6)
    sub.add_argument("--circuit-out", dest="circuit_out", help="write the compiled gate list")
    sub.add_argument("-o", "--output", default="-")
    sub.set_defaults(func=cmd_compile)

    for name in ("noise", "noise-budget"):
        sub = subs.add_parser(
            name, help="oversampling requirements from 2q error rates"
        )
        sub.add_argument("--e", type=float, required=True)
        sub.add_argument("--gates", type=int, required=True)
        sub.add_argument("--good", type=int, default=4000)
        sub.add_argument("-o", "--output", default="-")
        sub.set_defaults(func=cmd_noise)

    sub = subs.add_parser("pipeline", help="generate, encode, solve, decode, compare to oracle")
    sub.add_argument("--config", help="flat key = value config file")
    _add_generator_flags(sub)
    _add_encode_flags(sub)
    _add_run_flags(sub)
    sub.add_argument("--seeds", default="0", help="comma-separated run seeds")
    sub.add_argument("-o", "--output", default=None)
    sub.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ExternalSolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
