import json

import pytest

from tanglewalk import (
    HuboLayout,
    RunConfig,
    decode_hubo,
    encode_hubo,
    generate_tangle,
    iterative_qaoa,
    to_ising,
    walk_cost,
)
from tanglewalk.cli import main
from tanglewalk.graphs import graph_to_dict, save_graph


@pytest.fixture
def tangle2_file(tmp_path, tangle2):
    path = tmp_path / "tangle2.json"
    save_graph(tangle2, path)
    return str(path)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


class TestGenerate:
    def test_writes_valid_graph(self, tmp_path):
        out = tmp_path / "g.json"
        assert main(["generate", "--seed", "3", "--nodes", "3", "-o", str(out)]) == 0
        data = read_json(out)
        assert data["n"] == 3

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["generate", "--seed", "5", "--nodes", "2", "-o", str(a)])
        main(["generate", "--seed", "5", "--nodes", "2", "-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_matches_library(self, tmp_path):
        out = tmp_path / "g.json"
        main(["generate", "--seed", "7", "--nodes", "2", "--max-weight", "1", "-o", str(out)])
        assert read_json(out) == graph_to_dict(generate_tangle(7, 2, 1, 0.25))


class TestOracle:
    def test_tangle2_output(self, tangle2_file, capsys):
        assert main(["oracle", tangle2_file]) == 0
        out = capsys.readouterr().out
        assert "min_cost 0" in out
        assert out.count("walk ") == 4

    def test_cap_exit_code(self, tangle2_file):
        assert main(["oracle", tangle2_file, "--length", "20", "--cap", "10"]) == 4


class TestEncode:
    def test_hubo_meta(self, tangle2_file, tmp_path):
        out = tmp_path / "p.json"
        assert main(["encode", tangle2_file, "--kind", "hubo", "-o", str(out)]) == 0
        data = read_json(out)
        assert data["meta"] == {"kind": "hubo", "T": 2, "N": 2, "bits_per_step": 2}
        assert data["n_vars"] == 4

    def test_invalid_length_exit_code(self, tangle2_file, tmp_path):
        code = main(
            ["encode", tangle2_file, "--length", "0", "-o", str(tmp_path / "p.json")]
        )
        assert code == 3


class TestSolve:
    def test_planted_instance_reaches_zero(self, tangle2_file, tmp_path):
        out = tmp_path / "run.json"
        code = main(
            [
                "solve", tangle2_file, "--kind", "hubo", "--p", "1",
                "--shots", "400", "--iters", "5", "--run-seed", "0",
                "--target", "0", "-o", str(out),
            ]
        )
        assert code == 0
        record = read_json(out)
        assert record["best_energy"] == 0
        assert record["decoded_walk"]["walk_cost"] == 0

    def test_encode_then_solve_matches_library(self, tangle2, tangle2_file, tmp_path):
        poly_file = tmp_path / "p.json"
        main(["encode", tangle2_file, "--kind", "hubo", "-o", str(poly_file)])
        out = tmp_path / "run.json"
        code = main(
            [
                "solve", str(poly_file), "--graph", tangle2_file,
                "--p", "1", "--dbeta", "0.75", "--dgamma", "0.30",
                "--shots", "400", "--alpha", "0.1", "--iters", "5",
                "--run-seed", "3", "-o", str(out),
            ]
        )
        assert code == 0
        layout = HuboLayout.for_graph(tangle2, 2)
        config = RunConfig(
            p=1, dbeta=0.75, dgamma=0.30, shots=400, alpha=0.1, iterations=5, seed=3
        )

        def decoder(bits):
            d = decode_hubo(bits, layout, tangle2)
            entry = {
                "feasible": d.feasible,
                "valid": d.valid,
                "bad_steps": list(d.bad_steps),
                "invalid_edges": list(d.invalid_edges),
                "steps": list(d.steps) if d.steps is not None else None,
            }
            if d.steps is not None:
                entry["walk_cost"] = walk_cost(tangle2, d.steps)
            return entry

        record = iterative_qaoa(
            to_ising(encode_hubo(tangle2, 2)), "hubo", config,
            layout=layout, decoder=decoder,
        )
        assert read_json(out) == json.loads(json.dumps(record.to_dict()))

    def test_qubo_kind_reaches_zero(self, tangle2_file, tmp_path):
        out = tmp_path / "run.json"
        code = main(
            [
                "solve", tangle2_file, "--kind", "qubo", "--p", "1",
                "--shots", "4000", "--iters", "5", "--run-seed", "1",
                "--target", "0", "-o", str(out),
            ]
        )
        assert code == 0
        record = read_json(out)
        assert record["best_energy"] == 0
        assert record["decoded_walk"]["valid"] is True

    def test_histogram_csv(self, tangle2_file, tmp_path):
        out, hist = tmp_path / "run.json", tmp_path / "hist.csv"
        main(
            [
                "solve", tangle2_file, "--kind", "hubo", "--shots", "100",
                "--iters", "2", "-o", str(out), "--hist", str(hist),
            ]
        )
        lines = hist.read_text().splitlines()
        assert lines[0] == "iteration,energy,frequency"
        assert len(lines) > 1

    def test_polynomial_without_meta_is_config_error(self, tmp_path, tangle2_file):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"n_vars": 2, "terms": []}))
        assert main(["solve", str(bad), "--graph", tangle2_file]) == 2


class TestSweep:
    def test_csv_shape(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "sweep", "--seed", "1", "--nodes", "2", "--kind", "hubo",
                "--p", "1,2", "--dbetas", "0.3,0.7", "--dgammas", "0.1,0.3",
                "-o", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "p,dbeta,dgamma,p_opt"
        assert len(lines) == 1 + 2 * 2 * 2

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--seed", "2", "--nodes", "2", "--p", "1", "--dbetas",
                "0.2,0.8", "--dgammas", "0.2", ]
        main(args + ["-o", str(a)])
        main(args + ["-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_worker_pool_matches_serial(self, tmp_path, monkeypatch):
        serial, pooled = tmp_path / "serial.csv", tmp_path / "pooled.csv"
        args = ["sweep", "--seed", "3", "--nodes", "2", "--max-weight", "1",
                "--p", "1", "--dbetas", "0.2,0.5,0.8,1.1", "--dgammas", "0.1,0.3"]
        main(args + ["-o", str(serial)])
        monkeypatch.setenv("TANGLEWALK_WORKERS", "2")
        main(args + ["-o", str(pooled)])
        assert serial.read_bytes() == pooled.read_bytes()

    def test_bad_worker_env_is_config_error(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TANGLEWALK_WORKERS", "lots")
        code = main(
            ["sweep", "--seed", "1", "--nodes", "2", "--max-weight", "1",
             "--p", "1", "--dbetas", "0.2", "--dgammas", "0.1",
             "-o", str(tmp_path / "s.csv")]
        )
        assert code == 2


class TestCompile:
    def test_metrics_report(self, tmp_path):
        out = tmp_path / "compile.json"
        code = main(
            [
                "compile", "--seed", "1", "--nodes", "2", "--max-weight", "1",
                "--kind", "hubo", "--topology", "grid:2x2", "--method", "parity",
                "-o", str(out),
            ]
        )
        assert code == 0
        report = read_json(out)
        assert report["metrics"]["two_qubit_count"] > 0
        assert report["method"] in ("parity", "parity-fallback")

    def test_naive_vs_parity(self, tmp_path):
        reports = {}
        for method in ("naive", "parity"):
            out = tmp_path / f"{method}.json"
            main(
                [
                    "compile", "--seed", "1", "--nodes", "3", "--max-weight", "1",
                    "--kind", "hubo", "--topology", "linear:9", "--method", method,
                    "-o", str(out),
                ]
            )
            reports[method] = read_json(out)
        assert (
            reports["parity"]["metrics"]["two_qubit_count"]
            <= reports["naive"]["metrics"]["two_qubit_count"]
        )

    def test_wcnf_export(self, tmp_path):
        wcnf = tmp_path / "layout.wcnf"
        code = main(
            [
                "compile", "--seed", "1", "--nodes", "2", "--max-weight", "1",
                "--kind", "hubo", "--topology", "linear:4", "--wcnf-out", str(wcnf),
                "-o", str(tmp_path / "c.json"),
            ]
        )
        assert code == 0
        assert wcnf.read_text().startswith("p wcnf ")

    def test_bad_topology_is_config_error(self, tmp_path):
        code = main(
            ["compile", "--seed", "1", "--topology", "ring:4", "-o", str(tmp_path / "c.json")]
        )
        assert code == 2


class TestNoise:
    def test_paper_numbers(self, tmp_path):
        out = tmp_path / "noise.json"
        assert main(["noise", "--e", "1.24e-3", "--gates", "2865", "-o", str(out)]) == 0
        data = read_json(out)
        assert 0.028 <= data["p_good"] <= 0.030
        assert abs(data["shots"] - 1.4e5) / 1.4e5 < 0.05


class TestPipeline:
    def test_end_to_end_summary(self, tmp_path, capsys):
        out = tmp_path / "pipe.json"
        code = main(
            [
                "pipeline", "--seed", "1", "--nodes", "2", "--kind", "hubo",
                "--p", "1", "--shots", "400", "--iters", "5",
                "--seeds", "0,1", "--target", "0", "-o", str(out),
            ]
        )
        assert code == 0
        data = read_json(out)
        assert len(data["runs"]) == 2
        for run in data["runs"]:
            assert run["oracle_min"] == 0
            assert run["record"]["decoded_walk"]["walk_cost"] == 0
        assert "best_E" in capsys.readouterr().out

    def test_rerun_is_bit_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = [
            "pipeline", "--seed", "2", "--nodes", "2", "--kind", "hubo",
            "--shots", "200", "--iters", "2", "--seeds", "0",
        ]
        main(args + ["-o", str(a)])
        main(args + ["-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_length_aborts_with_domain_exit(self, tmp_path):
        code = main(
            [
                "pipeline", "--seed", "1", "--nodes", "2", "--length", "0",
                "--seeds", "0", "-o", str(tmp_path / "x.json"),
            ]
        )
        assert code == 3

    def test_config_file_round_trip(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text(
            'kind = "hubo"\nseed = 1\nnodes = 2\nshots = 200\niters = 2\n'
            "seeds = [0, 1]\ntarget = 0\n"
            f'output = "{tmp_path / "out.json"}"\n'
        )
        assert main(["pipeline", "--config", str(cfg)]) == 0
        assert (tmp_path / "out.json").exists()

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "exp.toml"
        cfg.write_text("bogus = 3\n")
        assert main(["pipeline", "--config", str(cfg)]) == 2


def test_unknown_flag_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["generate", "--bogus"])
    assert err.value.code == 2
