import io
import json

import pandas as pd
import pytest

from conftest import make_cluster_chain
from knitting.circuit import parse_circuit, serialize_circuit
from knitting.htn import htn_from_json
from knitting.models import CompileReport, KnitResult
from knitting.simulator import exact_expectation
from main import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK, build_parser, main
from utils.report_writer import BENCH_COLUMNS, PARETO_COLUMNS


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("DEBUG_MODE", raising=False)
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "output"))
    monkeypatch.setenv("LANGUAGE", "en")
    return tmp_path


@pytest.fixture
def chain_file(workspace):
    circuit, _ = make_cluster_chain(3, seed=5)
    path = workspace / "chain.json"
    path.write_text(serialize_circuit(circuit), encoding="utf-8")
    return circuit, str(path)


SMALL = ["--max-qubits", "2", "--leaf-qubits", "2", "--trials", "6", "--seed", "1"]


def test_compile_writes_the_artifacts(chain_file, workspace, capsys):
    _, path = chain_file
    out_dir = workspace / "compiled"

    assert main(["compile", path, *SMALL, "--out", str(out_dir)]) == EXIT_OK

    report = CompileReport.model_validate_json(capsys.readouterr().out)
    assert report.num_cuts == len(report.cuts) == report.num_gate_cuts + report.num_wire_cuts
    assert max(report.subcircuit_widths) <= 2
    assert report.trials == 6
    assert CompileReport.model_validate_json((out_dir / "compile_report.json").read_text()) == report
    htn = htn_from_json((out_dir / "htn.json").read_text())
    assert len(htn.qts) == report.num_subcircuits
    pareto = pd.read_csv(out_dir / "pareto.csv")
    assert list(pareto.columns) == PARETO_COLUMNS + ["knee"]
    assert pareto["knee"].sum() == 1
    assert int(pareto.loc[pareto["knee"], "trial_id"].iloc[0]) == report.trial_id


def test_compile_defaults_to_the_output_dir(chain_file, workspace, capsys):
    _, path = chain_file

    assert main(["compile", path, *SMALL]) == EXIT_OK

    assert (workspace / "output" / "htn.json").exists()


def test_run_reconstructs_the_expectation(chain_file, workspace, capsys):
    circuit, path = chain_file
    out_dir = workspace / "compiled"
    main(["compile", path, *SMALL, "--out", str(out_dir)])
    capsys.readouterr()

    assert main(["run", str(out_dir / "htn.json"), "--no-timings"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["run", str(out_dir / "htn.json"), "--no-timings", "--threads", "4"]) == EXIT_OK
    second = capsys.readouterr().out

    result = KnitResult.model_validate_json(first)
    assert result.expectation == pytest.approx(exact_expectation(circuit), abs=1e-9)
    assert first == second


def test_run_with_samples_truncates(chain_file, workspace, capsys):
    _, path = chain_file
    out_dir = workspace / "compiled"
    main(["compile", path, *SMALL, "--out", str(out_dir)])
    capsys.readouterr()

    main(["run", str(out_dir / "htn.json")])
    exhaustive = KnitResult.model_validate_json(capsys.readouterr().out)
    assert main(["run", str(out_dir / "htn.json"), "--samples", "2", "--seed", "3"]) == EXIT_OK
    sampled = KnitResult.model_validate_json(capsys.readouterr().out)

    assert sampled.num_subcircuit_runs < exhaustive.num_subcircuit_runs


def test_knit_writes_out_and_session_log(chain_file, workspace, capsys):
    circuit, path = chain_file
    result_path = workspace / "result.json"
    log_path = workspace / "session.json"

    code = main(["knit", path, *SMALL, "--no-timings", "--out", str(result_path), "--session-log", str(log_path)])

    assert code == EXIT_OK
    printed = capsys.readouterr().out
    assert result_path.read_text() == printed
    assert KnitResult.model_validate_json(printed).expectation == pytest.approx(exact_expectation(circuit), abs=1e-9)
    session = json.loads(log_path.read_text())
    assert session["metadata"]["command"] == "knit"
    assert [entry["phase"] for entry in session["session_info"]["session_logs"]] == [
        "compile", "evaluate", "path", "contract"]
    assert session["results"]["knit_result"] is not None


def test_knit_in_shots_mode(bell_like_circuit, workspace, capsys):
    path = workspace / "bell.json"
    path.write_text(serialize_circuit(bell_like_circuit), encoding="utf-8")

    code = main(["knit", str(path), "--max-qubits", "1", "--compression", "wire", "--trials", "3",
                 "--mode", "shots", "--shots", "20000"])

    assert code == EXIT_OK
    result = KnitResult.model_validate_json(capsys.readouterr().out)
    assert result.num_subcircuit_runs == 10
    assert result.expectation == pytest.approx(exact_expectation(bell_like_circuit), abs=0.2)


def test_compile_is_deterministic_across_threads(chain_file, workspace, capsys):
    _, path = chain_file
    outputs = []
    for threads in ("1", "8"):
        out_dir = workspace / f"t{threads}"
        main(["compile", path, *SMALL, "--threads", threads, "--out", str(out_dir)])
        outputs.append((capsys.readouterr().out, (out_dir / "htn.json").read_text()))

    assert outputs[0] == outputs[1]


def test_bench_writes_circuits_and_csv(workspace, capsys):
    out_dir = workspace / "bench"

    code = main(["bench", "vqe", "--qubits", "4", "6", "--layers", "1", "--max-qubits", "3", "--leaf-qubits", "3",
                 "--trials", "5", "--out", str(out_dir), "--no-timings", "--run"])

    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == BENCH_COLUMNS + ["expectation", "run_ms"]
    assert list(frame["n"]) == [4, 6]
    assert (frame["compile_ms"] == 0.0).all()
    circuit = parse_circuit((out_dir / "vqe_4.json").read_text())
    assert circuit.meta == {"family": "vqe", "qubits": 4, "layers": 1, "seed": 0}
    assert frame.loc[0, "expectation"] == pytest.approx(exact_expectation(circuit), abs=1e-9)
    assert pd.read_csv(out_dir / "bench_vqe.csv").equals(frame)


def test_bench_qaoa2_options(workspace, capsys):
    out_dir = workspace / "bench"

    code = main(["bench", "qaoa2", "--qubits", "6", "--cluster-size", "3", "--inter-edges", "2", "--max-qubits", "4",
                 "--trials", "4", "--out", str(out_dir)])

    assert code == EXIT_OK
    circuit = parse_circuit((out_dir / "qaoa2_6.json").read_text())
    assert circuit.meta["cluster_size"] == 3
    assert circuit.meta["inter_edges"] == 2


def test_pareto_prints_the_front(chain_file, workspace, capsys):
    _, path = chain_file
    out_file = workspace / "front.csv"

    assert main(["pareto", path, *SMALL, "--out", str(out_file)]) == EXIT_OK

    printed = capsys.readouterr().out
    assert out_file.read_text() == printed
    frame = pd.read_csv(io.StringIO(printed))
    assert frame["knee"].sum() == 1
    assert list(frame["pp_cost"]) == sorted(frame["pp_cost"])


@pytest.mark.parametrize("command", ["compile", "knit", "pareto"])
def test_unreachable_bound_exits_with_two(command, chain_file):
    _, path = chain_file

    assert main([command, path, "--max-qubits", "2", "--max-overhead", "1", "--trials", "3"]) == EXIT_INFEASIBLE


def test_malformed_circuit_exits_with_one(workspace):
    bad = workspace / "bad.json"
    bad.write_text('{"qubits": 2, "ops": [{"gate": "cx", "qubits": [0, 1]}], "observable": "ZZ"}')

    assert main(["knit", str(bad)]) == EXIT_ERROR


def test_missing_file_exits_with_one(workspace):
    assert main(["compile", str(workspace / "missing.json")]) == EXIT_ERROR


def test_executor_failure_names_the_tensor(bell_like_circuit, workspace, monkeypatch, capsys):
    monkeypatch.setenv("KNITGRID_QUBIT_CAP", "1")
    path = workspace / "bell.json"
    path.write_text(serialize_circuit(bell_like_circuit), encoding="utf-8")

    assert main(["knit", str(path), "--max-qubits", "2", "--leaf-qubits", "2", "--trials", "2"]) == EXIT_ERROR

    assert "Quantum tensor qt0 failed at []" in capsys.readouterr().err


def test_malformed_htn_exits_with_one(workspace):
    bad = workspace / "htn.json"
    bad.write_text('{"qts": []}')

    assert main(["run", str(bad)]) == EXIT_ERROR


@pytest.mark.parametrize("flags", [["--trials", "0"], ["--samples", "0"], ["--shots", "0"], ["--max-qubits", "0"],
                                   ["--max-qubits", "2", "--leaf-qubits", "5"]])
def test_invalid_configuration_exits_with_one(flags, chain_file):
    _, path = chain_file

    assert main(["knit", path, *flags]) == EXIT_ERROR


def test_unknown_family_is_rejected_by_the_parser():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["bench", "ghz", "--qubits", "4"])


def test_parser_defaults():
    args = build_parser().parse_args(["knit", "circuit.json"])

    assert args.max_qubits == 15
    assert args.trials == 200
    assert args.shots == 20000
    assert args.samples is None
    assert args.mode == "exact"
    assert args.leaf_qubits is None
    assert build_parser().parse_args(["knit", "c.json", "--leaf-qubits", "4", "2"]).leaf_qubits == [4, 2]
