"""
knitgrid - Main Application
Circuit knitting compiler and runtime: compile, run, knit, bench, pareto
"""

import argparse
import sys
import time
import traceback
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from config.i18n_config import setup_i18n, t
from config.settings import KnitGridSettings
from knit_orchestrator import KnitOrchestrator, search_space
from knitting.benchmarks import FAMILIES, generate
from knitting.circuit import Circuit, parse_circuit, serialize_circuit
from knitting.errors import ExecutorError, InfeasibleError, KnitGridError
from knitting.htn import htn_from_json, htn_to_json
from knitting.ir import CompressionMethod
from knitting.models import ExecutionMode, RunConfig
from knitting.optimizer import hyperopt, select_knee
from state_manager import create_initial_state, export_state_to_json, get_run_summary
from utils.debug_utils import debug_log, progress
from utils.report_writer import ReportWriter, frame_to_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class KnitGridApp:
    """Command dispatcher"""

    def __init__(self, settings: KnitGridSettings):
        self.settings = settings
        if settings.debug_mode:
            debug_log(t("app.main.debug_mode"))
            debug_log(t("app.config.settings", threads=settings.threads, cap=settings.qubit_cap,
                        output_dir=settings.output_dir))

    def build_config(self, args: argparse.Namespace) -> RunConfig:
        return RunConfig(
            max_qubits=args.max_qubits,
            leaf_qubits=args.leaf_qubits,
            max_overhead=args.max_overhead,
            trials=args.trials,
            seed=args.seed,
            mode=args.mode,
            shots=args.shots,
            samples=args.samples,
            compression=args.compression,
            out=args.out,
            threads=args.threads or self.settings.threads,
            no_timings=args.no_timings,
        )

    def orchestrator(self, config: RunConfig) -> KnitOrchestrator:
        return KnitOrchestrator(config, settings=self.settings)

    @staticmethod
    def read_circuit(path: str) -> Circuit:
        with open(path, "r", encoding="utf-8") as f:
            return parse_circuit(f.read())

    def cmd_compile(self, args: argparse.Namespace) -> int:
        config = self.build_config(args)
        state = create_initial_state("compile", args.circuit, config.model_dump(mode="json"))
        circuit = self.read_circuit(args.circuit)
        outcome = self.orchestrator(config).compile(circuit, state)

        writer = ReportWriter(config.out or self.settings.output_dir)
        htn_path = writer.write_text(htn_to_json(outcome.htn), "htn.json")
        report_path = writer.write_model(outcome.report, "compile_report.json")
        pareto = writer.pareto_frame([c.summary_row() for c in outcome.front], outcome.candidate.trial_id)
        pareto_path = writer.write_csv(pareto, "pareto.csv")
        for path in (htn_path, report_path, pareto_path):
            progress(f"📄 {t('app.output.written', path=path)}")
        self._export_session(args, state)
        print(outcome.report.model_dump_json(indent=2))
        return EXIT_OK

    def cmd_run(self, args: argparse.Namespace) -> int:
        config = self.build_config(args)
        state = create_initial_state("run", args.htn, config.model_dump(mode="json"))
        with open(args.htn, "r", encoding="utf-8") as f:
            htn = htn_from_json(f.read())
        result = self.orchestrator(config).run(htn, state)
        self._emit_result(result.model_dump_json(), config.out)
        self._export_session(args, state)
        return EXIT_OK

    def cmd_knit(self, args: argparse.Namespace) -> int:
        config = self.build_config(args)
        state = create_initial_state("knit", args.circuit, config.model_dump(mode="json"))
        circuit = self.read_circuit(args.circuit)
        result = self.orchestrator(config).knit(circuit, state)
        self._emit_result(result.model_dump_json(), config.out)
        self._export_session(args, state)
        return EXIT_OK

    def cmd_bench(self, args: argparse.Namespace) -> int:
        config = self.build_config(args)
        writer = ReportWriter(config.out or self.settings.output_dir)
        options: Dict[str, Any] = {}
        if args.family in ("vqe", "qml"):
            options["layers"] = args.layers
        else:
            options["cluster_size"] = args.cluster_size
            options["reps"] = args.reps
            if args.family == "qaoa2":
                options["inter_edges"] = args.inter_edges

        rows: List[Dict[str, Any]] = []
        for n in args.qubits:
            circuit = generate(args.family, n, seed=config.seed, **options)
            writer.write_text(serialize_circuit(circuit), f"{args.family}_{n}.json")
            orchestrator = self.orchestrator(config)
            started = time.perf_counter()
            outcome = orchestrator.compile(circuit)
            compile_ms = 0.0 if config.no_timings else (time.perf_counter() - started) * 1000.0
            report = outcome.report
            row = {
                "family": args.family,
                "n": n,
                "cuts": report.num_cuts,
                "pp_cost_ours": report.pp_cost,
                "pp_cost_naive": report.naive_cost,
                "est_error": report.est_error,
                "compile_ms": compile_ms,
            }
            if args.run:
                started = time.perf_counter()
                row["expectation"] = orchestrator.run(outcome.htn).expectation
                row["run_ms"] = 0.0 if config.no_timings else (time.perf_counter() - started) * 1000.0
            progress(f"📊 {t('app.bench.row', family=args.family, n=n, cuts=report.num_cuts, ours=report.pp_cost, naive=report.naive_cost)}")
            rows.append(row)

        frame = writer.bench_frame(rows)
        path = writer.write_csv(frame, f"bench_{args.family}.csv")
        progress(f"📄 {t('app.output.written', path=path)}")
        sys.stdout.write(frame_to_csv(frame))
        return EXIT_OK

    def cmd_pareto(self, args: argparse.Namespace) -> int:
        config = self.build_config(args)
        circuit = self.read_circuit(args.circuit)
        front = hyperopt(circuit, config.trials, search_space(config), config.seed, threads=config.threads)
        knee = select_knee(front)
        frame = ReportWriter.pareto_frame([c.summary_row() for c in front], knee.trial_id)
        csv_text = frame_to_csv(frame)
        if config.out:
            with open(config.out, "w", encoding="utf-8") as f:
                f.write(csv_text)
        sys.stdout.write(csv_text)
        return EXIT_OK

    @staticmethod
    def _emit_result(text: str, out: Optional[str]):
        if out:
            with open(out, "w", encoding="utf-8") as f:
                f.write(text + "\n")
        print(text)

    @staticmethod
    def _export_session(args: argparse.Namespace, state):
        debug_log(f"session summary: {get_run_summary(state)}")
        for warning in state.get("warnings", []):
            progress(f"⚠️ {warning}")
        if getattr(args, "session_log", None):
            if export_state_to_json(state, args.session_log):
                progress(f"📄 {t('app.output.written', path=args.session_log)}")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-qubits", type=int, default=15, help="largest subcircuit width (default 15)")
    common.add_argument("--leaf-qubits", type=int, nargs="+", default=None,
                        help="leaf sizes to search (default: halve --max-qubits down to 1)")
    common.add_argument("--max-overhead", type=float, default=1e15, help="postprocessing FLOP bound")
    common.add_argument("--trials", type=int, default=200, help="hyperparameter search trials (default 200)")
    common.add_argument("--seed", type=int, default=0, help="base seed")
    common.add_argument("--mode", choices=[m.value for m in ExecutionMode], default="exact")
    common.add_argument("--shots", type=int, default=20000, help="shots per quantum tensor in shots mode")
    common.add_argument("--samples", type=int, default=None, help="QPD samples (default: exhaustive)")
    common.add_argument("--compression", choices=[c.value for c in CompressionMethod], default=None)
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default KNITGRID_THREADS)")
    common.add_argument("--no-timings", action="store_true", help="report zero phase times")
    common.add_argument("--session-log", default=None, help="write the session log JSON here")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="knitgrid", description="Circuit knitting compiler and runtime")
    sub = parser.add_subparsers(dest="command", required=True)

    compile_cmd = sub.add_parser("compile", parents=[common], help="compile a circuit into an h-TN")
    compile_cmd.add_argument("circuit")

    run_cmd = sub.add_parser("run", parents=[common], help="evaluate and contract an h-TN file")
    run_cmd.add_argument("htn")

    knit_cmd = sub.add_parser("knit", parents=[common], help="compile and run in one go")
    knit_cmd.add_argument("circuit")

    bench_cmd = sub.add_parser("bench", parents=[common], help="benchmark a circuit family")
    bench_cmd.add_argument("family", choices=sorted(FAMILIES))
    bench_cmd.add_argument("--qubits", type=int, nargs="+", required=True)
    bench_cmd.add_argument("--layers", type=int, default=2, help="vqe/qml layers")
    bench_cmd.add_argument("--cluster-size", type=int, default=5, help="qaoa cluster size")
    bench_cmd.add_argument("--inter-edges", type=int, default=1, help="qaoa2 edges between adjacent clusters")
    bench_cmd.add_argument("--reps", type=int, default=1, help="qaoa layers")
    bench_cmd.add_argument("--run", action="store_true", help="also knit each circuit in the chosen mode")

    pareto_cmd = sub.add_parser("pareto", parents=[common], help="print the Pareto front of a circuit")
    pareto_cmd.add_argument("circuit")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function - Entry point of the application"""
    load_dotenv()
    settings = KnitGridSettings.from_env()
    setup_i18n(settings.language)
    args = build_parser().parse_args(argv)

    app = KnitGridApp(settings)
    handlers = {
        "compile": app.cmd_compile,
        "run": app.cmd_run,
        "knit": app.cmd_knit,
        "bench": app.cmd_bench,
        "pareto": app.cmd_pareto,
    }
    try:
        return handlers[args.command](args)
    except InfeasibleError as e:
        progress(f"❌ {t('errors.compile.infeasible', error=str(e))}")
        return EXIT_INFEASIBLE
    except ExecutorError as e:
        progress(f"❌ {t('errors.executor.failed', tensor=e.tensor_name, coordinate=list(e.coordinate), error=str(e.cause))}")
        return EXIT_ERROR
    except ValidationError as e:
        progress(f"❌ {t('errors.config.invalid', error=str(e))}")
        return EXIT_ERROR
    except (KnitGridError, ValueError) as e:
        progress(f"❌ {t('errors.system.failed', error=str(e))}")
        debug_log(f"Error details: {traceback.format_exc()}")
        return EXIT_ERROR
    except OSError as e:
        progress(f"❌ {t('errors.io.file', error=str(e))}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        progress(f"⚠️ {t('errors.system.user_interrupt')}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
