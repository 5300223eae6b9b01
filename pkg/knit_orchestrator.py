"""
Knitting Orchestrator - compile and run phases of the pipeline

compile: hyperparameter search -> Pareto front -> knee point -> h-TN
run:     simplify -> QPD sampling -> QT evaluation (with path search alongside) -> contraction
"""

import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from config.i18n_config import t
from config.settings import KnitGridSettings
from knitting.circuit import Circuit
from knitting.contraction import ContractionPath, contract, find_path
from knitting.errors import KnitGridError
from knitting.executor import BaseExecutor, StatevectorExecutor
from knitting.htn import HybridTensorNetwork, evaluate_qt, generate_htn, sample_qpd, simplify
from knitting.ir import EdgeKind, leaf_width
from knitting.models import CompileReport, KnitResult, PhaseTimes, RunConfig
from knitting.optimizer import Candidate, ErrorModel, SearchSpace, hyperopt, select_knee
from state_manager import KnitState, add_error, add_warning, create_initial_state, log_phase_execution, phase_times
from utils.debug_utils import debug_log, progress
from utils.format_utils import format_flops, format_ms
from utils.seed_utils import derive_seed

Selector = Callable[[Sequence[Candidate]], Candidate]

# keeps QT evaluation seeds apart from QPD sampling seeds
_EVALUATION_STREAM = 1
_SAMPLING_STREAM = 2


@dataclass
class CompileOutcome:
    candidate: Candidate
    front: List[Candidate]
    htn: HybridTensorNetwork
    report: CompileReport


def search_space(config: RunConfig) -> SearchSpace:
    """Hyperparameter grid for a run configuration"""
    space = SearchSpace(max_qubits=config.max_qubits, max_overhead=config.max_overhead, leaf_qubits=config.leaf_qubits)
    return space.restrict(config.compression)


def build_report(chosen: Candidate, front: Sequence[Candidate], trials: int) -> CompileReport:
    cuts = chosen.cut_edges()
    gate_cuts = sum(1 for e in cuts if e.kind is EdgeKind.GATE)
    leaves = [leaf for leaf in chosen.tree.leaves() if leaf.vertices]
    return CompileReport(
        pp_cost=chosen.pp_cost,
        naive_cost=float(chosen.naive_cost()) if cuts else 0.0,
        est_error=chosen.est_error,
        num_cuts=len(cuts),
        num_gate_cuts=gate_cuts,
        num_wire_cuts=len(cuts) - gate_cuts,
        num_subcircuits=len(leaves),
        subcircuit_widths=[leaf_width(chosen.ir, leaf.vertices) for leaf in leaves],
        cuts=[e.name for e in cuts],
        trial_id=chosen.trial_id,
        params=chosen.params.model_dump(mode="json"),
        trials=trials,
        front_size=len(front),
    )


class KnitOrchestrator:
    """Drives one circuit through the knitting pipeline"""

    def __init__(self, config: RunConfig, settings: Optional[KnitGridSettings] = None,
                 executor: Optional[BaseExecutor] = None, selector: Optional[Selector] = None,
                 error_model: Optional[ErrorModel] = None):
        self.config = config
        self.settings = settings or KnitGridSettings()
        self.executor = executor or StatevectorExecutor(qubit_cap=self.settings.qubit_cap)
        self.selector = selector or select_knee
        self.error_model = error_model

    def compile(self, circuit: Circuit, state: Optional[KnitState] = None) -> CompileOutcome:
        """Search the hyperparameter space and generate the h-TN of the selected candidate"""
        state = state if state is not None else create_initial_state("compile")
        singles, doubles = circuit.count_ops()
        progress(f"🔧 {t('workflow.orchestrator.compile_start', qubits=circuit.num_qubits, ops=singles + doubles)}")
        started = time.perf_counter()
        try:
            front = hyperopt(circuit, self.config.trials, search_space(self.config), self.config.seed,
                             threads=self.config.threads, error_model=self.error_model)
            progress(f"📈 {t('workflow.orchestrator.trials_done', trials=self.config.trials, front=len(front))}")

            chosen = self.selector(front)
            htn = simplify(generate_htn(chosen, circuit))
            report = build_report(chosen, front, self.config.trials)
            progress(f"✂️  {t('workflow.orchestrator.selected', trial=chosen.trial_id, cuts=report.num_cuts, leaves=report.num_subcircuits, cost=format_flops(chosen.pp_cost), error=f'{chosen.est_error:.4g}')}")
        except KnitGridError as e:
            log_phase_execution(state, "compile", {"success": False, "error": str(e),
                                                   "elapsed_ms": _elapsed_ms(started)})
            debug_log(f"compile failed: {traceback.format_exc()}")
            raise

        elapsed = _elapsed_ms(started)
        log_phase_execution(state, "compile", {"success": True, "elapsed_ms": elapsed})
        state["compile_report"] = report.model_dump(mode="json")
        progress(f"✅ {t('workflow.orchestrator.compile_complete', elapsed=format_ms(elapsed))}")
        return CompileOutcome(candidate=chosen, front=front, htn=htn, report=report)

    def run(self, htn: HybridTensorNetwork, state: Optional[KnitState] = None) -> KnitResult:
        """Evaluate and contract an h-TN"""
        state = state if state is not None else create_initial_state("run")
        config = self.config
        progress(f"🚀 {t('workflow.orchestrator.run_start', qts=len(htn.qts), cts=len(htn.cts))}")
        try:
            htn = simplify(htn)
            if not htn.plan.exhaustive and config.samples is not None:
                add_warning(state, f"h-TN is already sampled with {htn.plan.total_samples} samples; --samples ignored")
            elif config.samples is not None:
                progress(f"🎲 {t('workflow.orchestrator.sampling', samples=config.samples)}")
                htn, _ = sample_qpd(htn, config.samples, derive_seed(config.seed, _SAMPLING_STREAM))
            cts = htn.indexed_cts()
            signatures = [qt.signature for qt in htn.qts] + [ct.indices for ct in cts]

            with ThreadPoolExecutor(max_workers=1) as planner:
                path_future = planner.submit(self._timed_path, signatures)
                started = time.perf_counter()
                evaluated = [
                    evaluate_qt(qt, self.executor, mode=config.mode, shots=config.shots,
                                seed=derive_seed(config.seed, _EVALUATION_STREAM, position), threads=config.threads)
                    for position, qt in enumerate(htn.qts)
                ]
                evaluate_ms = _elapsed_ms(started)
                path, path_ms = path_future.result()
            log_phase_execution(state, "evaluate", {"success": True, "elapsed_ms": evaluate_ms})
            log_phase_execution(state, "path", {"success": True, "elapsed_ms": path_ms})
            progress(f"⚛️  {t('workflow.orchestrator.evaluate_complete', runs=htn.num_subcircuit_runs, elapsed=format_ms(evaluate_ms))}")
            progress(f"🧭 {t('workflow.orchestrator.path_complete', steps=len(path.steps), cost=format_flops(path.cost))}")

            started = time.perf_counter()
            tensors = [(ct.indices, ct.data) for ct in evaluated + cts]
            value = contract(tensors, path) * htn.scalar_factor()
            log_phase_execution(state, "contract", {"success": True, "elapsed_ms": _elapsed_ms(started)})
        except KnitGridError as e:
            add_error(state, f"run: {e}")
            debug_log(f"run failed: {traceback.format_exc()}")
            raise

        times = PhaseTimes() if config.no_timings else PhaseTimes(**phase_times(state))
        result = KnitResult(expectation=value, pp_cost_flops=float(path.cost),
                            num_subcircuit_runs=htn.num_subcircuit_runs, phase_times_ms=times)
        state["knit_result"] = result.model_dump(mode="json")
        progress(f"🎯 {t('workflow.orchestrator.contract_complete', value=f'{value:.10g}')}")
        return result

    def knit(self, circuit: Circuit, state: Optional[KnitState] = None) -> KnitResult:
        state = state if state is not None else create_initial_state("knit")
        outcome = self.compile(circuit, state)
        result = self.run(outcome.htn, state)
        progress(f"🏁 {t('workflow.orchestrator.completed')}")
        return result

    @staticmethod
    def _timed_path(signatures) -> "tuple[ContractionPath, float]":
        started = time.perf_counter()
        path = find_path(signatures) if signatures else ContractionPath()
        return path, _elapsed_ms(started)


def _elapsed_ms(started: float) -> float:
    return (time.perf_counter() - started) * 1000.0


def knit(circuit: Circuit, config: Optional[RunConfig] = None, executor: Optional[BaseExecutor] = None,
         selector: Optional[Selector] = None, settings: Optional[KnitGridSettings] = None) -> KnitResult:
    """End-to-end knitting of one circuit"""
    orchestrator = KnitOrchestrator(config or RunConfig(), settings=settings, executor=executor, selector=selector)
    return orchestrator.knit(circuit)
