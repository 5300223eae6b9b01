"""
Pydantic Model Definitions - run configuration and result documents
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from knitting.ir import CompressionMethod


class ExecutionMode(str, Enum):
    EXACT = "exact"
    SHOTS = "shots"


class RunConfig(BaseModel):
    """Per-invocation configuration"""
    max_qubits: int = Field(default=15, ge=1, description="Largest subcircuit width")
    leaf_qubits: Optional[List[int]] = Field(default=None,
                                             description="Leaf sizes to search; None halves max_qubits down to 1")
    max_overhead: float = Field(default=1e15, gt=0, description="Postprocessing FLOP bound")
    trials: int = Field(default=200, ge=1, description="Hyperparameter search trials")
    seed: int = Field(default=0, description="Base seed for every random choice")
    mode: ExecutionMode = Field(default=ExecutionMode.EXACT, description="Subcircuit evaluation mode")
    shots: int = Field(default=20000, ge=1, description="Shots per quantum tensor in shots mode")
    samples: Optional[int] = Field(default=None, ge=1, description="QPD samples; None keeps every coordinate")
    compression: Optional[CompressionMethod] = Field(default=None, description="Restrict the search to one compression")
    out: Optional[str] = Field(default=None, description="Output file or directory")
    threads: int = Field(default=1, ge=1, description="Worker threads")
    no_timings: bool = Field(default=False, description="Report zero phase times")

    @model_validator(mode="after")
    def _check_leaf_qubits(self) -> "RunConfig":
        if self.leaf_qubits is not None and (not self.leaf_qubits
                                             or any(not 1 <= q <= self.max_qubits for q in self.leaf_qubits)):
            raise ValueError(f"leaf sizes must lie in 1..{self.max_qubits}, got {self.leaf_qubits}")
        return self


class PhaseTimes(BaseModel):
    """Wall time per pipeline phase (ms)"""
    compile: float = 0.0
    evaluate: float = 0.0
    path: float = 0.0
    contract: float = 0.0


class KnitResult(BaseModel):
    """Result of one knitting run"""
    expectation: float = Field(description="Reconstructed expectation value")
    pp_cost_flops: float = Field(description="Multiplications spent by the executed contraction path")
    num_subcircuit_runs: int = Field(description="Subcircuit instances evaluated")
    phase_times_ms: PhaseTimes = Field(default_factory=PhaseTimes, description="Per-phase wall times")


class CompileReport(BaseModel):
    """Summary of the selected candidate"""
    pp_cost: float = Field(description="Tree cost of the selected candidate (FLOPs)")
    naive_cost: float = Field(description="Brute-force knitting cost for the same cuts")
    est_error: float = Field(description="Largest estimated subcircuit error")
    num_cuts: int
    num_gate_cuts: int
    num_wire_cuts: int
    num_subcircuits: int
    subcircuit_widths: List[int] = Field(description="Qubits per subcircuit")
    cuts: List[str] = Field(description="Names of the cut IR edges")
    trial_id: int
    params: Dict[str, Any] = Field(description="Hyperparameters of the selected trial")
    trials: int
    front_size: int
