"""
Executors - common foundation for subcircuit backends
"""

import time
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from config.settings import DEFAULT_QUBIT_CAP
from knitting.circuit import Circuit
from knitting.errors import KnitGridError
from knitting.simulator import exact_expectation, sample_expectation
from utils.debug_utils import debug_log


class BaseExecutor(ABC):
    """Base class for all executors"""

    def __init__(self, executor_name: str, qubit_cap: int = DEFAULT_QUBIT_CAP):
        self.executor_name = executor_name
        self.qubit_cap = qubit_cap

    @abstractmethod
    def expectation(self, circuit: Circuit) -> float:
        """Exact expectation of the circuit's observable"""

    @abstractmethod
    def sample(self, circuit: Circuit, shots: int, seed: int) -> float:
        """Shot-based estimate of the circuit's observable"""

    def execute(self, circuit: Circuit, shots: Optional[int] = None, seed: int = 0) -> Dict[str, Any]:
        """Run one circuit; failures come back as an error response instead of raising"""
        started = time.perf_counter()
        try:
            if shots is None:
                value = self.expectation(circuit)
            else:
                value = self.sample(circuit, shots, seed)
        except (KnitGridError, ValueError) as e:
            debug_log(f"[{self.executor_name}] execution failed: {e}")
            return self._create_error_response(e)
        return {
            "success": True,
            "value": value,
            "_executor_metadata": {
                "executor_name": self.executor_name,
                "elapsed_ms": (time.perf_counter() - started) * 1000.0,
                "shots": shots,
            },
        }

    def _create_error_response(self, error: Exception) -> Dict[str, Any]:
        """Standard format for error responses"""
        return {
            "success": False,
            "error": str(error),
            "exception": error,
            "_executor_metadata": {"executor_name": self.executor_name, "status": "error"},
        }


class StatevectorExecutor(BaseExecutor):
    """Mock QPU backed by the built-in statevector simulator"""

    def __init__(self, qubit_cap: int = DEFAULT_QUBIT_CAP):
        super().__init__("StatevectorExecutor", qubit_cap)

    def expectation(self, circuit: Circuit) -> float:
        return exact_expectation(circuit, qubit_cap=self.qubit_cap)

    def sample(self, circuit: Circuit, shots: int, seed: int) -> float:
        return sample_expectation(circuit, shots=shots, seed=seed, qubit_cap=self.qubit_cap)
