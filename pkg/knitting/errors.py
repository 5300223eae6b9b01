"""
Exception hierarchy for the knitting library
"""

from typing import Optional, Tuple


class KnitGridError(Exception):
    """Base class for all library errors"""


class CircuitFormatError(KnitGridError, ValueError):
    """Malformed circuit document or invalid circuit data"""


class SimulationError(KnitGridError):
    """Simulator could not evaluate a circuit"""


class QubitCapExceededError(SimulationError):
    def __init__(self, num_qubits: int, cap: int):
        super().__init__(f"Circuit has {num_qubits} qubits, simulator cap is {cap}")
        self.num_qubits = num_qubits
        self.cap = cap


class ObservableMismatchError(SimulationError, ValueError):
    """Observable length does not match the circuit width"""


class QpdError(KnitGridError, ValueError):
    """Requested decomposition does not exist or failed validation"""


class CompressionError(KnitGridError, ValueError):
    """IR compression requested on an unsuitable graph"""


class OptimizationError(KnitGridError):
    """Optimizer could not produce a contraction tree"""


class InfeasibleError(OptimizationError):
    """No candidate satisfies termination within the overhead bound"""


class HtnError(KnitGridError):
    """Malformed hybrid tensor network"""


class DimensionMismatchError(HtnError, ValueError):
    """Shared index has different dimensions on its two tensors"""


class ExecutorError(KnitGridError):
    """Executor failed on one coordinate of a quantum tensor"""

    def __init__(self, tensor_name: str, coordinate: Tuple[int, ...], cause: Optional[BaseException] = None):
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"Executor failed on {tensor_name}{list(coordinate)}{detail}")
        self.tensor_name = tensor_name
        self.coordinate = tuple(coordinate)
        self.cause = cause
