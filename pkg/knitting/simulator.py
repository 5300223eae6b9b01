"""
Statevector simulator used as the mock QPU

Gates are applied as axis updates on a (2,)*n amplitude tensor, never as full
matrices. A MEAS op splits every branch into its two unnormalized projections,
the outcome-1 branch with a flipped sign, so expectation values carry the
(-1)^outcome factor that signed measurement instantiations need.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config.settings import DEFAULT_QUBIT_CAP
from knitting.circuit import Circuit, GateKind, Op, PauliObservable
from knitting.errors import ObservableMismatchError, QubitCapExceededError, SimulationError
from utils.debug_utils import debug_log

_SQRT2_INV = 1 / np.sqrt(2)
_BRANCH_CUTOFF = 1e-14

_FIXED_GATES = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
}

# State preparations act on a fresh |0> qubit
_PREPARATIONS = {
    GateKind.PREP0: (),
    GateKind.PREP1: (GateKind.X,),
    GateKind.PREPPLUS: (GateKind.H,),
    GateKind.PREPI: (GateKind.H, GateKind.S),
}


def _rotation(kind: GateKind, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex)


def _slice(n: int, assignments: dict) -> tuple:
    index = [slice(None)] * n
    for qubit, value in assignments.items():
        index[qubit] = value
    return tuple(index)


@dataclass
class State:
    """One (possibly unnormalized) branch of the simulation"""
    amplitudes: np.ndarray
    num_qubits: int
    norm_weight: float = 1.0
    sign: int = 1

    @classmethod
    def zero(cls, num_qubits: int) -> "State":
        amplitudes = np.zeros((2,) * num_qubits, dtype=complex)
        amplitudes[(0,) * num_qubits] = 1.0
        return cls(amplitudes=amplitudes, num_qubits=num_qubits)

    def apply_matrix(self, matrix: np.ndarray, qubit: int):
        updated = np.tensordot(matrix, self.amplitudes, axes=([1], [qubit]))
        self.amplitudes = np.moveaxis(updated, 0, qubit)

    def apply(self, op: Op):
        kind = op.kind
        if kind in _FIXED_GATES:
            self.apply_matrix(_FIXED_GATES[kind], op.qubits[0])
        elif kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
            self.apply_matrix(_rotation(kind, op.param), op.qubits[0])
        elif kind is GateKind.CZ:
            q0, q1 = op.qubits
            self.amplitudes = np.array(self.amplitudes)
            self.amplitudes[_slice(self.num_qubits, {q0: 1, q1: 1})] *= -1
        elif kind is GateKind.RZZ:
            q0, q1 = op.qubits
            same, differ = np.exp(-0.5j * op.param), np.exp(0.5j * op.param)
            self.amplitudes = np.array(self.amplitudes)
            for a in (0, 1):
                for b in (0, 1):
                    self.amplitudes[_slice(self.num_qubits, {q0: a, q1: b})] *= same if a == b else differ
        elif kind in _PREPARATIONS:
            for gate in _PREPARATIONS[kind]:
                self.apply_matrix(_FIXED_GATES[gate], op.qubits[0])
        elif kind is GateKind.PLACEHOLDER:
            raise SimulationError(f"unsubstituted placeholder '{op.label}' at op {op.index}")
        else:
            raise SimulationError(f"cannot apply {kind.value} as a gate")

    def project(self, qubit: int, outcome: int) -> "State":
        """Unnormalized projection onto |outcome> of qubit; outcome 1 flips the sign"""
        amplitudes = np.zeros_like(self.amplitudes)
        keep = _slice(self.num_qubits, {qubit: outcome})
        amplitudes[keep] = self.amplitudes[keep]
        weight = float(np.vdot(amplitudes, amplitudes).real)
        return State(amplitudes=amplitudes, num_qubits=self.num_qubits, norm_weight=weight,
                     sign=self.sign * (-1 if outcome else 1))

    def pauli_expectation(self, paulis: str) -> float:
        """Unnormalized <psi|P|psi>"""
        phi = np.array(self.amplitudes)
        for qubit, letter in enumerate(paulis):
            if letter == "I":
                continue
            if letter in "XY":
                phi = np.flip(phi, axis=qubit).copy()
            if letter == "Z":
                phi[_slice(self.num_qubits, {qubit: 1})] *= -1
            elif letter == "Y":
                phi[_slice(self.num_qubits, {qubit: 0})] *= -1j
                phi[_slice(self.num_qubits, {qubit: 1})] *= 1j
        value = np.vdot(self.amplitudes, phi)
        return float(value.real)


def _resolve_observable(circuit: Circuit, observable: Optional[PauliObservable]) -> PauliObservable:
    obs = circuit.observable if observable is None else observable
    if isinstance(obs, str):
        obs = PauliObservable(paulis=obs)
    if len(obs) != circuit.num_qubits:
        raise ObservableMismatchError(
            f"observable has {len(obs)} letters for a {circuit.num_qubits}-qubit circuit")
    return obs


def simulate_branches(circuit: Circuit, qubit_cap: Optional[int] = None) -> List[State]:
    """Run the circuit, returning every surviving measurement branch"""
    cap = DEFAULT_QUBIT_CAP if qubit_cap is None else qubit_cap
    if circuit.num_qubits > cap:
        raise QubitCapExceededError(circuit.num_qubits, cap)
    branches = [State.zero(circuit.num_qubits)]
    for op in circuit.ops:
        if op.kind is GateKind.MEAS:
            split: List[State] = []
            for branch in branches:
                for outcome in (0, 1):
                    child = branch.project(op.qubits[0], outcome)
                    if child.norm_weight > _BRANCH_CUTOFF:
                        split.append(child)
            branches = split
        else:
            for branch in branches:
                branch.apply(op)
    return branches


def exact_expectation(circuit: Circuit, observable: Optional[PauliObservable] = None,
                      qubit_cap: Optional[int] = None) -> float:
    """Sum over measurement branches of sign * <psi_b|O|psi_b>"""
    obs = _resolve_observable(circuit, observable)
    branches = simulate_branches(circuit, qubit_cap)
    return float(sum(branch.sign * branch.pauli_expectation(obs.paulis) for branch in branches))


def _branch_statistics(circuit: Circuit, obs: PauliObservable,
                       qubit_cap: Optional[int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    branches = simulate_branches(circuit, qubit_cap)
    weights = np.array([b.norm_weight for b in branches])
    signs = np.array([b.sign for b in branches], dtype=float)
    means = np.array([b.pauli_expectation(obs.paulis) / b.norm_weight for b in branches])
    return weights / weights.sum(), signs, np.clip(means, -1.0, 1.0)


def sample_expectation(circuit: Circuit, observable: Optional[PauliObservable] = None, shots: int = 1,
                       seed: int = 0, qubit_cap: Optional[int] = None) -> float:
    """Shot-based estimate: draw a measurement branch, then a +-1 outcome, per shot"""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    obs = _resolve_observable(circuit, observable)
    probabilities, signs, means = _branch_statistics(circuit, obs, qubit_cap)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probabilities)
    total = 0.0
    for count, sign, mean in zip(counts, signs, means):
        if count == 0:
            continue
        plus = rng.binomial(count, (1.0 + mean) / 2.0)
        total += sign * (2 * plus - count)
    debug_log(f"sampled {shots} shots over {len(counts)} branches")
    return float(total / shots)
