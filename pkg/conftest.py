"""
Shared pytest fixtures

dense_expectation is an oracle independent of knitting.simulator: it builds
full 2^n matrices with Kronecker products (qubit 0 is the leftmost factor).
"""

import math
from functools import reduce

import numpy as np
import pytest

from knitting.circuit import Circuit, GateKind, circuit_from_ops

_I = np.eye(2, dtype=complex)
_PAULI = {
    "I": _I,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _single(kind: GateKind, theta):
    if kind is GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind in (GateKind.X, GateKind.Y, GateKind.Z):
        return _PAULI[kind.value.upper()]
    if kind is GateKind.S:
        return np.diag([1, 1j])
    if kind is GateKind.SDG:
        return np.diag([1, -1j])
    generator = {GateKind.RX: "X", GateKind.RY: "Y", GateKind.RZ: "Z"}[kind]
    return math.cos(theta / 2) * _I - 1j * math.sin(theta / 2) * _PAULI[generator]


def _full(n: int, factors: dict) -> np.ndarray:
    return reduce(np.kron, [factors.get(q, _I) for q in range(n)])


def _two_qubit_diagonal(n: int, op) -> np.ndarray:
    a, b = op.qubits
    diagonal = np.ones(2 ** n, dtype=complex)
    for basis in range(2 ** n):
        bit_a = (basis >> (n - 1 - a)) & 1
        bit_b = (basis >> (n - 1 - b)) & 1
        if op.kind is GateKind.CZ:
            diagonal[basis] = -1 if bit_a and bit_b else 1
        else:
            parity = (1 - 2 * bit_a) * (1 - 2 * bit_b)
            diagonal[basis] = np.exp(-0.5j * op.param * parity)
    return np.diag(diagonal)


def dense_expectation_of(circuit: Circuit, observable: str = None) -> float:
    n = circuit.num_qubits
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    for op in circuit.ops:
        if op.is_two_qubit:
            psi = _two_qubit_diagonal(n, op) @ psi
        else:
            psi = _full(n, {op.qubits[0]: _single(op.kind, op.param)}) @ psi
    letters = observable or circuit.observable.paulis
    operator = reduce(np.kron, [_PAULI[letter] for letter in letters])
    return float(np.vdot(psi, operator @ psi).real)


_ONE_QUBIT_KINDS = [GateKind.H, GateKind.X, GateKind.Y, GateKind.Z, GateKind.S, GateKind.SDG,
                    GateKind.RX, GateKind.RY, GateKind.RZ]


def random_ops(rng: np.random.Generator, qubits, count: int, two_qubit_probability: float = 0.3):
    """Random gate tuples on the given qubits, never crossing outside them"""
    qubits = list(qubits)
    ops = []
    for _ in range(count):
        if len(qubits) >= 2 and rng.random() < two_qubit_probability:
            a, b = rng.choice(qubits, size=2, replace=False)
            if rng.random() < 0.5:
                ops.append((GateKind.CZ, (int(a), int(b))))
            else:
                ops.append((GateKind.RZZ, (int(a), int(b)), float(rng.uniform(-math.pi, math.pi))))
        else:
            kind = _ONE_QUBIT_KINDS[int(rng.integers(len(_ONE_QUBIT_KINDS)))]
            q = int(qubits[int(rng.integers(len(qubits)))])
            if kind in (GateKind.RX, GateKind.RY, GateKind.RZ):
                ops.append((kind, q, float(rng.uniform(-math.pi, math.pi))))
            else:
                ops.append((kind, q))
    return ops


def random_observable(rng: np.random.Generator, n: int) -> str:
    letters = "".join("IXYZ"[int(k)] for k in rng.integers(4, size=n))
    if set(letters) == {"I"}:
        letters = "Z" + letters[1:]
    return letters


def make_random_circuit(n: int, depth: int = 12, seed: int = 0, two_qubit_probability: float = 0.3) -> Circuit:
    rng = np.random.default_rng(seed)
    ops = [(GateKind.RY, q, float(rng.uniform(-math.pi, math.pi))) for q in range(n)]
    ops += random_ops(rng, range(n), depth, two_qubit_probability)
    return circuit_from_ops(n, ops, random_observable(rng, n))


@pytest.fixture
def dense_expectation():
    return dense_expectation_of


@pytest.fixture
def random_circuit():
    return make_random_circuit


@pytest.fixture
def bell_like_circuit() -> Circuit:
    """Two qubits joined by one CZ, measured in ZZ"""
    return circuit_from_ops(2, [
        (GateKind.H, 0),
        (GateKind.RY, 1, 0.7),
        (GateKind.CZ, (0, 1)),
        (GateKind.H, 0),
        (GateKind.RX, 1, 0.3),
    ], observable="ZZ")


def make_cluster_chain(clusters: int, size: int = 2, seed: int = 0):
    """Clusters of `size` qubits joined in a line by one CZ each; returns (circuit, per-cluster vertex parts)"""
    rng = np.random.default_rng(seed)
    ops = []
    for c in range(clusters):
        members = list(range(c * size, (c + 1) * size))
        for q in members:
            ops.append((GateKind.RY, q, float(rng.uniform(-math.pi, math.pi))))
        for a, b in zip(members, members[1:]):
            ops.append((GateKind.CZ, (a, b)))
    for c in range(clusters - 1):
        ops.append((GateKind.CZ, ((c + 1) * size - 1, (c + 1) * size)))
    for q in range(clusters * size):
        ops.append((GateKind.RX, q, float(rng.uniform(-math.pi, math.pi))))
    circuit = circuit_from_ops(clusters * size, ops, "Z" * (clusters * size))
    parts = [[(op.index, q) for op in circuit.ops for q in op.qubits if q // size == c] for c in range(clusters)]
    return circuit, parts


@pytest.fixture
def cluster_chain():
    return make_cluster_chain
