import math

import numpy as np
import pytest

from conftest import random_observable, random_ops
from knitting.circuit import GateKind, circuit_from_ops
from knitting.errors import QpdError
from knitting.qpd import QpdKind, qpd_for, sampling_overhead
from knitting.simulator import exact_expectation


def _gate_host(seed: int, kind: GateKind, theta=None):
    rng = np.random.default_rng(seed)
    before = random_ops(rng, range(3), 8)
    after = random_ops(rng, range(3), 8)
    gate = (kind, (0, 1)) if theta is None else (kind, (0, 1), theta)
    return before, gate, after, random_observable(rng, 3)


def _gate_reconstruction(seed: int, kind: GateKind, theta=None):
    before, gate, after, observable = _gate_host(seed, kind, theta)
    exact = exact_expectation(circuit_from_ops(3, before + [gate] + after, observable))
    spec = qpd_for(kind, theta)
    total = 0.0
    for i, inst_a in enumerate(spec.inst_a):
        for j, inst_b in enumerate(spec.inst_b):
            if spec.coeffs[i, j] == 0.0:
                continue
            middle = [(op, 0) for op in inst_a.ops] + [(op, 1) for op in inst_b.ops]
            total += spec.coeffs[i, j] * exact_expectation(circuit_from_ops(3, before + middle + after, observable))
    return exact, total


@pytest.mark.parametrize("seed", range(30))
def test_cz_reconstruction(seed):
    exact, total = _gate_reconstruction(seed, GateKind.CZ)

    assert total == pytest.approx(exact, abs=1e-9)


@pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2, math.pi, -1.3])
@pytest.mark.parametrize("seed", range(6))
def test_rzz_reconstruction(theta, seed):
    exact, total = _gate_reconstruction(seed, GateKind.RZZ, theta)

    assert total == pytest.approx(exact, abs=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_wire_reconstruction(seed):
    # qubit 1 is cut after `before`; its downstream half continues on fresh qubit 3
    rng = np.random.default_rng(1000 + seed)
    before = random_ops(rng, range(3), 10)
    after = random_ops(rng, range(3), 10)
    observable = random_observable(rng, 3)
    exact = exact_expectation(circuit_from_ops(3, before + after, observable))

    def moved(spec_op):
        qubits = spec_op[1] if isinstance(spec_op[1], tuple) else (spec_op[1],)
        qubits = tuple(3 if q == 1 else q for q in qubits)
        return (spec_op[0], qubits if len(qubits) > 1 else qubits[0]) + tuple(spec_op[2:])

    spec = qpd_for(QpdKind.WIRE)
    total = 0.0
    for i, measurement in enumerate(spec.inst_a):
        letters = observable[0] + measurement.observable + observable[2] + observable[1]
        for j, preparation in enumerate(spec.inst_b):
            if spec.coeffs[i, j] == 0.0:
                continue
            prep = [(op, 3) for op in preparation.ops]
            circuit = circuit_from_ops(4, before + prep + [moved(op) for op in after], letters)
            total += spec.coeffs[i, j] * exact_expectation(circuit)

    assert total == pytest.approx(exact, abs=1e-9)


def test_gammas():
    assert qpd_for(GateKind.CZ).gamma == 3.0
    assert qpd_for(GateKind.CZ).norm == pytest.approx(3.0)
    assert sampling_overhead(qpd_for(GateKind.CZ)) == 9.0
    assert sampling_overhead(qpd_for(QpdKind.WIRE)) == 16.0
    assert qpd_for("wire").norm == pytest.approx(6.0)


@pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 2, math.pi, 2.5])
def test_rzz_gamma_is_its_norm(theta):
    spec = qpd_for(GateKind.RZZ, theta)

    assert spec.gamma == pytest.approx(1.0 + 2.0 * abs(math.sin(theta)))
    assert spec.gamma == pytest.approx(spec.norm)
    assert spec.param == theta


def test_dims():
    assert qpd_for(GateKind.CZ).dims == (5, 5)
    assert qpd_for(QpdKind.WIRE).dims == (4, 4)


def test_coefficients_are_read_only():
    with pytest.raises(ValueError):
        qpd_for(GateKind.CZ).coeffs[0, 0] = 1.0


@pytest.mark.parametrize("kind, param", [
    (GateKind.H, None),
    (GateKind.RZZ, None),
    (GateKind.RZZ, float("nan")),
    ("swap", None),
])
def test_unsupported_requests(kind, param):
    with pytest.raises(QpdError):
        qpd_for(kind, param)


def test_describe():
    cz = qpd_for(GateKind.CZ)

    assert cz.inst_a[2].describe() == "meas+sdg"
    assert cz.inst_a[3].describe() == "id"
    assert qpd_for(QpdKind.WIRE).inst_a[2].describe() == "id@X"
