import pytest

from knit_orchestrator import knit
from knitting.benchmarks import FAMILIES, clusters_of, generate, pairwise_pairs
from knitting.circuit import GateKind, serialize_circuit
from knitting.models import RunConfig


def _two_qubit(circuit, kind):
    return [op.qubits for op in circuit.ops if op.kind is kind]


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_generators_are_seeded(family):
    assert serialize_circuit(generate(family, 8, seed=4)) == serialize_circuit(generate(family, 8, seed=4))
    assert serialize_circuit(generate(family, 8, seed=4)) != serialize_circuit(generate(family, 8, seed=5))


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_meta_records_the_arguments(family):
    circuit = generate(family, 7, seed=9)

    assert circuit.meta["family"] == family
    assert circuit.meta["qubits"] == 7
    assert circuit.meta["seed"] == 9
    assert circuit.observable.paulis == "Z" * 7


def test_vqe_linear_chain_per_layer():
    circuit = generate("vqe", 8, seed=1, layers=3)

    chain = [(q, q + 1) for q in range(7)]
    assert _two_qubit(circuit, GateKind.CZ) == chain * 3
    singles, doubles = circuit.count_ops()
    assert doubles == 21
    assert singles == 3 * 16 + 8


def test_pairwise_pairs():
    assert pairwise_pairs(5) == [(0, 1), (2, 3), (1, 2), (3, 4)]
    assert pairwise_pairs(2) == [(0, 1)]


def test_qml_uses_pairwise_rzz():
    circuit = generate("qml", 6, seed=2, layers=2)

    assert _two_qubit(circuit, GateKind.RZZ) == pairwise_pairs(6) * 2
    assert all(op.kind in (GateKind.H, GateKind.RZ, GateKind.RZZ) for op in circuit.ops)


def test_clusters_of():
    assert clusters_of(7, 3) == [[0, 1, 2], [3, 4, 5], [6]]


def _cluster_of(q, size):
    return q // size


@pytest.mark.parametrize("reps", [1, 2])
def test_qaoa2_inter_cluster_edges_per_layer(reps):
    circuit = generate("qaoa2", 10, seed=3, cluster_size=5, inter_edges=1, reps=reps)

    crossing = [(a, b) for a, b in _two_qubit(circuit, GateKind.RZZ) if _cluster_of(a, 5) != _cluster_of(b, 5)]
    assert len(crossing) == reps
    assert sum(1 for op in circuit.ops if op.kind is GateKind.RX) == 10 * reps


def test_qaoa2_clusters_are_connected():
    circuit = generate("qaoa2", 12, seed=0, cluster_size=4, inter_edges=2)

    edges = set(_two_qubit(circuit, GateKind.RZZ))
    for start in (0, 4, 8):
        for q in range(start, start + 3):
            assert (q, q + 1) in edges
    crossing = [(a, b) for a, b in edges if _cluster_of(a, 4) != _cluster_of(b, 4)]
    assert len(crossing) == 4
    assert all(_cluster_of(b, 4) - _cluster_of(a, 4) == 1 for a, b in crossing)


def test_qaoa1_mostly_intra_cluster():
    intra = total = 0
    for seed in range(5):
        circuit = generate("qaoa1", 30, seed=seed)
        edges = _two_qubit(circuit, GateKind.RZZ)
        assert len(edges) == len(set(edges)) == 45
        intra += sum(1 for a, b in edges if _cluster_of(a, 5) == _cluster_of(b, 5))
        total += len(edges)

    assert 0.4 <= intra / total <= 0.9


def test_generate_rejects_bad_requests():
    with pytest.raises(ValueError):
        generate("ghz", 4)
    with pytest.raises(ValueError):
        generate("vqe", 1)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_four_qubit_benchmarks_knit_exactly(family, dense_expectation):
    circuit = generate(family, 4, seed=6)

    result = knit(circuit, RunConfig(max_qubits=2, leaf_qubits=[2], trials=6, seed=1, no_timings=True))

    assert result.expectation == pytest.approx(dense_expectation(circuit), abs=1e-9)
