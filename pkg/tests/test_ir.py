import math

import networkx as nx
import pytest

from knitting.circuit import GateKind, circuit_from_ops
from knitting.errors import CompressionError
from knitting.ir import (CompressionMethod, EdgeKind, build_ir, compress, extract_fragment, idle_qubits,
                         leaf_width, to_dot, to_networkx, wire_segments)


@pytest.fixture
def chain():
    # q0: h(0) cz(1) x(4)      q1: cz(1) s(2) rzz(3)      q2: rzz(3)
    return circuit_from_ops(3, [
        (GateKind.H, 0),
        (GateKind.CZ, (0, 1)),
        (GateKind.S, 1),
        (GateKind.RZZ, (1, 2), 0.5),
        (GateKind.X, 0),
    ], observable="ZXY")


def test_vertices_and_edges(chain):
    ir = build_ir(chain)

    assert ir.vertices == ((0, 0), (1, 0), (1, 1), (2, 1), (3, 1), (3, 2), (4, 0))
    names = {e.name: e for e in ir.edges}
    assert set(names) == {"g1", "g3", "w0.0", "w0.1", "w1.1", "w1.2"}
    assert names["g1"].kind is EdgeKind.GATE
    assert names["g1"].weight == pytest.approx(math.log2(9))
    assert names["g3"].weight == pytest.approx(2 * math.log2(1 + 2 * abs(math.sin(0.5))))
    assert names["w1.2"].kind is EdgeKind.WIRE
    assert names["w1.2"].weight == pytest.approx(4.0)
    assert (names["w0.1"].u, names["w0.1"].v) == ((1, 0), (4, 0))


def test_edge_dims(chain):
    ir = build_ir(chain)

    assert {e.name: e.dim for e in ir.edges}["g1"] == 5
    assert {e.name: e.dim for e in ir.edges}["w0.0"] == 4


def test_two_qubit_compression_removes_gate_edges(chain):
    ir = compress(build_ir(chain), CompressionMethod.TWO_QUBIT)

    assert all(e.kind is EdgeKind.WIRE for e in ir.edges)
    assert ir.owner[(1, 1)] == (1, 0)
    assert ir.weight_of((1, 0)) == 2
    assert len(ir.vertices) == 5


def test_wire_compression_removes_wire_edges(chain):
    ir = compress(build_ir(chain), "wire")

    assert all(e.kind is EdgeKind.GATE for e in ir.edges)
    assert ir.vertices == ((0, 0), (1, 1), (3, 2))
    assert ir.expand([(0, 0)]) == {(0, 0), (1, 0), (4, 0)}


def test_one_qubit_compression_merges_toward_previous_two_qubit_op(chain):
    ir = compress(build_ir(chain), CompressionMethod.ONE_QUBIT)

    # leading h joins the first cz, trailing x joins it too; s joins the cz before it
    assert ir.owner[(0, 0)] == (0, 0)
    assert ir.owner[(1, 0)] == (0, 0)
    assert ir.owner[(4, 0)] == (0, 0)
    assert ir.owner[(2, 1)] == (1, 1)
    assert ir.owner[(3, 1)] == (3, 1)
    gate_names = sorted(e.name for e in ir.edges if e.kind is EdgeKind.GATE)
    assert gate_names == ["g1", "g3"]


def test_one_qubit_compression_collapses_wire_without_two_qubit_ops():
    circuit = circuit_from_ops(2, [(GateKind.H, 0), (GateKind.X, 0), (GateKind.Z, 0), (GateKind.H, 1)])

    ir = compress(build_ir(circuit), CompressionMethod.ONE_QUBIT)

    assert ir.vertices == ((0, 0), (3, 1))
    assert ir.edges == ()


def test_compress_twice_fails(chain):
    ir = compress(build_ir(chain), CompressionMethod.WIRE)

    with pytest.raises(CompressionError):
        compress(ir, CompressionMethod.TWO_QUBIT)


def test_compress_none_is_identity(chain):
    ir = build_ir(chain)

    assert compress(ir, "none") is ir


def test_cut_edges_of_side(chain):
    ir = build_ir(chain)
    side = frozenset({(0, 0), (1, 0), (4, 0)})

    assert sorted(e.name for e in ir.cut_edges(side)) == ["g1"]


def test_wire_segments_and_width(chain):
    ir = build_ir(chain)
    leaf = frozenset({(0, 0), (4, 0), (3, 1)})

    assert wire_segments(ir, leaf) == [(0, (0,)), (0, (4,)), (1, (3,))]
    assert leaf_width(ir, leaf) == 3


def test_extract_fragment_with_gate_and_wire_cuts(chain):
    ir = build_ir(chain)
    # all of q0 plus the cz on q1: only the wire after the cz on q1 is cut
    fragment = extract_fragment(ir, frozenset({(0, 0), (1, 0), (1, 1), (4, 0)}))

    assert fragment.local_qubits == ((0, 0), (1, 1))
    assert fragment.circuit.observable.paulis == "ZI"
    kinds = [(op.kind, op.qubits, op.label) for op in fragment.circuit.ops]
    assert kinds == [
        (GateKind.H, (0,), None),
        (GateKind.CZ, (0, 1), None),
        (GateKind.PLACEHOLDER, (1,), "w1.1.a"),
        (GateKind.X, (0,), None),
    ]
    assert fragment.placeholders == {"w1.1.a": 1}


def test_extract_fragment_downstream_side(chain):
    ir = build_ir(chain)

    fragment = extract_fragment(ir, frozenset({(2, 1), (3, 1)}))

    assert fragment.local_qubits == ((1, 2),)
    assert fragment.circuit.observable.paulis == "X"
    ops = [(op.kind, op.label) for op in fragment.circuit.ops]
    assert ops == [(GateKind.PLACEHOLDER, "w1.1.b"), (GateKind.S, None), (GateKind.PLACEHOLDER, "g3.a")]


def test_extract_fragment_gate_cut_side_b(chain):
    ir = build_ir(chain)

    fragment = extract_fragment(ir, frozenset({(3, 2)}))

    assert fragment.circuit.num_qubits == 1
    assert fragment.circuit.observable.paulis == "Y"
    assert [op.label for op in fragment.circuit.ops] == ["g3.b"]


def test_idle_qubits():
    circuit = circuit_from_ops(3, [(GateKind.H, 0)], observable="ZIZ")

    assert idle_qubits(build_ir(circuit)) == [1, 2]


def test_networkx_export(chain):
    graph = to_networkx(compress(build_ir(chain), CompressionMethod.TWO_QUBIT))

    assert graph.number_of_nodes() == 5
    assert nx.is_connected(graph)
    assert all(data["kind"] == "wire" for _, _, data in graph.edges(data=True))


def test_dot_export(chain):
    dot = to_dot(build_ir(chain))

    assert dot.startswith("graph ir {")
    assert '"1:0" -- "1:1" [label="gate/3.17"];' in dot
