"""
Compiler frontend: the (op, qubit) graph and its compression schemes

Vertices are (op_index, qubit) incidences. Gate edges join the two vertices of
a two-qubit op; wire edges join consecutive ops on one qubit. Edge weights are
log2 of the sampling overhead of cutting that edge, so minimizing additive cut
weight minimizes the multiplicative overhead.

Compression merges vertices into groups. Edges always keep their original
endpoints; `IrGraph.owner` maps an original vertex to its group
representative (the smallest vertex in the group).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from knitting.circuit import Circuit, GateKind, Op, PauliObservable, circuit_from_ops
from knitting.errors import CompressionError
from knitting.qpd import QpdKind, QpdSpec, qpd_for, sampling_overhead

VertexId = Tuple[int, int]


class EdgeKind(str, Enum):
    GATE = "gate"
    WIRE = "wire"


class CompressionMethod(str, Enum):
    NONE = "none"
    ONE_QUBIT = "1q"
    TWO_QUBIT = "2q"
    WIRE = "wire"


@dataclass(frozen=True)
class IrEdge:
    u: VertexId
    v: VertexId
    kind: EdgeKind
    weight: float
    name: str

    @property
    def dim(self) -> int:
        """Index dimension the cut contributes on each side"""
        return 5 if self.kind is EdgeKind.GATE else 4


@dataclass(frozen=True)
class IrGraph:
    circuit: Circuit
    vertices: Tuple[VertexId, ...]
    edges: Tuple[IrEdge, ...]
    groups: Dict[VertexId, FrozenSet[VertexId]] = field(hash=False)
    compression: CompressionMethod = CompressionMethod.NONE

    @cached_property
    def owner(self) -> Dict[VertexId, VertexId]:
        return {member: rep for rep, members in self.groups.items() for member in members}

    @cached_property
    def wire_orders(self) -> Dict[int, Tuple[int, ...]]:
        """Op indices touching each qubit, in program order"""
        return wire_orders(self.circuit)

    def endpoints(self, edge: IrEdge) -> Tuple[VertexId, VertexId]:
        return self.owner[edge.u], self.owner[edge.v]

    def expand(self, vertices: Iterable[VertexId]) -> FrozenSet[VertexId]:
        """Original vertices covered by a set of group representatives"""
        members = set()
        for rep in vertices:
            members.update(self.groups[rep])
        return frozenset(members)

    def weight_of(self, vertex: VertexId) -> int:
        return len(self.groups[vertex])

    def cut_edges(self, side: FrozenSet[VertexId]) -> List[IrEdge]:
        """Edges with exactly one endpoint group inside side"""
        crossing = []
        for edge in self.edges:
            a, b = self.endpoints(edge)
            if (a in side) != (b in side):
                crossing.append(edge)
        return crossing

    def qpd(self, edge: IrEdge) -> QpdSpec:
        if edge.kind is EdgeKind.WIRE:
            return qpd_for(QpdKind.WIRE)
        op = self.circuit.ops[edge.u[0]]
        return qpd_for(op.kind, op.param)


def wire_orders(circuit: Circuit) -> Dict[int, Tuple[int, ...]]:
    orders: Dict[int, List[int]] = {q: [] for q in range(circuit.num_qubits)}
    for op in circuit.ops:
        for q in op.qubits:
            orders[q].append(op.index)
    return {q: tuple(indices) for q, indices in orders.items()}


def build_ir(circuit: Circuit) -> IrGraph:
    """One vertex per (op, qubit) incidence, gate and wire edges between them"""
    vertices: List[VertexId] = []
    edges: List[IrEdge] = []
    wire_weight = math.log2(sampling_overhead(qpd_for(QpdKind.WIRE)))
    for op in circuit.ops:
        for q in op.qubits:
            vertices.append((op.index, q))
        if op.is_two_qubit:
            spec = qpd_for(op.kind, op.param)
            edges.append(IrEdge(u=(op.index, op.qubits[0]), v=(op.index, op.qubits[1]), kind=EdgeKind.GATE,
                                weight=math.log2(sampling_overhead(spec)), name=f"g{op.index}"))
    for q, order in wire_orders(circuit).items():
        for before, after in zip(order, order[1:]):
            edges.append(IrEdge(u=(before, q), v=(after, q), kind=EdgeKind.WIRE, weight=wire_weight,
                                name=f"w{q}.{before}"))
    vertices.sort()
    groups = {v: frozenset({v}) for v in vertices}
    return IrGraph(circuit=circuit, vertices=tuple(vertices), edges=tuple(edges), groups=groups)


class _UnionFind:
    def __init__(self, items: Iterable[VertexId]):
        self.parent = {item: item for item in items}

    def find(self, item: VertexId) -> VertexId:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: VertexId, b: VertexId):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _merge_one_qubit(ir: IrGraph, uf: _UnionFind):
    ops = ir.circuit.ops
    for q, order in ir.wire_orders.items():
        anchors = [i for i in order if ops[i].is_two_qubit]
        if not anchors:
            for i in order[1:]:
                uf.union((order[0], q), (i, q))
            continue
        previous: Optional[int] = None
        for position, i in enumerate(order):
            if ops[i].is_two_qubit:
                previous = i
                continue
            # toward the earlier two-qubit op; leading gates go to the first one
            anchor = previous if previous is not None else next(j for j in order[position:] if ops[j].is_two_qubit)
            uf.union((i, q), (anchor, q))


def compress(ir: IrGraph, method: "CompressionMethod | str") -> IrGraph:
    """Merge vertices by the chosen scheme; returns a new graph"""
    method = CompressionMethod(method)
    if ir.compression is not CompressionMethod.NONE:
        raise CompressionError(f"graph is already compressed with '{ir.compression.value}'")
    if method is CompressionMethod.NONE:
        return ir

    uf = _UnionFind(ir.vertices)
    if method is CompressionMethod.ONE_QUBIT:
        _merge_one_qubit(ir, uf)
    elif method is CompressionMethod.TWO_QUBIT:
        for op in ir.circuit.ops:
            if op.is_two_qubit:
                uf.union((op.index, op.qubits[0]), (op.index, op.qubits[1]))
    else:
        for q, order in ir.wire_orders.items():
            for i in order[1:]:
                uf.union((order[0], q), (i, q))

    members: Dict[VertexId, set] = {}
    for v in ir.vertices:
        members.setdefault(uf.find(v), set()).add(v)
    groups = {rep: frozenset(group) for rep, group in sorted(members.items())}
    owner = {m: rep for rep, group in groups.items() for m in group}
    edges = tuple(e for e in ir.edges if owner[e.u] != owner[e.v])
    return IrGraph(circuit=ir.circuit, vertices=tuple(groups), edges=edges, groups=groups, compression=method)


def wire_segments(ir: IrGraph, originals: FrozenSet[VertexId]) -> List[Tuple[int, Tuple[int, ...]]]:
    """Maximal runs of a vertex set along each wire, as (qubit, op indices), ordered by (qubit, start)"""
    segments = []
    for q, order in ir.wire_orders.items():
        run: List[int] = []
        for i in order:
            if (i, q) in originals:
                run.append(i)
            elif run:
                segments.append((q, tuple(run)))
                run = []
        if run:
            segments.append((q, tuple(run)))
    return segments


def leaf_width(ir: IrGraph, leaf: Iterable[VertexId]) -> int:
    """Qubits a leaf's subcircuit needs: one per wire segment"""
    return len(wire_segments(ir, ir.expand(leaf)))


@dataclass(frozen=True)
class Fragment:
    """Blueprint subcircuit for one leaf

    placeholders maps each placeholder label to its local qubit.
    """
    circuit: Circuit
    placeholders: Dict[str, int]
    local_qubits: Tuple[Tuple[int, int], ...]


def extract_fragment(ir: IrGraph, originals: FrozenSet[VertexId]) -> Fragment:
    """Cut a leaf out of the circuit, leaving placeholders at every cut site"""
    circuit = ir.circuit
    ops = circuit.ops
    segments = wire_segments(ir, originals)
    local_of: Dict[VertexId, int] = {}
    local_qubits = []
    letters = []
    for local, (q, run) in enumerate(segments):
        for i in run:
            local_of[(i, q)] = local
        local_qubits.append((q, run[0]))
        last_on_wire = ir.wire_orders[q][-1] == run[-1]
        letters.append(circuit.observable.paulis[q] if last_on_wire else "I")

    entries: List[Tuple[Tuple[int, int], tuple]] = []
    placeholders: Dict[str, int] = {}
    for i in sorted({v[0] for v in originals}):
        op = ops[i]
        inside = [q for q in op.qubits if (i, q) in originals]
        if len(inside) == len(op.qubits):
            entries.append(((i, 1), (op.kind, tuple(local_of[(i, q)] for q in op.qubits), op.param)))
        else:
            q = inside[0]
            label = f"g{i}.a" if q == op.qubits[0] else f"g{i}.b"
            placeholders[label] = local_of[(i, q)]
            entries.append(((i, 1), (GateKind.PLACEHOLDER, (local_of[(i, q)],), None, label)))

    for edge in ir.edges:
        if edge.kind is not EdgeKind.WIRE:
            continue
        up_in, down_in = edge.u in originals, edge.v in originals
        if up_in == down_in:
            continue
        if up_in:
            label, local, key = f"{edge.name}.a", local_of[edge.u], (edge.u[0], 2)
        else:
            label, local, key = f"{edge.name}.b", local_of[edge.v], (edge.v[0], 0)
        placeholders[label] = local
        entries.append((key, (GateKind.PLACEHOLDER, (local,), None, label)))

    entries.sort(key=lambda entry: entry[0])
    blueprint = circuit_from_ops(len(segments), [spec for _, spec in entries],
                                 observable=PauliObservable(paulis="".join(letters)))
    return Fragment(circuit=blueprint, placeholders=placeholders, local_qubits=tuple(local_qubits))


def idle_qubits(ir: IrGraph) -> List[int]:
    return [q for q, order in ir.wire_orders.items() if not order]


def to_networkx(ir: IrGraph) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    for v in ir.vertices:
        graph.add_node(v, size=ir.weight_of(v))
    for edge in ir.edges:
        a, b = ir.endpoints(edge)
        graph.add_edge(a, b, key=edge.name, kind=edge.kind.value, weight=edge.weight)
    return graph


def to_dot(ir: IrGraph) -> str:
    lines = ["graph ir {"]
    for op_index, q in ir.vertices:
        lines.append(f'  "{op_index}:{q}" [label="{op_index}:{q}"];')
    for edge in ir.edges:
        (ua, uq), (va, vq) = ir.endpoints(edge)
        lines.append(f'  "{ua}:{uq}" -- "{va}:{vq}" [label="{edge.kind.value}/{edge.weight:.4g}"];')
    lines.append("}")
    return "\n".join(lines)
