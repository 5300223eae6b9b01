"""
Benchmark circuit families

vqe   - hardware-efficient ansatz: RY/RZ layers with a linear CZ chain
qml   - feature map: H, RZ encoding, RZZ on pairwise-alternating neighbours
qaoa1 - QAOA on a clustered random graph, 70% intra / 30% inter-cluster edges
qaoa2 - QAOA on dense clusters with `inter_edges` edges between adjacent clusters

Every generator is seeded and records its arguments in the circuit's meta header.
"""

import math
from typing import Callable, Dict, List, Set, Tuple

import numpy as np

from knitting.circuit import Circuit, GateKind, circuit_from_ops

Edge = Tuple[int, int]

INTRA_FRACTION = 0.7


def _all_z(n: int) -> str:
    return "Z" * n


def _angle(rng: np.random.Generator) -> float:
    return float(rng.uniform(0.0, 2.0 * math.pi))


def vqe(num_qubits: int, layers: int = 2, seed: int = 0) -> Circuit:
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(layers):
        for q in range(num_qubits):
            ops.append((GateKind.RY, q, _angle(rng)))
            ops.append((GateKind.RZ, q, _angle(rng)))
        for q in range(num_qubits - 1):
            ops.append((GateKind.CZ, (q, q + 1)))
    for q in range(num_qubits):
        ops.append((GateKind.RY, q, _angle(rng)))
    meta = {"family": "vqe", "qubits": num_qubits, "layers": layers, "seed": seed}
    return circuit_from_ops(num_qubits, ops, _all_z(num_qubits), meta)


def pairwise_pairs(num_qubits: int) -> List[Edge]:
    """(0,1),(2,3),... then (1,2),(3,4),..."""
    even = [(q, q + 1) for q in range(0, num_qubits - 1, 2)]
    odd = [(q, q + 1) for q in range(1, num_qubits - 1, 2)]
    return even + odd


def qml(num_qubits: int, layers: int = 1, seed: int = 0) -> Circuit:
    rng = np.random.default_rng(seed)
    features = rng.uniform(0.0, math.pi, size=num_qubits)
    ops = []
    for _ in range(layers):
        for q in range(num_qubits):
            ops.append((GateKind.H, q))
            ops.append((GateKind.RZ, q, float(2.0 * features[q])))
        for a, b in pairwise_pairs(num_qubits):
            ops.append((GateKind.RZZ, (a, b), float(2.0 * (math.pi - features[a]) * (math.pi - features[b]))))
    meta = {"family": "qml", "qubits": num_qubits, "layers": layers, "seed": seed}
    return circuit_from_ops(num_qubits, ops, _all_z(num_qubits), meta)


def clusters_of(num_qubits: int, cluster_size: int) -> List[List[int]]:
    return [list(range(start, min(start + cluster_size, num_qubits)))
            for start in range(0, num_qubits, cluster_size)]


def _random_pair(rng: np.random.Generator, left: List[int], right: List[int]) -> Edge:
    a = int(left[rng.integers(len(left))])
    b = int(right[rng.integers(len(right))])
    return (min(a, b), max(a, b))


def clustered_graph(num_qubits: int, cluster_size: int, num_edges: int, rng: np.random.Generator) -> List[Edge]:
    clusters = clusters_of(num_qubits, cluster_size)
    intra = [c for c in clusters if len(c) >= 2]
    edges: Set[Edge] = set()
    attempts = 0
    while len(edges) < num_edges and attempts < 100 * num_edges:
        attempts += 1
        if len(clusters) > 1 and (not intra or rng.random() >= INTRA_FRACTION):
            i, j = sorted(rng.choice(len(clusters), size=2, replace=False))
            edge = _random_pair(rng, clusters[int(i)], clusters[int(j)])
        else:
            cluster = intra[rng.integers(len(intra))]
            a, b = rng.choice(cluster, size=2, replace=False)
            edge = (int(min(a, b)), int(max(a, b)))
        edges.add(edge)
    return sorted(edges)


def dense_clusters(num_qubits: int, cluster_size: int, inter_edges: int, rng: np.random.Generator) -> List[Edge]:
    clusters = clusters_of(num_qubits, cluster_size)
    edges: Set[Edge] = set()
    for cluster in clusters:
        for a, b in zip(cluster, cluster[1:]):
            edges.add((a, b))
        for x, a in enumerate(cluster):
            for b in cluster[x + 2:]:
                if rng.random() < 0.5:
                    edges.add((a, b))
    for left, right in zip(clusters, clusters[1:]):
        between: Set[Edge] = set()
        budget = min(inter_edges, len(left) * len(right))
        while len(between) < budget:
            between.add(_random_pair(rng, left, right))
        edges |= between
    return sorted(edges)


def _qaoa(num_qubits: int, edges: List[Edge], reps: int, rng: np.random.Generator) -> List[tuple]:
    ops = [(GateKind.H, q) for q in range(num_qubits)]
    for _ in range(reps):
        gamma, beta = _angle(rng), _angle(rng)
        for a, b in edges:
            ops.append((GateKind.RZZ, (a, b), gamma))
        for q in range(num_qubits):
            ops.append((GateKind.RX, q, beta))
    return ops


def qaoa1(num_qubits: int, cluster_size: int = 5, edge_factor: float = 1.5, reps: int = 1, seed: int = 0) -> Circuit:
    rng = np.random.default_rng(seed)
    num_edges = max(1, int(round(edge_factor * num_qubits)))
    edges = clustered_graph(num_qubits, cluster_size, num_edges, rng)
    meta = {"family": "qaoa1", "qubits": num_qubits, "cluster_size": cluster_size, "edge_factor": edge_factor,
            "reps": reps, "seed": seed}
    return circuit_from_ops(num_qubits, _qaoa(num_qubits, edges, reps, rng), _all_z(num_qubits), meta)


def qaoa2(num_qubits: int, cluster_size: int = 5, inter_edges: int = 1, reps: int = 1, seed: int = 0) -> Circuit:
    rng = np.random.default_rng(seed)
    edges = dense_clusters(num_qubits, cluster_size, inter_edges, rng)
    meta = {"family": "qaoa2", "qubits": num_qubits, "cluster_size": cluster_size, "inter_edges": inter_edges,
            "reps": reps, "seed": seed}
    return circuit_from_ops(num_qubits, _qaoa(num_qubits, edges, reps, rng), _all_z(num_qubits), meta)


FAMILIES: Dict[str, Callable[..., Circuit]] = {
    "vqe": vqe,
    "qml": qml,
    "qaoa1": qaoa1,
    "qaoa2": qaoa2,
}


def generate(family: str, num_qubits: int, seed: int = 0, **options) -> Circuit:
    if family not in FAMILIES:
        raise ValueError(f"unknown benchmark family '{family}', expected one of {sorted(FAMILIES)}")
    if num_qubits < 2:
        raise ValueError("benchmarks need at least two qubits")
    return FAMILIES[family](num_qubits, seed=seed, **options)
