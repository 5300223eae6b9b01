"""
Weighted Fiduccia-Mattheyses graph partitioning

Bisection minimizes total cut-edge weight under a balance tolerance; among
equal cuts the one closest to the target balance wins. k-way partitions come
from recursive bisection. Vertex weights are group sizes of the compressed IR.

Two methods differ only in their first start: FM starts from random sides,
SPECTRAL starts from the best balanced prefix of the Fiedler ordering.
"""

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from utils.debug_utils import debug_log
from utils.seed_utils import derive_seed

Vertex = Hashable
WeightedEdge = Tuple[Vertex, Vertex, float]
SplitKey = Tuple[float, float]

_EPS = 1e-12


class PartitionMethod(str, Enum):
    FM = "fm"
    SPECTRAL = "spectral"


@dataclass
class PartitionGraph:
    vertices: Tuple[Vertex, ...]
    weights: Dict[Vertex, float]
    adjacency: Dict[Vertex, Dict[Vertex, float]]

    @classmethod
    def build(cls, vertices: Sequence[Vertex], edges: Sequence[WeightedEdge],
              weights: Dict[Vertex, float] = None) -> "PartitionGraph":
        ordered = tuple(sorted(vertices))
        adjacency: Dict[Vertex, Dict[Vertex, float]] = {v: {} for v in ordered}
        for u, v, w in edges:
            if u == v or u not in adjacency or v not in adjacency:
                continue
            adjacency[u][v] = adjacency[u].get(v, 0.0) + w
            adjacency[v][u] = adjacency[v].get(u, 0.0) + w
        vertex_weights = {v: float((weights or {}).get(v, 1.0)) for v in ordered}
        return cls(vertices=ordered, weights=vertex_weights, adjacency=adjacency)

    def cut_weight(self, side_a: FrozenSet[Vertex]) -> float:
        return sum(w for u in side_a for v, w in self.adjacency[u].items() if v not in side_a)


def _limits(graph: PartitionGraph, fraction: float, imbalance: float) -> Tuple[float, float]:
    total = sum(graph.weights.values())
    heaviest = max(graph.weights.values())
    # slack of at least one heaviest vertex
    limit_a = max((1 + imbalance) * fraction * total, fraction * total + heaviest)
    limit_b = max((1 + imbalance) * (1 - fraction) * total, (1 - fraction) * total + heaviest)
    return limit_a, limit_b


def _initial_sides(graph: PartitionGraph, fraction: float, limits: Tuple[float, float],
                   rng: np.random.Generator) -> Dict[Vertex, int]:
    order = list(graph.vertices)
    rng.shuffle(order)
    total = sum(graph.weights.values())
    side = {v: 1 for v in order}
    load_a = 0.0
    for v in order:
        w = graph.weights[v]
        if load_a >= fraction * total - _EPS:
            break
        if load_a + w <= limits[0] + _EPS:
            side[v] = 0
            load_a += w
    if load_a == 0.0:
        side[order[0]] = 0
    if all(s == 0 for s in side.values()):
        side[order[-1]] = 1
    return side


def _gain(graph: PartitionGraph, side: Dict[Vertex, int], v: Vertex) -> float:
    gain = 0.0
    for u, w in graph.adjacency[v].items():
        gain += w if side[u] != side[v] else -w
    return gain


def _fm_pass(graph: PartitionGraph, side: Dict[Vertex, int], limits: Tuple[float, float]) -> float:
    """One FM pass with locking; rolls back to the best prefix and returns its gain"""
    loads = [0.0, 0.0]
    counts = [0, 0]
    for v, s in side.items():
        loads[s] += graph.weights[v]
        counts[s] += 1

    gains = {v: _gain(graph, side, v) for v in graph.vertices}
    heap = [(-gains[v], v) for v in graph.vertices]
    heapq.heapify(heap)
    locked = set()
    moves: List[Vertex] = []
    running, best, best_len = 0.0, 0.0, 0

    while heap:
        deferred = []
        chosen = None
        while heap:
            neg_gain, v = heapq.heappop(heap)
            if v in locked or -neg_gain != gains[v]:
                continue
            src = side[v]
            dst = 1 - src
            if counts[src] > 1 and loads[dst] + graph.weights[v] <= limits[dst] + _EPS:
                chosen = v
                break
            deferred.append((neg_gain, v))
        for item in deferred:
            heapq.heappush(heap, item)
        if chosen is None:
            break

        src = side[chosen]
        running += gains[chosen]
        side[chosen] = 1 - src
        loads[src] -= graph.weights[chosen]
        loads[1 - src] += graph.weights[chosen]
        counts[src] -= 1
        counts[1 - src] += 1
        locked.add(chosen)
        moves.append(chosen)
        for u in graph.adjacency[chosen]:
            if u not in locked:
                gains[u] = _gain(graph, side, u)
                heapq.heappush(heap, (-gains[u], u))
        if running > best + _EPS:
            best, best_len = running, len(moves)

    for v in reversed(moves[best_len:]):
        side[v] = 1 - side[v]
    return best


def _better(key: SplitKey, best: Optional[SplitKey]) -> bool:
    """Lower cut wins; equal cuts fall back to the smaller balance deviation"""
    if best is None or key[0] < best[0] - _EPS:
        return True
    return abs(key[0] - best[0]) <= _EPS and key[1] < best[1] - _EPS


def fiedler_order(graph: PartitionGraph) -> List[Vertex]:
    """Vertices sorted by their entry in the Fiedler vector of the weighted Laplacian"""
    index = {v: i for i, v in enumerate(graph.vertices)}
    laplacian = np.zeros((len(index), len(index)))
    for u, neighbours in graph.adjacency.items():
        for v, w in neighbours.items():
            laplacian[index[u], index[v]] -= w
            laplacian[index[u], index[u]] += w
    _, vectors = np.linalg.eigh(laplacian)
    fiedler = vectors[:, 1]
    if fiedler[0] > 0:
        fiedler = -fiedler
    ranked = sorted(range(len(index)), key=lambda i: (float(fiedler[i]), i))
    return [graph.vertices[i] for i in ranked]


def _spectral_sides(graph: PartitionGraph, fraction: float,
                    limits: Tuple[float, float]) -> Optional[Dict[Vertex, int]]:
    """Best admissible prefix of the Fiedler ordering as side a"""
    order = fiedler_order(graph)
    total = sum(graph.weights.values())
    inside = set()
    load, cut = 0.0, 0.0
    best_key, best_length = None, 0
    for length, v in enumerate(order[:-1], start=1):
        for u, w in graph.adjacency[v].items():
            cut += -w if u in inside else w
        inside.add(v)
        load += graph.weights[v]
        if load > limits[0] + _EPS or total - load > limits[1] + _EPS:
            continue
        key = (cut, abs(load - fraction * total))
        if _better(key, best_key):
            best_key, best_length = key, length
    if best_key is None:
        return None
    chosen = set(order[:best_length])
    return {v: 0 if v in chosen else 1 for v in graph.vertices}


def bisect(graph: PartitionGraph, fraction: float = 0.5, imbalance: float = 0.03, seed: int = 0,
           starts: int = 4,
           method: PartitionMethod = PartitionMethod.FM) -> Tuple[FrozenSet[Vertex], FrozenSet[Vertex]]:
    """Minimum-weight bisection; side a targets `fraction` of the total vertex weight"""
    if len(graph.vertices) < 2:
        raise ValueError("bisection needs at least two vertices")
    limits = _limits(graph, fraction, imbalance)
    target = fraction * sum(graph.weights.values())
    best_key, best_sides = None, None
    for start in range(starts):
        side = None
        if start == 0 and method is PartitionMethod.SPECTRAL:
            side = _spectral_sides(graph, fraction, limits)
        if side is None:
            rng = np.random.default_rng(derive_seed(seed, start))
            side = _initial_sides(graph, fraction, limits, rng)
        while _fm_pass(graph, side, limits) > _EPS:
            pass
        side_a = frozenset(v for v, s in side.items() if s == 0)
        key = (graph.cut_weight(side_a), abs(sum(graph.weights[v] for v in side_a) - target))
        if _better(key, best_key):
            best_key, best_sides = key, side_a
    side_b = frozenset(graph.vertices) - best_sides
    debug_log(f"bisect {method.value} |V|={len(graph.vertices)} cut={best_key[0]:.4f} "
              f"sizes={len(best_sides)}/{len(side_b)}")
    return best_sides, side_b


def _subgraph(graph: PartitionGraph, keep: FrozenSet[Vertex]) -> PartitionGraph:
    adjacency = {v: {u: w for u, w in graph.adjacency[v].items() if u in keep} for v in graph.vertices if v in keep}
    return PartitionGraph(vertices=tuple(v for v in graph.vertices if v in keep),
                          weights={v: graph.weights[v] for v in keep}, adjacency=adjacency)


def partition(graph: PartitionGraph, num_parts: int = 2, imbalance: float = 0.03, seed: int = 0,
              method: PartitionMethod = PartitionMethod.FM,
              shares: Optional[Sequence[float]] = None) -> List[FrozenSet[Vertex]]:
    """k-way partition by recursive bisection, parts ordered by smallest vertex

    shares gives each part's relative target weight; equal when omitted.
    """
    if num_parts < 1:
        raise ValueError("num_parts must be positive")
    shares = [1.0] * num_parts if shares is None else [float(s) for s in shares]
    if len(shares) != num_parts or any(s <= 0 for s in shares):
        raise ValueError("shares must hold one positive entry per part")
    parts = _recursive(graph, shares[:len(graph.vertices)], imbalance, seed, PartitionMethod(method))
    return sorted(parts, key=min)


def _recursive(graph: PartitionGraph, shares: List[float], imbalance: float, seed: int,
               method: PartitionMethod) -> List[FrozenSet[Vertex]]:
    if len(shares) <= 1 or len(graph.vertices) < 2:
        return [frozenset(graph.vertices)]
    left, right = shares[:len(shares) // 2], shares[len(shares) // 2:]
    side_a, side_b = bisect(graph, fraction=sum(left) / sum(shares), imbalance=imbalance, seed=seed, method=method)
    parts = _recursive(_subgraph(graph, side_a), left[:len(side_a)], imbalance, derive_seed(seed, 1), method)
    parts += _recursive(_subgraph(graph, side_b), right[:len(side_b)], imbalance, derive_seed(seed, 2), method)
    return parts
