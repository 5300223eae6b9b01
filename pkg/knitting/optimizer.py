"""
Contraction-tree optimizer

A candidate is built by repeatedly picking an unfinished leaf of the
contraction tree and partitioning its IR vertices. Once every leaf fits, the
tree over the final leaves is rebuilt and kept when strictly cheaper.
Candidates are scored by postprocessing cost (FLOPs of the tree) and
estimated error; a seeded random search over hyperparameters yields a Pareto
front, from which the knee point is selected.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from knitting.circuit import Circuit
from knitting.errors import InfeasibleError, OptimizationError
from knitting.ir import (CompressionMethod, EdgeKind, IrEdge, IrGraph, VertexId, build_ir, compress,
                         extract_fragment, leaf_width)
from knitting.partition import PartitionGraph, PartitionMethod, partition
from utils.debug_utils import debug_log
from utils.seed_utils import derive_seed, make_rng

ONE_QUBIT_ERROR = 1e-4
TWO_QUBIT_ERROR = 1e-3
GATE_CUT_INSTANCES = 6
WIRE_CUT_INSTANCES = 8
_EXHAUSTIVE_SUBTREE_LIMIT = 8

ErrorModel = Callable[[Circuit], float]
Termination = Callable[[IrGraph, FrozenSet[VertexId]], bool]


class NextLeaf(str, Enum):
    MOST_QUBITS = "most_qubits"
    MOST_OPS = "most_ops"
    HIGHEST_DEGREE = "highest_degree"


class PartitionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_parts: int = Field(default=2, ge=2)
    imbalance: float = Field(default=0.03, ge=0.0, le=0.5)
    method: PartitionMethod = PartitionMethod.FM
    seed: int = 0


class Hyperparams(BaseModel):
    """One point of the optimizer's search space"""
    model_config = ConfigDict(frozen=True)

    max_qubits: int = Field(ge=1, description="Leaf size; default termination: every leaf fits this many qubits")
    max_overhead: float = Field(default=1e15, gt=0, description="Upper bound on tree_cost in FLOPs")
    compression: CompressionMethod = CompressionMethod.NONE
    next_leaf: NextLeaf = NextLeaf.MOST_QUBITS
    partition: PartitionParams = Field(default_factory=PartitionParams)
    termination: Optional[Callable[..., bool]] = Field(default=None, exclude=True)

    def is_done(self, ir: IrGraph, leaf: FrozenSet[VertexId]) -> bool:
        if self.termination is not None:
            return bool(self.termination(ir, leaf))
        return leaf_width(ir, leaf) <= self.max_qubits


def halving_sizes(max_qubits: int) -> List[int]:
    """max_qubits, max_qubits // 2, ... down to 1"""
    sizes = []
    while max_qubits >= 1:
        sizes.append(max_qubits)
        max_qubits //= 2
    return sizes


class SearchSpace(BaseModel):
    """Declared hyperparameter grid sampled by hyperopt

    max_qubits is the hard width bound; leaf sizes are sampled from
    leaf_qubits, every one of them within that bound.
    """
    max_qubits: int = Field(ge=1)
    max_overhead: float = Field(default=1e15, gt=0)
    leaf_qubits: Optional[List[int]] = Field(default=None, description="None: halving series from max_qubits")
    compressions: List[CompressionMethod] = Field(default_factory=lambda: list(CompressionMethod))
    next_leaves: List[NextLeaf] = Field(default_factory=lambda: list(NextLeaf))
    imbalances: List[float] = Field(default_factory=lambda: [0.03, 0.1, 0.3])
    num_parts: List[int] = Field(default_factory=lambda: [2, 3, 4])
    methods: List[PartitionMethod] = Field(default_factory=lambda: list(PartitionMethod))
    termination: Optional[Callable[..., bool]] = Field(default=None, exclude=True)

    @model_validator(mode="after")
    def _check_leaf_qubits(self) -> "SearchSpace":
        if self.leaf_qubits is not None:
            if not self.leaf_qubits:
                raise ValueError("leaf_qubits must not be empty")
            if any(not 1 <= q <= self.max_qubits for q in self.leaf_qubits):
                raise ValueError(f"leaf sizes must lie in 1..{self.max_qubits}, got {self.leaf_qubits}")
        return self

    def leaf_options(self) -> List[int]:
        if self.leaf_qubits is None:
            return halving_sizes(self.max_qubits)
        return sorted(set(self.leaf_qubits), reverse=True)

    def restrict(self, compression: Optional[CompressionMethod]) -> "SearchSpace":
        if compression is None:
            return self
        return self.model_copy(update={"compressions": [CompressionMethod(compression)]})

    def sample(self, rng: np.random.Generator, partition_seed: int) -> Hyperparams:
        def pick(options):
            return options[int(rng.integers(len(options)))]
        return Hyperparams(
            max_overhead=self.max_overhead,
            compression=pick(self.compressions),
            next_leaf=pick(self.next_leaves),
            partition=PartitionParams(num_parts=pick(self.num_parts), imbalance=pick(self.imbalances),
                                      method=pick(self.methods), seed=partition_seed),
            max_qubits=pick(self.leaf_options()),
            termination=self.termination,
        )


@dataclass(eq=False)
class TreeNode:
    vertices: FrozenSet[VertexId]
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(eq=False)
class ContractionTree:
    root: TreeNode

    def leaves(self) -> List[TreeNode]:
        """Leaves in left-to-right order"""
        found, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                found.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return found

    def internal_nodes(self) -> List[TreeNode]:
        found, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if not node.is_leaf:
                found.append(node)
                stack.append(node.right)
                stack.append(node.left)
        return found

    def shape(self, node: Optional[TreeNode] = None) -> Any:
        """Nested tuples mirroring the tree, each leaf shown as its smallest vertex"""
        node = node or self.root
        if node.is_leaf:
            return min(node.vertices) if node.vertices else None
        return self.shape(node.left), self.shape(node.right)


def _boundary_dims(ir: IrGraph, side: FrozenSet[VertexId]) -> int:
    product = 1
    for edge in ir.cut_edges(side):
        product *= edge.dim
    return product


def node_cost(ir: IrGraph, left: FrozenSet[VertexId], right: FrozenSet[VertexId]) -> int:
    """Each side carries one index per boundary cut; the cut's CT is absorbed here"""
    return _boundary_dims(ir, left) * _boundary_dims(ir, right)


def tree_cost(tree: ContractionTree, ir: IrGraph) -> int:
    covered: List[VertexId] = []
    for leaf in tree.leaves():
        covered.extend(leaf.vertices)
    if len(covered) != len(set(covered)) or set(covered) != set(ir.vertices):
        raise OptimizationError("tree leaves do not partition the IR vertices")
    return sum(node_cost(ir, node.left.vertices, node.right.vertices) for node in tree.internal_nodes())


def naive_cost(num_gate_cuts: int, num_wire_cuts: int, num_subcircuits: int) -> int:
    """Brute-force knitting cost |C|(s + n_g - 1)"""
    instances = GATE_CUT_INSTANCES ** num_gate_cuts * WIRE_CUT_INSTANCES ** num_wire_cuts
    return instances * (num_subcircuits + num_gate_cuts + num_wire_cuts - 1)


def estimate_error(fragment: Circuit) -> float:
    """Uniform gate-error model"""
    singles, doubles = fragment.count_ops()
    return 1.0 - (1.0 - ONE_QUBIT_ERROR) ** singles * (1.0 - TWO_QUBIT_ERROR) ** doubles


@dataclass(eq=False)
class Candidate:
    ir: IrGraph
    tree: ContractionTree
    pp_cost: float
    est_error: float
    params: Hyperparams
    feasible: bool = True
    trial_id: int = 0
    reason: str = ""
    leaf_errors: List[float] = field(default_factory=list)

    @property
    def num_leaves(self) -> int:
        return len(self.tree.leaves())

    def cut_edges(self):
        leaf_of = {}
        for position, leaf in enumerate(self.tree.leaves()):
            for v in leaf.vertices:
                leaf_of[v] = position
        cuts = []
        for edge in self.ir.edges:
            a, b = self.ir.endpoints(edge)
            if leaf_of[a] != leaf_of[b]:
                cuts.append(edge)
        return cuts

    @property
    def num_cuts(self) -> int:
        return len(self.cut_edges())

    def naive_cost(self) -> int:
        cuts = self.cut_edges()
        gates = sum(1 for e in cuts if e.kind is EdgeKind.GATE)
        return naive_cost(gates, len(cuts) - gates, self.num_leaves)

    def summary_row(self) -> Dict[str, Any]:
        return {
            "trial_id": self.trial_id,
            "pp_cost": self.pp_cost,
            "est_error": self.est_error,
            "num_leaves": self.num_leaves,
            "num_cuts": self.num_cuts,
            "leaf_qubits": self.params.max_qubits,
            "compression": self.params.compression.value,
            "next_leaf": self.params.next_leaf.value,
            "method": self.params.partition.method.value,
            "num_parts": self.params.partition.num_parts,
            "imbalance": self.params.partition.imbalance,
            "partition_seed": self.params.partition.seed,
        }


Boundary = FrozenSet[IrEdge]


def _dims(boundary: Boundary) -> int:
    return math.prod(edge.dim for edge in boundary)


def _subtree(ir: IrGraph, parts: Sequence[FrozenSet[VertexId]]) -> Tuple[TreeNode, int]:
    """Cheapest binary tree over disjoint parts; exhaustive for small counts, greedy merging otherwise

    A union's boundary is the symmetric difference of its members' boundaries,
    so node costs come from per-part cut sets computed once.
    """
    if len(parts) == 1:
        return TreeNode(vertices=parts[0]), 0
    boundaries = [frozenset(ir.cut_edges(part)) for part in parts]
    if len(parts) > _EXHAUSTIVE_SUBTREE_LIMIT:
        return _greedy_subtree(parts, boundaries)

    count = len(parts)
    union: Dict[int, FrozenSet[VertexId]] = {}
    bound: Dict[int, Boundary] = {}
    dims: Dict[int, int] = {}
    best: Dict[int, Tuple[int, TreeNode]] = {}
    for mask in range(1, 1 << count):
        lowest = mask & -mask
        if mask == lowest:
            i = lowest.bit_length() - 1
            union[mask], bound[mask] = parts[i], boundaries[i]
            dims[mask] = _dims(bound[mask])
            best[mask] = (0, TreeNode(vertices=parts[i]))
            continue
        union[mask] = union[lowest] | union[mask ^ lowest]
        bound[mask] = bound[lowest] ^ bound[mask ^ lowest]
        dims[mask] = _dims(bound[mask])
        choice = None
        sub = (mask - 1) & mask
        while sub:
            # each unordered split once: the left side keeps the lowest part
            if sub & lowest:
                rest = mask ^ sub
                cost = best[sub][0] + best[rest][0] + dims[sub] * dims[rest]
                if choice is None or cost < choice[0]:
                    choice = (cost, sub, rest)
            sub = (sub - 1) & mask
        cost, sub, rest = choice
        best[mask] = (cost, TreeNode(vertices=union[mask], left=best[sub][1], right=best[rest][1]))
    cost, node = best[(1 << count) - 1]
    return node, cost


def _greedy_subtree(parts: Sequence[FrozenSet[VertexId]], boundaries: Sequence[Boundary]) -> Tuple[TreeNode, int]:
    """Repeatedly merge the cheapest pair, preferring pairs that share a cut"""
    nodes = [(TreeNode(vertices=part), boundary, _dims(boundary)) for part, boundary in zip(parts, boundaries)]
    total = 0
    while len(nodes) > 1:
        best = None
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                key = (nodes[i][1].isdisjoint(nodes[j][1]), nodes[i][2] * nodes[j][2], i, j)
                if best is None or key < best:
                    best = key
        _, cost, i, j = best
        (left, left_bound, _), (right, right_bound, _) = nodes[i], nodes[j]
        merged = left_bound ^ right_bound
        nodes[i] = (TreeNode(vertices=left.vertices | right.vertices, left=left, right=right), merged, _dims(merged))
        del nodes[j]
        total += cost
    return nodes[0][0], total


def _leaf_shares(width: int, max_qubits: int, num_parts: int) -> List[int]:
    """Whole leaves each part should end up holding, smaller shares first"""
    budget = max(2, -(-width // max_qubits))
    count = min(num_parts, budget)
    base, extra = divmod(budget, count)
    return [base] * (count - extra) + [base + 1] * extra


def _pick_leaf(ir: IrGraph, pending: List[TreeNode], rule: NextLeaf) -> TreeNode:
    def metric(node: TreeNode) -> float:
        if rule is NextLeaf.MOST_QUBITS:
            return leaf_width(ir, node.vertices)
        if rule is NextLeaf.MOST_OPS:
            return len({v[0] for v in ir.expand(node.vertices)})
        return len(ir.cut_edges(node.vertices))
    return min(pending, key=lambda node: (-metric(node), min(node.vertices)))


def _partition_graph(ir: IrGraph) -> PartitionGraph:
    edges = [(*ir.endpoints(e), e.weight) for e in ir.edges]
    return PartitionGraph.build(ir.vertices, edges, {v: ir.weight_of(v) for v in ir.vertices})


def _leaf_graph(full: PartitionGraph, leaf: FrozenSet[VertexId]) -> PartitionGraph:
    edges = [(u, v, w) for u in leaf for v, w in full.adjacency[u].items() if v in leaf and u < v]
    return PartitionGraph.build(sorted(leaf), edges, {v: full.weights[v] for v in leaf})


def _score(ir: IrGraph, tree: ContractionTree, error_model: ErrorModel) -> List[float]:
    errors = []
    for leaf in tree.leaves():
        originals = ir.expand(leaf.vertices)
        if originals:
            errors.append(float(error_model(extract_fragment(ir, originals).circuit)))
    return errors


def optimize_once(circuit: Circuit, params: Hyperparams, error_model: Optional[ErrorModel] = None,
                  trial_id: int = 0) -> Candidate:
    """Grow one contraction tree under params"""
    error_model = error_model or estimate_error
    ir = compress(build_ir(circuit), params.compression)
    full = _partition_graph(ir)
    tree = ContractionTree(root=TreeNode(vertices=frozenset(ir.vertices)))
    cost = 0
    feasible, reason = True, ""
    splits = 0

    while True:
        pending = [leaf for leaf in tree.leaves() if not params.is_done(ir, leaf.vertices)]
        if not pending:
            break
        leaf = _pick_leaf(ir, pending, params.next_leaf)
        if len(leaf.vertices) < 2:
            feasible, reason = False, "unpartitionable leaf"
            break
        if params.termination is None:
            shares = _leaf_shares(leaf_width(ir, leaf.vertices), params.max_qubits, params.partition.num_parts)
        else:
            shares = [1] * params.partition.num_parts
        parts = partition(_leaf_graph(full, leaf.vertices), len(shares), params.partition.imbalance,
                          derive_seed(params.partition.seed, splits), method=params.partition.method, shares=shares)
        splits += 1
        subtree, added = _subtree(ir, parts)
        if cost + added > params.max_overhead:
            feasible, reason = False, "max_overhead exceeded"
            break
        leaf.left, leaf.right = subtree.left, subtree.right
        cost += added

    if feasible:
        leaves = sorted((leaf.vertices for leaf in tree.leaves()), key=min)
        if len(leaves) > 2:
            root, rebuilt = _subtree(ir, leaves)
            if rebuilt < cost:
                debug_log(f"trial {trial_id}: rebuilt tree {cost} -> {rebuilt}")
                tree, cost = ContractionTree(root=root), rebuilt

    leaf_errors = _score(ir, tree, error_model)
    candidate = Candidate(ir=ir, tree=tree, pp_cost=float(tree_cost(tree, ir)),
                          est_error=max(leaf_errors, default=0.0), params=params, feasible=feasible,
                          trial_id=trial_id, reason=reason, leaf_errors=leaf_errors)
    debug_log(f"trial {trial_id}: leaves={candidate.num_leaves} cost={candidate.pp_cost:g} "
              f"error={candidate.est_error:.4g} feasible={feasible} {reason}")
    return candidate


def build_candidate(circuit: Circuit, parts: Iterable[Iterable[VertexId]], params: Optional[Hyperparams] = None,
                    error_model: Optional[ErrorModel] = None) -> Candidate:
    """Candidate from an explicit partition of the uncompressed IR vertices"""
    error_model = error_model or estimate_error
    ir = build_ir(circuit)
    frozen = [frozenset(tuple(v) for v in part) for part in parts]
    frozen = [part for part in frozen if part]
    covered = [v for part in frozen for v in part]
    if len(covered) != len(set(covered)) or set(covered) != set(ir.vertices):
        raise OptimizationError("parts must partition the IR vertices")
    if not frozen:
        frozen = [frozenset()]
    frozen.sort(key=lambda part: min(part) if part else (-1, -1))
    root, _ = _subtree(ir, frozen)
    tree = ContractionTree(root=root)
    if params is None:
        width = max(leaf_width(ir, leaf.vertices) for leaf in tree.leaves())
        params = Hyperparams(max_qubits=max(width, 1), max_overhead=math.inf)
    leaf_errors = _score(ir, tree, error_model)
    return Candidate(ir=ir, tree=tree, pp_cost=float(tree_cost(tree, ir)), est_error=max(leaf_errors, default=0.0),
                     params=params, leaf_errors=leaf_errors)


def run_trials(circuit: Circuit, trials: int, search_space: SearchSpace, seed: int = 0,
               threads: int = 1, error_model: Optional[ErrorModel] = None) -> List[Candidate]:
    """Every trial's candidate, in trial order"""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    param_sets = []
    for trial in range(trials):
        rng = make_rng(seed, trial)
        param_sets.append(search_space.sample(rng, derive_seed(seed, trial, 1)))

    def run(trial: int) -> Candidate:
        return optimize_once(circuit, param_sets[trial], error_model=error_model, trial_id=trial)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        return list(executor.map(run, range(trials)))


def pareto_front(candidates: Iterable[Candidate]) -> List[Candidate]:
    """Non-dominated candidates by (pp_cost, est_error), one per point, sorted by cost"""
    pool = sorted(candidates, key=lambda c: (c.pp_cost, c.est_error, c.trial_id))
    front: List[Candidate] = []
    seen = set()
    for c in pool:
        point = (c.pp_cost, c.est_error)
        if point in seen:
            continue
        dominated = any(
            o.pp_cost <= c.pp_cost and o.est_error <= c.est_error
            and (o.pp_cost < c.pp_cost or o.est_error < c.est_error)
            for o in pool
        )
        if not dominated:
            front.append(c)
            seen.add(point)
    return front


def hyperopt(circuit: Circuit, trials: int, search_space: SearchSpace, seed: int = 0,
             threads: int = 1, error_model: Optional[ErrorModel] = None) -> List[Candidate]:
    """Random search over search_space; returns the Pareto front"""
    candidates = run_trials(circuit, trials, search_space, seed, threads, error_model)
    feasible = [c for c in candidates if c.feasible]
    if not feasible:
        reasons = sorted({c.reason for c in candidates})
        raise InfeasibleError(f"no feasible candidate in {trials} trials ({', '.join(reasons)})")
    return pareto_front(feasible)


def select_knee(front: Sequence[Candidate]) -> Candidate:
    """Point closest to the ideal (0, 0) after min-max normalization"""
    if not front:
        raise OptimizationError("cannot select from an empty front")

    def normalize(values: List[float]) -> List[float]:
        low, high = min(values), max(values)
        if high - low <= 0:
            return [0.0] * len(values)
        return [(v - low) / (high - low) for v in values]

    costs = normalize([c.pp_cost for c in front])
    errors = normalize([c.est_error for c in front])
    ranked = sorted(
        range(len(front)),
        key=lambda i: (math.hypot(costs[i], errors[i]), front[i].pp_cost, front[i].est_error),
    )
    return front[ranked[0]]
