"""
Contraction path search and pairwise contraction of classical tensors

Paths only look at index metadata, so they can be searched while the tensor
entries are still being computed. A path is a list of (i, j) merges in SSA
form: inputs are 0..n-1 and every merge creates the next id.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from knitting.errors import DimensionMismatchError, HtnError
from utils.debug_utils import debug_log
from utils.seed_utils import make_rng

Signature = Sequence[Tuple[str, int]]

DP_LIMIT = 12
GREEDY_RESTARTS = 8


@dataclass
class ContractionPath:
    steps: List[Tuple[int, int]] = field(default_factory=list)
    cost: int = 0


def _dims_of(signatures: Sequence[Signature]) -> Dict[str, int]:
    dims: Dict[str, int] = {}
    for signature in signatures:
        for name, dim in signature:
            if name in dims and dims[name] != dim:
                raise DimensionMismatchError(f"index '{name}' has dimensions {dims[name]} and {dim}")
            dims[name] = dim
    return dims


def _size(indices: FrozenSet[str], dims: Dict[str, int]) -> int:
    return math.prod(dims[name] for name in indices)


def merge_cost(a: FrozenSet[str], b: FrozenSet[str], dims: Dict[str, int]) -> int:
    """Multiplications for one pairwise merge: product over the union of both index sets"""
    return _size(a | b, dims)


def path_cost(signatures: Sequence[Signature], steps: Sequence[Tuple[int, int]]) -> int:
    dims = _dims_of(signatures)
    alive: Dict[int, FrozenSet[str]] = {i: frozenset(n for n, _ in s) for i, s in enumerate(signatures)}
    total, next_id = 0, len(signatures)
    for i, j in steps:
        a, b = alive.pop(i), alive.pop(j)
        total += merge_cost(a, b, dims)
        alive[next_id] = a ^ b
        next_id += 1
    return total


def _optimal(sets: List[FrozenSet[str]], dims: Dict[str, int]) -> ContractionPath:
    count = len(sets)
    open_of: Dict[int, FrozenSet[str]] = {}
    best: Dict[int, Tuple[int, Optional[Tuple[int, int]]]] = {}
    for mask in range(1, 1 << count):
        lowest = mask & -mask
        if mask == lowest:
            i = lowest.bit_length() - 1
            open_of[mask] = sets[i]
            best[mask] = (0, None)
            continue
        open_of[mask] = open_of[lowest] ^ open_of[mask ^ lowest]
        choice = None
        sub = (mask - 1) & mask
        while sub:
            if sub & lowest:
                rest = mask ^ sub
                cost = best[sub][0] + best[rest][0] + merge_cost(open_of[sub], open_of[rest], dims)
                if choice is None or cost < choice[0]:
                    choice = (cost, (sub, rest))
            sub = (sub - 1) & mask
        best[mask] = choice

    steps: List[Tuple[int, int]] = []
    next_id = [count]

    def emit(mask: int) -> int:
        cost, split = best[mask]
        if split is None:
            return mask.bit_length() - 1
        left = emit(split[0])
        right = emit(split[1])
        steps.append((left, right))
        created = next_id[0]
        next_id[0] += 1
        return created

    full = (1 << count) - 1
    emit(full)
    return ContractionPath(steps=steps, cost=best[full][0])


def _greedy(sets: List[FrozenSet[str]], dims: Dict[str, int], rng: Optional[np.random.Generator]) -> ContractionPath:
    alive: Dict[int, FrozenSet[str]] = dict(enumerate(sets))
    steps: List[Tuple[int, int]] = []
    total, next_id = 0, len(sets)
    while len(alive) > 1:
        ids = sorted(alive)
        pick = None
        for x, i in enumerate(ids):
            for j in ids[x + 1:]:
                if not alive[i] & alive[j]:
                    continue
                cost = merge_cost(alive[i], alive[j], dims)
                score = math.log(cost) + (rng.gumbel() if rng is not None else 0.0)
                if pick is None or score < pick[0]:
                    pick = (score, i, j)
        if pick is None:
            # disconnected components: outer products, smallest tensors first
            i, j = sorted(ids, key=lambda k: (_size(alive[k], dims), k))[:2]
        else:
            _, i, j = pick
        a, b = alive.pop(i), alive.pop(j)
        total += merge_cost(a, b, dims)
        alive[next_id] = a ^ b
        steps.append((i, j))
        next_id += 1
    return ContractionPath(steps=steps, cost=total)


def _restarted_greedy(sets: List[FrozenSet[str]], dims: Dict[str, int], seed: int, restarts: int) -> ContractionPath:
    path = _greedy(sets, dims, None)
    for restart in range(restarts):
        trial = _greedy(sets, dims, make_rng(seed, restart))
        if trial.cost < path.cost:
            path = trial
    return path


def _index_sets(signatures: Sequence[Signature]) -> Tuple[Dict[str, int], List[FrozenSet[str]]]:
    if not signatures:
        raise HtnError("cannot plan a contraction of zero tensors")
    return _dims_of(signatures), [frozenset(name for name, _ in signature) for signature in signatures]


def greedy_path(signatures: Sequence[Signature], seed: int = 0, restarts: int = GREEDY_RESTARTS) -> ContractionPath:
    """Deterministic greedy pass plus `restarts` Gumbel-perturbed ones, cheapest kept"""
    dims, sets = _index_sets(signatures)
    if len(sets) == 1:
        return ContractionPath()
    return _restarted_greedy(sets, dims, seed, restarts)


def find_path(signatures: Sequence[Signature], seed: int = 0) -> ContractionPath:
    """Exact dynamic programming up to DP_LIMIT tensors, restarted greedy above"""
    dims, sets = _index_sets(signatures)
    if len(sets) == 1:
        return ContractionPath()
    path = _optimal(sets, dims) if len(sets) <= DP_LIMIT else _restarted_greedy(sets, dims, seed, GREEDY_RESTARTS)
    debug_log(f"path over {len(sets)} tensors: {len(path.steps)} merges, cost {path.cost}")
    return path


def contract(tensors: Sequence[Tuple[Signature, np.ndarray]], path: ContractionPath) -> float:
    """Contract (indices, array) pairs along path down to a scalar"""
    if not tensors:
        return 1.0
    alive: Dict[int, Tuple[List[Tuple[str, int]], np.ndarray]] = {}
    for position, (signature, data) in enumerate(tensors):
        data = np.asarray(data, dtype=float)
        shape = tuple(dim for _, dim in signature)
        if data.shape != shape:
            raise DimensionMismatchError(f"tensor {position} has shape {data.shape}, indices say {shape}")
        alive[position] = (list(signature), data)

    next_id = len(tensors)
    for i, j in path.steps:
        if i == j or i not in alive or j not in alive:
            raise HtnError(f"path step ({i}, {j}) refers to a consumed or unknown tensor")
        (sig_a, a), (sig_b, b) = alive.pop(i), alive.pop(j)
        names_b = [name for name, _ in sig_b]
        axes_a, axes_b = [], []
        for axis, (name, dim) in enumerate(sig_a):
            if name in names_b:
                other = names_b.index(name)
                if sig_b[other][1] != dim:
                    raise DimensionMismatchError(f"index '{name}' has dimensions {dim} and {sig_b[other][1]}")
                axes_a.append(axis)
                axes_b.append(other)
        if axes_a:
            merged = np.tensordot(a, b, axes=(axes_a, axes_b))
        else:
            merged = np.multiply.outer(a, b)
        signature = [s for k, s in enumerate(sig_a) if k not in axes_a] + \
                    [s for k, s in enumerate(sig_b) if k not in axes_b]
        alive[next_id] = (signature, merged)
        next_id += 1

    if len(alive) != 1:
        raise HtnError(f"path leaves {len(alive)} tensors uncontracted")
    signature, result = alive.popitem()[1]
    if signature:
        raise HtnError(f"open indices remain after contraction: {[n for n, _ in signature]}")
    return float(result)
