"""
Hybrid tensor network: code generation and runtime transforms

Quantum tensors (QTs) are blueprint subcircuits with placeholder slots; every
coordinate of a QT's index grid picks one concrete instantiation per slot.
Classical tensors (CTs) hold QPD coefficient matrices. Index names are shared
by exactly two tensors: `<cut>.a` joins the side-a QT to the cut's CT,
`<cut>.b` the side-b QT.
"""

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from knitting.circuit import Circuit, GateKind, circuit_from_document, circuit_from_ops, serialize_circuit
from knitting.errors import (CircuitFormatError, DimensionMismatchError, ExecutorError, HtnError,
                             QpdError)
from knitting.executor import BaseExecutor
from knitting.ir import EdgeKind, extract_fragment, idle_qubits
from knitting.models import ExecutionMode
from knitting.optimizer import Candidate
from knitting.qpd import Instantiation, QpdSpec
from utils.debug_utils import debug_log
from utils.seed_utils import derive_seed, make_rng

Signature = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class QtIndex:
    """One axis of a QT; each choice assigns an instantiation to every placeholder"""
    name: str
    placeholders: Tuple[str, ...]
    choices: Tuple[Tuple[Instantiation, ...], ...]
    weights: Optional[Tuple[float, ...]] = None

    @property
    def dim(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class QuantumTensor:
    name: str
    blueprint: Circuit
    indices: Tuple[QtIndex, ...] = ()

    @property
    def signature(self) -> Signature:
        return tuple((index.name, index.dim) for index in self.indices)

    @property
    def grid_size(self) -> int:
        size = 1
        for index in self.indices:
            size *= index.dim
        return size


@dataclass(frozen=True, eq=False)
class ClassicalTensor:
    name: str
    indices: Signature
    data: np.ndarray
    sampleable: bool = False

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        shape = tuple(dim for _, dim in self.indices)
        if data.shape != shape:
            raise DimensionMismatchError(f"{self.name}: data shape {data.shape} does not match indices {shape}")
        if not np.all(np.isfinite(data)):
            raise HtnError(f"{self.name}: entries must be finite")
        object.__setattr__(self, "indices", tuple((str(n), int(d)) for n, d in self.indices))
        object.__setattr__(self, "data", data)


@dataclass
class SamplingPlan:
    """Kept coordinates and hit counts per sampled index; total_samples None means exhaustive"""
    total_samples: Optional[int] = None
    kept: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    hits: Dict[str, Tuple[int, ...]] = field(default_factory=dict)

    @property
    def exhaustive(self) -> bool:
        return self.total_samples is None


@dataclass
class HybridTensorNetwork:
    qts: List[QuantumTensor]
    cts: List[ClassicalTensor]
    plan: SamplingPlan = field(default_factory=SamplingPlan)

    def signatures(self) -> List[Signature]:
        """QTs first, then CTs; the order evaluated tensors are contracted in"""
        return [qt.signature for qt in self.qts] + [ct.indices for ct in self.cts]

    def indexed_cts(self) -> List[ClassicalTensor]:
        return [ct for ct in self.cts if ct.indices]

    def scalar_factor(self) -> float:
        """Product of the rank-0 CTs, multiplied in after contraction"""
        return float(np.prod([float(ct.data) for ct in self.cts if not ct.indices]))

    def index_owner(self) -> Dict[str, int]:
        return {index.name: position for position, qt in enumerate(self.qts) for index in qt.indices}

    def validate(self) -> "HybridTensorNetwork":
        seen: Dict[str, List[int]] = {}
        for signature in self.signatures():
            for name, dim in signature:
                seen.setdefault(name, []).append(dim)
        for name, dims in seen.items():
            if len(dims) != 2:
                raise HtnError(f"index '{name}' appears on {len(dims)} tensors, expected 2")
            if dims[0] != dims[1]:
                raise DimensionMismatchError(f"index '{name}' has dimensions {dims[0]} and {dims[1]}")
        return self

    @property
    def num_subcircuit_runs(self) -> int:
        return sum(qt.grid_size for qt in self.qts)


def _cut_name(label: str) -> str:
    return label.rsplit(".", 1)[0]


def generate_htn(candidate: Candidate, circuit: Optional[Circuit] = None) -> HybridTensorNetwork:
    """One QT per tree leaf, one CT per cut edge"""
    if not candidate.feasible:
        raise HtnError(f"cannot generate code for an infeasible candidate ({candidate.reason})")
    ir = candidate.ir
    if circuit is not None and circuit is not ir.circuit:
        if circuit.num_qubits != ir.circuit.num_qubits or circuit.ops != ir.circuit.ops:
            raise HtnError("circuit does not match the candidate's IR")
        ir = replace(ir, circuit=circuit)

    specs: Dict[str, QpdSpec] = {}
    cts: List[ClassicalTensor] = []
    for edge in candidate.cut_edges():
        if edge.kind is EdgeKind.GATE and not ir.circuit.ops[edge.u[0]].is_two_qubit:
            raise HtnError(f"cut on non-cuttable op {edge.u[0]}")
        try:
            spec = ir.qpd(edge)
        except QpdError as e:
            raise HtnError(f"cut {edge.name}: {e}") from e
        specs[edge.name] = spec
        rows, cols = spec.dims
        cts.append(ClassicalTensor(name=f"c:{edge.name}", indices=((f"{edge.name}.a", rows), (f"{edge.name}.b", cols)),
                                   data=spec.coeffs, sampleable=edge.kind is EdgeKind.GATE))

    qts: List[QuantumTensor] = []
    for leaf in candidate.tree.leaves():
        originals = ir.expand(leaf.vertices)
        if not originals:
            continue
        fragment = extract_fragment(ir, originals)
        indices = []
        for op in fragment.circuit.ops:
            if op.kind is not GateKind.PLACEHOLDER:
                continue
            cut = _cut_name(op.label)
            if cut not in specs:
                raise HtnError(f"placeholder {op.label} has no matching cut")
            side = specs[cut].inst_a if op.label.endswith(".a") else specs[cut].inst_b
            indices.append(QtIndex(name=op.label, placeholders=(op.label,), choices=tuple((inst,) for inst in side)))
        qts.append(QuantumTensor(name=f"qt{len(qts)}", blueprint=fragment.circuit, indices=tuple(indices)))

    letters = [ir.circuit.observable.paulis[q] for q in idle_qubits(ir)]
    if any(letter != "I" for letter in letters):
        value = 1.0 if all(letter in "IZ" for letter in letters) else 0.0
        cts.append(ClassicalTensor(name="idle", indices=(), data=np.array(value)))

    debug_log(f"h-TN: {len(qts)} QTs, {len(cts)} CTs")
    return HybridTensorNetwork(qts=qts, cts=cts).validate()


def _fuse_qt_indices(qt: QuantumTensor, names: Sequence[str], fused_name: str) -> QuantumTensor:
    by_name = {index.name: index for index in qt.indices}
    parts = [by_name[name] for name in names]
    choices = tuple(sum(combo, ()) for combo in itertools.product(*(part.choices for part in parts)))
    weights = None
    if all(part.weights is not None for part in parts):
        weights = tuple(float(np.prod(combo)) for combo in itertools.product(*(part.weights for part in parts)))
    fused = QtIndex(name=fused_name, placeholders=sum((part.placeholders for part in parts), ()),
                    choices=choices, weights=weights)
    indices = []
    for index in qt.indices:
        if index.name == names[0]:
            indices.append(fused)
        elif index.name not in names:
            indices.append(index)
    return replace(qt, indices=tuple(indices))


def simplify(htn: HybridTensorNetwork) -> HybridTensorNetwork:
    """Kronecker-fuse all CTs that join the same pair of QTs"""
    owner = htn.index_owner()
    pairs: Dict[Tuple[int, int], List[Tuple[ClassicalTensor, np.ndarray, Signature]]] = {}
    order: List[Any] = []
    for ct in htn.cts:
        names = [name for name, _ in ct.indices]
        if len(names) != 2 or not all(name in owner for name in names):
            order.append(ct)
            continue
        qa, qb = owner[names[0]], owner[names[1]]
        data, indices = ct.data, ct.indices
        if qa > qb:
            qa, qb = qb, qa
            data, indices = ct.data.T, (ct.indices[1], ct.indices[0])
        key = (qa, qb)
        if key not in pairs:
            pairs[key] = []
            order.append(key)
        pairs[key].append((ct, data, indices))

    qts = list(htn.qts)
    cts: List[ClassicalTensor] = []
    for item in order:
        if isinstance(item, ClassicalTensor):
            cts.append(item)
            continue
        members = pairs[item]
        if len(members) == 1:
            cts.append(members[0][0])
            continue
        row_names = [indices[0][0] for _, _, indices in members]
        col_names = [indices[1][0] for _, _, indices in members]
        row_name, col_name = "+".join(row_names), "+".join(col_names)
        data = reduce(np.kron, [d for _, d, _ in members])
        cts.append(ClassicalTensor(
            name="+".join(ct.name for ct, _, _ in members),
            indices=((row_name, data.shape[0]), (col_name, data.shape[1])),
            data=data,
            sampleable=all(ct.sampleable for ct, _, _ in members),
        ))
        lower, higher = item
        qts[lower] = _fuse_qt_indices(qts[lower], row_names, row_name)
        qts[higher] = _fuse_qt_indices(qts[higher], col_names, col_name)
        debug_log(f"fused {len(members)} CTs between {qts[lower].name} and {qts[higher].name}")
    return HybridTensorNetwork(qts=qts, cts=cts, plan=htn.plan).validate()


def _truncate_index(qt: QuantumTensor, name: str, kept: np.ndarray, weights: np.ndarray) -> QuantumTensor:
    indices = []
    for index in qt.indices:
        if index.name == name:
            index = QtIndex(name=index.name, placeholders=index.placeholders,
                            choices=tuple(index.choices[k] for k in kept),
                            weights=tuple(float(w) for w in weights))
        indices.append(index)
    return replace(qt, indices=tuple(indices))


def sample_qpd(htn: HybridTensorNetwork, samples: Optional[int], seed: int = 0
               ) -> Tuple[HybridTensorNetwork, SamplingPlan]:
    """Monte Carlo QPD sampling with truncation of unsampled rows and columns

    Kept entries become sign(c) * |C|_1 * hits / samples, an unbiased estimate
    of the coefficient. Wire-cut CTs are never sampled.
    """
    if samples is None:
        plan = SamplingPlan()
        return HybridTensorNetwork(qts=list(htn.qts), cts=list(htn.cts), plan=plan), plan
    if samples < 1:
        raise HtnError("number of QPD samples must be at least 1")

    owner = htn.index_owner()
    qts = list(htn.qts)
    cts: List[ClassicalTensor] = []
    plan = SamplingPlan(total_samples=int(samples))
    for position, ct in enumerate(htn.cts):
        norm = float(np.abs(ct.data).sum())
        if not ct.sampleable or ct.data.ndim != 2 or norm == 0.0:
            cts.append(ct)
            continue
        rng = make_rng(seed, position)
        counts = rng.multinomial(samples, (np.abs(ct.data) / norm).ravel()).reshape(ct.data.shape)
        row_hits, col_hits = counts.sum(axis=1), counts.sum(axis=0)
        rows, cols = np.flatnonzero(row_hits), np.flatnonzero(col_hits)
        estimate = np.sign(ct.data) * norm * counts / samples
        data = estimate[np.ix_(rows, cols)]
        (row_name, _), (col_name, _) = ct.indices
        cts.append(ClassicalTensor(name=ct.name, indices=((row_name, len(rows)), (col_name, len(cols))),
                                   data=data, sampleable=True))
        for name, kept, hits in ((row_name, rows, row_hits[rows]), (col_name, cols, col_hits[cols])):
            plan.kept[name] = tuple(int(k) for k in kept)
            plan.hits[name] = tuple(int(h) for h in hits)
            q = owner[name]
            qts[q] = _truncate_index(qts[q], name, kept, hits / samples)
    return HybridTensorNetwork(qts=qts, cts=cts, plan=plan).validate(), plan


def substitute(blueprint: Circuit, assignments: Dict[str, Instantiation]) -> Circuit:
    """Replace every placeholder with its assigned single-qubit instantiation"""
    letters = list(blueprint.observable.paulis)
    ops = []
    for op in blueprint.ops:
        if op.kind is not GateKind.PLACEHOLDER:
            ops.append((op.kind, op.qubits, op.param))
            continue
        if op.label not in assignments:
            raise HtnError(f"no instantiation for placeholder {op.label}")
        inst = assignments[op.label]
        for kind in inst.ops:
            ops.append((kind, op.qubits))
        if inst.observable is not None:
            letters[op.qubits[0]] = inst.observable
    return circuit_from_ops(blueprint.num_qubits, ops, observable="".join(letters))


def coordinate_shots(qt: QuantumTensor, coordinate: Tuple[int, ...], shots: int) -> int:
    """Shots for one grid point: sampled weights where present, an even split otherwise"""
    weight = 1.0
    for index, k in zip(qt.indices, coordinate):
        weight *= index.weights[k] if index.weights is not None else 1.0 / index.dim
    return max(1, int(round(shots * weight)))


def evaluate_qt(qt: QuantumTensor, executor: BaseExecutor, mode: ExecutionMode = ExecutionMode.EXACT,
                shots: int = 20000, seed: int = 0, threads: int = 1) -> ClassicalTensor:
    """Run every instance of a QT, returning a CT with the same indices"""
    mode = ExecutionMode(mode)
    grid = [range(index.dim) for index in qt.indices]
    coordinates = list(itertools.product(*grid))

    def run(item: Tuple[int, Tuple[int, ...]]) -> float:
        position, coordinate = item
        assignments: Dict[str, Instantiation] = {}
        for index, k in zip(qt.indices, coordinate):
            assignments.update(zip(index.placeholders, index.choices[k]))
        circuit = substitute(qt.blueprint, assignments)
        if mode is ExecutionMode.SHOTS:
            result = executor.execute(circuit, shots=coordinate_shots(qt, coordinate, shots),
                                      seed=derive_seed(seed, position))
        else:
            result = executor.execute(circuit)
        if not result.get("success"):
            raise ExecutorError(qt.name, coordinate, result.get("exception"))
        return float(result["value"])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        values = list(pool.map(run, enumerate(coordinates)))
    data = np.array(values, dtype=float).reshape(tuple(index.dim for index in qt.indices))
    return ClassicalTensor(name=qt.name, indices=qt.signature, data=data)


def _instantiation_to_json(inst: Instantiation) -> Dict[str, Any]:
    return {"ops": [op.value for op in inst.ops], "observable": inst.observable}


def _instantiation_from_json(doc: Dict[str, Any]) -> Instantiation:
    return Instantiation(ops=tuple(GateKind(op) for op in doc["ops"]), observable=doc.get("observable"))


def htn_to_json(htn: HybridTensorNetwork) -> str:
    doc = {
        "qts": [
            {
                "name": qt.name,
                "blueprint": json.loads(serialize_circuit(qt.blueprint)),
                "indices": [
                    {
                        "name": index.name,
                        "placeholders": list(index.placeholders),
                        "choices": [[_instantiation_to_json(i) for i in choice] for choice in index.choices],
                        "weights": None if index.weights is None else list(index.weights),
                    }
                    for index in qt.indices
                ],
            }
            for qt in htn.qts
        ],
        "cts": [
            {
                "name": ct.name,
                "indices": [[name, dim] for name, dim in ct.indices],
                "data": [float(x) for x in ct.data.ravel()],
                "sampleable": ct.sampleable,
            }
            for ct in htn.cts
        ],
        "plan": None if htn.plan.exhaustive else {
            "total_samples": htn.plan.total_samples,
            "kept": {name: list(v) for name, v in htn.plan.kept.items()},
            "hits": {name: list(v) for name, v in htn.plan.hits.items()},
        },
    }
    return json.dumps(doc, separators=(",", ":"))


def htn_from_json(text: str) -> HybridTensorNetwork:
    try:
        doc = json.loads(text)
        qts = []
        for raw in doc["qts"]:
            indices = tuple(
                QtIndex(
                    name=index["name"],
                    placeholders=tuple(index["placeholders"]),
                    choices=tuple(tuple(_instantiation_from_json(i) for i in choice) for choice in index["choices"]),
                    weights=None if index.get("weights") is None else tuple(float(w) for w in index["weights"]),
                )
                for index in raw["indices"]
            )
            qts.append(QuantumTensor(name=raw["name"], blueprint=circuit_from_document(raw["blueprint"]),
                                     indices=indices))
        cts = []
        for raw in doc["cts"]:
            indices = tuple((str(name), int(dim)) for name, dim in raw["indices"])
            shape = tuple(dim for _, dim in indices)
            cts.append(ClassicalTensor(name=raw["name"], indices=indices,
                                       data=np.array(raw["data"], dtype=float).reshape(shape),
                                       sampleable=bool(raw.get("sampleable", False))))
        plan = SamplingPlan()
        if doc.get("plan"):
            plan = SamplingPlan(
                total_samples=int(doc["plan"]["total_samples"]),
                kept={k: tuple(v) for k, v in doc["plan"]["kept"].items()},
                hits={k: tuple(v) for k, v in doc["plan"]["hits"].items()},
            )
    except (KeyError, TypeError, ValueError, AttributeError, CircuitFormatError) as e:
        if isinstance(e, HtnError):
            raise
        raise HtnError(f"malformed h-TN document: {e}") from e
    return HybridTensorNetwork(qts=qts, cts=cts, plan=plan).validate()
