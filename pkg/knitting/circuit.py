"""
Circuit and observable data model with canonical JSON serialization

Every other module speaks in these types. Circuits are frozen pydantic models,
so they can be shared read-only across worker threads.
"""

import json
import math
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from knitting.errors import CircuitFormatError


class GateKind(str, Enum):
    """Gate alphabet; values are the lowercase names used in circuit documents"""
    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CZ = "cz"
    RZZ = "rzz"
    MEAS = "meas"
    PREP0 = "prep0"
    PREP1 = "prep1"
    PREPPLUS = "prepplus"
    PREPI = "prepi"
    PLACEHOLDER = "placeholder"


TWO_QUBIT_KINDS = frozenset({GateKind.CZ, GateKind.RZZ})
CUTTABLE_KINDS = TWO_QUBIT_KINDS
PARAMETRIC_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RZZ})
PAULI_LETTERS = "IXYZ"


class Op(BaseModel):
    """One operation at a fixed position in program order"""
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0, description="0-based position in program order")
    kind: GateKind
    qubits: Tuple[int, ...]
    param: Optional[float] = Field(default=None, description="Rotation angle in radians")
    label: Optional[str] = Field(default=None, description="Slot label, placeholders only")

    @model_validator(mode="after")
    def _check_shape(self) -> "Op":
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} acts on {arity} qubit(s), got {list(self.qubits)}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind.value} needs two distinct qubits")
        if any(q < 0 for q in self.qubits):
            raise ValueError("qubit indices must be non-negative")
        if self.kind in PARAMETRIC_KINDS:
            if self.param is None:
                raise ValueError(f"{self.kind.value} requires a param")
            if not math.isfinite(self.param):
                raise ValueError("param must be finite")
        elif self.param is not None:
            raise ValueError(f"{self.kind.value} takes no param")
        if self.kind is GateKind.PLACEHOLDER:
            if not self.label:
                raise ValueError("placeholder requires a slot label")
        elif self.label is not None:
            raise ValueError("only placeholders carry a label")
        return self

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS


class PauliObservable(BaseModel):
    """Single Pauli string; leftmost character acts on qubit 0"""
    model_config = ConfigDict(frozen=True)

    paulis: str

    @field_validator("paulis")
    @classmethod
    def _check_letters(cls, value: str) -> str:
        if not value:
            raise ValueError("observable must not be empty")
        bad = sorted(set(value) - set(PAULI_LETTERS))
        if bad:
            raise ValueError(f"observable has non-Pauli characters {bad}")
        return value

    @classmethod
    def identity(cls, num_qubits: int) -> "PauliObservable":
        return cls(paulis="I" * num_qubits)

    def __len__(self) -> int:
        return len(self.paulis)

    def __str__(self) -> str:
        return self.paulis


class Circuit(BaseModel):
    """Ordered gate list over num_qubits qubits plus a Pauli observable"""
    model_config = ConfigDict(frozen=True)

    num_qubits: int = Field(ge=1)
    ops: Tuple[Op, ...] = ()
    observable: PauliObservable
    meta: Dict[str, Any] = Field(default_factory=dict, description="Free-form header, e.g. generator seed")

    @model_validator(mode="before")
    @classmethod
    def _coerce_observable(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            obs = data.get("observable")
            if obs is None:
                data["observable"] = PauliObservable.identity(int(data.get("num_qubits", 1)))
            elif isinstance(obs, str):
                data["observable"] = PauliObservable(paulis=obs)
        return data

    @model_validator(mode="after")
    def _check_ops(self) -> "Circuit":
        for position, op in enumerate(self.ops):
            if op.index != position:
                raise ValueError(f"op indices must be consecutive, found {op.index} at position {position}")
            for q in op.qubits:
                if q >= self.num_qubits:
                    raise ValueError(f"qubit index {q} out of range for {self.num_qubits} qubits")
        if len(self.observable) != self.num_qubits:
            raise ValueError(
                f"observable length {len(self.observable)} does not match {self.num_qubits} qubits")
        return self

    def with_observable(self, observable: "PauliObservable | str") -> "Circuit":
        return Circuit(num_qubits=self.num_qubits, ops=self.ops, observable=observable, meta=self.meta)

    def count_ops(self) -> Tuple[int, int]:
        """(single-qubit gate count, two-qubit gate count); cut placeholders are not gates"""
        two = sum(1 for op in self.ops if op.is_two_qubit)
        slots = sum(1 for op in self.ops if op.kind is GateKind.PLACEHOLDER)
        return len(self.ops) - two - slots, two


OpSpec = Tuple[Any, ...]


def circuit_from_ops(num_qubits: int, ops: Iterable[OpSpec], observable: "PauliObservable | str | None" = None,
                     meta: Optional[Dict[str, Any]] = None) -> Circuit:
    """Build a circuit from (kind, qubits[, param[, label]]) tuples, numbering ops in order"""
    built: List[Op] = []
    for index, spec in enumerate(ops):
        kind = GateKind(spec[0])
        qubits = spec[1]
        if isinstance(qubits, int):
            qubits = (qubits,)
        param = spec[2] if len(spec) > 2 else None
        label = spec[3] if len(spec) > 3 else None
        built.append(Op(index=index, kind=kind, qubits=tuple(qubits),
                        param=None if param is None else float(param), label=label))
    return Circuit(num_qubits=num_qubits, ops=tuple(built), observable=observable, meta=meta or {})


def _format_number(value: float) -> str:
    return format(float(value), ".17g")


def _op_to_json(op: Op) -> str:
    parts = [f'"gate":"{op.kind.value}"', '"qubits":[' + ",".join(str(q) for q in op.qubits) + "]"]
    if op.param is not None:
        parts.append(f'"param":{_format_number(op.param)}')
    if op.label is not None:
        parts.append(f'"label":{json.dumps(op.label)}')
    return "{" + ",".join(parts) + "}"


def serialize_circuit(circuit: Circuit) -> str:
    """Canonical document: fixed field order, 17 significant digits for params"""
    body = [
        f'"qubits":{circuit.num_qubits}',
        '"ops":[' + ",".join(_op_to_json(op) for op in circuit.ops) + "]",
        f'"observable":"{circuit.observable.paulis}"',
    ]
    if circuit.meta:
        body.append('"meta":' + json.dumps(circuit.meta, sort_keys=True, separators=(",", ":")))
    return "{" + ",".join(body) + "}"


_TOP_LEVEL_KEYS = {"qubits", "ops", "observable", "meta"}
_OP_KEYS = {"gate", "qubits", "param", "label"}
_GATE_NAMES = {kind.value: kind for kind in GateKind}


def circuit_from_document(doc: Any) -> Circuit:
    """Validate an already-decoded circuit document"""
    if not isinstance(doc, dict):
        raise CircuitFormatError("circuit document must be a JSON object")
    extra = set(doc) - _TOP_LEVEL_KEYS
    if extra:
        raise CircuitFormatError(f"unexpected top-level fields {sorted(extra)}")
    for key in ("qubits", "ops", "observable"):
        if key not in doc:
            raise CircuitFormatError(f"missing field '{key}'")
    if not isinstance(doc["ops"], list):
        raise CircuitFormatError("'ops' must be an array")
    if not isinstance(doc["observable"], str):
        raise CircuitFormatError("'observable' must be a Pauli string")

    ops: List[Op] = []
    try:
        for index, raw in enumerate(doc["ops"]):
            if not isinstance(raw, dict):
                raise CircuitFormatError(f"op {index} must be an object")
            extra = set(raw) - _OP_KEYS
            if extra:
                raise CircuitFormatError(f"op {index} has unexpected fields {sorted(extra)}")
            gate = raw.get("gate")
            if gate not in _GATE_NAMES:
                raise CircuitFormatError(f"op {index}: unknown gate kind {gate!r}")
            qubits = raw.get("qubits")
            if not isinstance(qubits, list) or not all(isinstance(q, int) and not isinstance(q, bool) for q in qubits):
                raise CircuitFormatError(f"op {index}: 'qubits' must be an integer array")
            param = raw.get("param")
            if param is not None and (isinstance(param, bool) or not isinstance(param, (int, float))):
                raise CircuitFormatError(f"op {index}: 'param' must be a number")
            ops.append(Op(index=index, kind=_GATE_NAMES[gate], qubits=tuple(qubits),
                          param=None if param is None else float(param), label=raw.get("label")))
        return Circuit(num_qubits=doc["qubits"], ops=tuple(ops), observable=doc["observable"],
                       meta=doc.get("meta") or {})
    except ValidationError as e:
        raise CircuitFormatError(str(e)) from e


def parse_circuit(text: str) -> Circuit:
    """Parse a canonical circuit document"""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitFormatError(f"malformed JSON: {e}") from e
    return circuit_from_document(doc)


def tensor_factor(observable: PauliObservable, qubit_subset: Sequence[int]) -> PauliObservable:
    """Restrict a Pauli string to qubit_subset, preserving subset order"""
    if not qubit_subset:
        raise CircuitFormatError("qubit subset must not be empty")
    n = len(observable)
    for q in qubit_subset:
        if not 0 <= q < n:
            raise CircuitFormatError(f"qubit {q} out of range for a {n}-qubit observable")
    return PauliObservable(paulis="".join(observable.paulis[q] for q in qubit_subset))
