"""
Quasiprobability decomposition tables

Each cut is described by a coefficient MATRIX with one axis per side of the
cut: rows index the upstream (side a) instantiations, columns the downstream
(side b) ones. Every table here has been checked against the uncut simulator
(see tests/test_qpd.py).
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from knitting.circuit import GateKind
from knitting.errors import QpdError


class QpdKind(str, Enum):
    CZ = "cz"
    RZZ = "rzz"
    WIRE = "wire"


@dataclass(frozen=True)
class Instantiation:
    """Single-qubit replacement for a placeholder

    ops run in order on the placeholder's qubit; observable, when set,
    overrides the measured Pauli letter of that qubit (wire-cut measurements).
    """
    ops: Tuple[GateKind, ...] = ()
    observable: Optional[str] = None

    def describe(self) -> str:
        text = "+".join(op.value for op in self.ops) or "id"
        if self.observable is not None:
            text += f"@{self.observable}"
        return text


@dataclass(frozen=True, eq=False)
class QpdSpec:
    kind: QpdKind
    param: Optional[float]
    inst_a: Tuple[Instantiation, ...]
    inst_b: Tuple[Instantiation, ...]
    coeffs: np.ndarray
    gamma: float
    norm: float = field(init=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (len(self.inst_a), len(self.inst_b)):
            raise QpdError(
                f"coefficient shape {coeffs.shape} does not match "
                f"{len(self.inst_a)}x{len(self.inst_b)} instantiations")
        if not np.all(np.isfinite(coeffs)):
            raise QpdError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "norm", float(np.abs(coeffs).sum()))
        if self.gamma < 1.0 - 1e-12:
            raise QpdError(f"gamma must be at least 1, got {self.gamma}")

    @property
    def dims(self) -> Tuple[int, int]:
        return len(self.inst_a), len(self.inst_b)


def _gate_instantiations(*sequences: Tuple[GateKind, ...]) -> Tuple[Instantiation, ...]:
    return tuple(Instantiation(ops=seq) for seq in sequences)


_CZ_INSTANTIATIONS = _gate_instantiations(
    (GateKind.SDG,), (GateKind.S,), (GateKind.MEAS, GateKind.SDG), (), (GateKind.Z,))

_RZZ_INSTANTIATIONS = _gate_instantiations(
    (), (GateKind.Z,), (GateKind.MEAS,), (GateKind.S,), (GateKind.SDG,))

_WIRE_MEASUREMENTS = tuple(Instantiation(observable=letter) for letter in "IZXY")
_WIRE_PREPARATIONS = _gate_instantiations(
    (GateKind.PREP0,), (GateKind.PREP1,), (GateKind.PREPPLUS,), (GateKind.PREPI,))

# Sampling overhead of a wire cut is 16 even though the entrywise norm of its matrix is 6
WIRE_GAMMA = 4.0


def _cz_spec() -> QpdSpec:
    coeffs = np.zeros((5, 5))
    coeffs[0, 0] = 0.5
    coeffs[1, 1] = 0.5
    coeffs[2, 3] = 0.5
    coeffs[2, 4] = -0.5
    coeffs[3, 2] = 0.5
    coeffs[4, 2] = -0.5
    return QpdSpec(kind=QpdKind.CZ, param=None, inst_a=_CZ_INSTANTIATIONS, inst_b=_CZ_INSTANTIATIONS,
                   coeffs=coeffs, gamma=3.0)


def _rzz_spec(theta: float) -> QpdSpec:
    half = -theta / 2
    c, s = math.cos(half), math.sin(half)
    cs = c * s
    coeffs = np.zeros((5, 5))
    coeffs[0, 0] = c * c
    coeffs[1, 1] = s * s
    coeffs[2, 3] = -cs
    coeffs[2, 4] = cs
    coeffs[3, 2] = -cs
    coeffs[4, 2] = cs
    gamma = float(np.abs(coeffs).sum())
    return QpdSpec(kind=QpdKind.RZZ, param=float(theta), inst_a=_RZZ_INSTANTIATIONS, inst_b=_RZZ_INSTANTIATIONS,
                   coeffs=coeffs, gamma=max(gamma, 1.0))


def _wire_spec() -> QpdSpec:
    coeffs = 0.5 * np.array([
        [1, 1, 0, 0],
        [1, -1, 0, 0],
        [-1, -1, 2, 0],
        [-1, -1, 0, 2],
    ], dtype=float)
    return QpdSpec(kind=QpdKind.WIRE, param=None, inst_a=_WIRE_MEASUREMENTS, inst_b=_WIRE_PREPARATIONS,
                   coeffs=coeffs, gamma=WIRE_GAMMA)


_CZ = _cz_spec()
_WIRE = _wire_spec()


def qpd_for(kind, param: Optional[float] = None) -> QpdSpec:
    """Decomposition table for a cuttable gate kind or a wire cut"""
    if isinstance(kind, GateKind):
        if kind is GateKind.CZ:
            kind = QpdKind.CZ
        elif kind is GateKind.RZZ:
            kind = QpdKind.RZZ
        else:
            raise QpdError(f"{kind.value} is not a cuttable gate")
    try:
        kind = QpdKind(kind)
    except ValueError as e:
        raise QpdError(f"unknown cut kind {kind!r}") from e

    if kind is QpdKind.CZ:
        return _CZ
    if kind is QpdKind.WIRE:
        return _WIRE
    if param is None:
        raise QpdError("rzz decomposition requires the rotation angle")
    if not math.isfinite(param):
        raise QpdError("rzz angle must be finite")
    return _rzz_spec(param)


def sampling_overhead(spec: QpdSpec) -> float:
    return spec.gamma ** 2
