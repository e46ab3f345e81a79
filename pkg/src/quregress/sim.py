"""Dense statevector simulation of parametrized circuits.

Basis convention: wire 0 is the most significant bit of the basis index, so
``|q0 q1>`` reads left to right.  The functions here are the readable
reference path; training goes through the compiled batch kernels in
:mod:`quregress._kernels`, which are checked against this module in the tests.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgument


class GateKind(enum.Enum):
    IDENTITY = "I"
    PAULI_X = "X"
    HADAMARD = "H"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    ROT3 = "ROT3"
    CNOT = "CNOT"
    CZ = "CZ"
    CRX = "CRX"
    CRY = "CRY"
    CRZ = "CRZ"

    @property
    def arity(self) -> int:
        if self is GateKind.ROT3:
            return 3
        if self in _ONE_ANGLE:
            return 1
        return 0

    @property
    def n_wires(self) -> int:
        return 2 if self in _TWO_QUBIT else 1


_ONE_ANGLE = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ,
                        GateKind.CRX, GateKind.CRY, GateKind.CRZ})
_TWO_QUBIT = frozenset({GateKind.CNOT, GateKind.CZ,
                        GateKind.CRX, GateKind.CRY, GateKind.CRZ})


class AngleKind(enum.Enum):
    TRAINABLE = "trainable"
    FEATURE = "feature"
    CONSTANT = "constant"


@dataclass(frozen=True)
class AngleSource:
    kind: AngleKind
    value: float  # index for TRAINABLE/FEATURE, radians for CONSTANT

    def __post_init__(self):
        if self.kind is not AngleKind.CONSTANT:
            if int(self.value) != self.value or self.value < 0:
                raise InvalidArgument(f"{self.kind.value} index must be a non-negative integer")
            object.__setattr__(self, "value", int(self.value))

    def to_json(self):
        return {"kind": self.kind.value, "value": self.value}

    @classmethod
    def from_json(cls, obj):
        return cls(AngleKind(obj["kind"]), obj["value"])


def trainable(index: int) -> AngleSource:
    return AngleSource(AngleKind.TRAINABLE, index)


def feature(index: int) -> AngleSource:
    return AngleSource(AngleKind.FEATURE, index)


def constant(radians: float) -> AngleSource:
    return AngleSource(AngleKind.CONSTANT, float(radians))


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    wires: tuple[int, ...]
    angles: tuple[AngleSource, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        object.__setattr__(self, "angles", tuple(self.angles))
        if len(self.wires) != self.kind.n_wires:
            raise InvalidArgument(f"{self.kind.name} acts on {self.kind.n_wires} wire(s), got {self.wires}")
        if len(set(self.wires)) != len(self.wires):
            raise InvalidArgument(f"{self.kind.name} needs distinct control and target, got {self.wires}")
        if any(w < 0 for w in self.wires):
            raise InvalidArgument("wire indices must be non-negative")
        if len(self.angles) != self.kind.arity:
            raise InvalidArgument(f"{self.kind.name} takes {self.kind.arity} angle(s), got {len(self.angles)}")

    def to_json(self):
        return {"kind": self.kind.name, "wires": list(self.wires),
                "angles": [a.to_json() for a in self.angles]}

    @classmethod
    def from_json(cls, obj):
        return cls(GateKind[obj["kind"]], tuple(obj["wires"]),
                   tuple(AngleSource.from_json(a) for a in obj.get("angles", [])))


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered gate list on ``n_qubits`` wires.

    Trainable slots must be numbered 0, 1, 2, ... in gate (and angle) order;
    ``n_trainable`` caches their count.
    """

    n_qubits: int
    gates: tuple[GateOp, ...] = ()
    n_trainable: int = field(init=False)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidArgument("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        expected = 0
        for pos, gate in enumerate(self.gates):
            if max(gate.wires) >= self.n_qubits:
                raise InvalidArgument(f"gate {pos} ({gate.kind.name}) uses wire "
                                      f"{max(gate.wires)} on a {self.n_qubits}-qubit circuit")
            for a in gate.angles:
                if a.kind is AngleKind.TRAINABLE:
                    if a.value != expected:
                        raise InvalidArgument(f"gate {pos}: trainable index {a.value}, expected {expected}")
                    expected += 1
        object.__setattr__(self, "n_trainable", expected)

    @property
    def n_feature_slots(self) -> int:
        return sum(a.kind is AngleKind.FEATURE for g in self.gates for a in g.angles)

    def to_json(self):
        return {"n_qubits": self.n_qubits, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["n_qubits"]), tuple(GateOp.from_json(g) for g in obj["gates"]))


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise InvalidArgument(f"expected {2 ** self.n_qubits} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def zero_state(n_qubits: int) -> StateVector:
    if n_qubits < 1:
        raise InvalidArgument("n_qubits must be >= 1")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


# -- gate matrices ---------------------------------------------------------

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_I2 = np.eye(2, dtype=np.complex128)


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)


def rot3_matrix(a: float, b: float, c: float) -> np.ndarray:
    # RZ(a) acts first, then RY(b), then RZ(c)
    return rz_matrix(c) @ ry_matrix(b) @ rz_matrix(a)


def _controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=np.complex128)
    out[2:, 2:] = u
    return out


def gate_matrix(kind: GateKind, angles: Sequence[float]) -> np.ndarray:
    """Unitary of ``kind``; two-qubit matrices are ordered (control, target)."""
    if len(angles) != kind.arity:
        raise InvalidArgument(f"{kind.name} takes {kind.arity} angle(s), got {len(angles)}")
    if kind is GateKind.IDENTITY:
        return _I2
    if kind is GateKind.PAULI_X:
        return _X
    if kind is GateKind.HADAMARD:
        return _H
    if kind is GateKind.RX:
        return rx_matrix(angles[0])
    if kind is GateKind.RY:
        return ry_matrix(angles[0])
    if kind is GateKind.RZ:
        return rz_matrix(angles[0])
    if kind is GateKind.ROT3:
        return rot3_matrix(*angles)
    if kind is GateKind.CNOT:
        return _controlled(_X)
    if kind is GateKind.CZ:
        return np.diag([1, 1, 1, -1]).astype(np.complex128)
    if kind is GateKind.CRX:
        return _controlled(rx_matrix(angles[0]))
    if kind is GateKind.CRY:
        return _controlled(ry_matrix(angles[0]))
    if kind is GateKind.CRZ:
        return _controlled(rz_matrix(angles[0]))
    raise InvalidArgument(f"unknown gate kind {kind}")


def apply_unitary(state: StateVector, u: np.ndarray, wires: Sequence[int]) -> StateVector:
    n = state.n_qubits
    k = len(wires)
    if any(w < 0 or w >= n for w in wires):
        raise InvalidArgument(f"wires {tuple(wires)} out of range for {n} qubit(s)")
    psi = state.amplitudes.reshape((2,) * n)
    u = u.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(wires)))
    out = np.moveaxis(out, list(range(k)), list(wires))
    return StateVector(n, out.reshape(-1))


def apply_gate(state: StateVector, gate: GateOp, resolved_angles: Sequence[float]) -> StateVector:
    if len(resolved_angles) != gate.kind.arity:
        raise InvalidArgument(f"{gate.kind.name} takes {gate.kind.arity} angle(s), "
                              f"got {len(resolved_angles)}")
    if max(gate.wires) >= state.n_qubits:
        raise InvalidArgument(f"wire {max(gate.wires)} out of range for {state.n_qubits} qubit(s)")
    if gate.kind is GateKind.IDENTITY:
        return state
    return apply_unitary(state, gate_matrix(gate.kind, resolved_angles), gate.wires)


def resolve_angles(gate: GateOp, params: np.ndarray, features: np.ndarray) -> list[float]:
    out = []
    for a in gate.angles:
        if a.kind is AngleKind.TRAINABLE:
            out.append(float(params[a.value]))
        elif a.kind is AngleKind.FEATURE:
            if len(features) == 0:
                raise InvalidArgument("circuit reads a feature angle but no features were given")
            out.append(float(features[a.value % len(features)]))
        else:
            out.append(float(a.value))
    return out


def _check_params(circuit: CircuitSpec, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_trainable:
        raise InvalidArgument(f"circuit has {circuit.n_trainable} trainable angle(s), "
                              f"got {params.shape[0]} parameter(s)")
    return params


def run_circuit(circuit: CircuitSpec, params, features) -> StateVector:
    params = _check_params(circuit, params)
    features = np.asarray(features, dtype=np.float64).reshape(-1)
    state = zero_state(circuit.n_qubits)
    for gate in circuit.gates:
        state = apply_gate(state, gate, resolve_angles(gate, params, features))
    return state


def z_signs(n_qubits: int, wire: int) -> np.ndarray:
    """+1/-1 eigenvalue of Z on ``wire`` for every basis index."""
    bits = (np.arange(2 ** n_qubits) >> (n_qubits - 1 - wire)) & 1
    return 1.0 - 2.0 * bits


def expectation_z(state: StateVector, wire: int) -> float:
    if wire < 0 or wire >= state.n_qubits:
        raise InvalidArgument(f"wire {wire} out of range for {state.n_qubits} qubit(s)")
    return float(np.dot(z_signs(state.n_qubits, wire), state.probabilities()))


def gradient_adjoint(circuit: CircuitSpec, params, features, wire: int = 0) -> np.ndarray:
    """Exact d<Z_wire>/d(params) by a reverse sweep over the statevector."""
    from ._kernels import expval_and_jacobian

    params = _check_params(circuit, params)
    if wire < 0 or wire >= circuit.n_qubits:
        raise InvalidArgument(f"wire {wire} out of range for {circuit.n_qubits} qubit(s)")
    features = np.asarray(features, dtype=np.float64).reshape(1, -1)
    _, jac = expval_and_jacobian(circuit, params, features, wire)
    return jac[0]
