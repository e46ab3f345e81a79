"""Compiled batch kernels: forward simulation and adjoint Jacobians.

A :class:`CircuitSpec` is flattened into parallel integer/float arrays (ROT3
expanded into its three primitive rotations) and then evaluated for a whole
batch of feature rows at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import InvalidArgument
from .sim import AngleKind, CircuitSpec, GateKind

OP_RX, OP_RY, OP_RZ, OP_CNOT, OP_CZ, OP_H, OP_X = 0, 1, 2, 3, 4, 5, 6
SRC_NONE, SRC_TRAINABLE, SRC_FEATURE, SRC_CONSTANT = 0, 1, 2, 3

_ROTATION = {GateKind.RX: OP_RX, GateKind.RY: OP_RY, GateKind.RZ: OP_RZ,
             GateKind.CRX: OP_RX, GateKind.CRY: OP_RY, GateKind.CRZ: OP_RZ}
_FIXED = {GateKind.CNOT: OP_X, GateKind.CZ: OP_CZ,
          GateKind.HADAMARD: OP_H, GateKind.PAULI_X: OP_X}
_SRC = {AngleKind.TRAINABLE: SRC_TRAINABLE, AngleKind.FEATURE: SRC_FEATURE,
        AngleKind.CONSTANT: SRC_CONSTANT}


@dataclass(frozen=True)
class Program:
    n_qubits: int
    n_params: int
    op: np.ndarray
    ctrl: np.ndarray  # control bit mask, 0 when uncontrolled
    tgt: np.ndarray  # target bit mask
    src: np.ndarray
    idx: np.ndarray
    const: np.ndarray
    uses_features: bool


def compile_program(circuit: CircuitSpec) -> Program:
    n = circuit.n_qubits
    rows = []

    def mask(w):
        return 1 << (n - 1 - w)

    for g in circuit.gates:
        k = g.kind
        if k is GateKind.IDENTITY:
            continue
        if k is GateKind.ROT3:
            for axis, a in zip((OP_RZ, OP_RY, OP_RZ), g.angles):
                rows.append((axis, 0, mask(g.wires[0]), _SRC[a.kind], a.value))
        elif k in _ROTATION:
            a = g.angles[0]
            c = mask(g.wires[0]) if k.n_wires == 2 else 0
            rows.append((_ROTATION[k], c, mask(g.wires[-1]), _SRC[a.kind], a.value))
        elif k is GateKind.CNOT:
            rows.append((OP_X, mask(g.wires[0]), mask(g.wires[1]), SRC_NONE, 0))
        elif k is GateKind.CZ:
            rows.append((OP_CZ, mask(g.wires[0]), mask(g.wires[1]), SRC_NONE, 0))
        else:
            rows.append((_FIXED[k], 0, mask(g.wires[0]), SRC_NONE, 0))
    m = len(rows)
    op = np.empty(m, np.int64)
    ctrl = np.empty(m, np.int64)
    tgt = np.empty(m, np.int64)
    src = np.empty(m, np.int64)
    idx = np.zeros(m, np.int64)
    const = np.zeros(m, np.float64)
    for i, (o, c, t, s, v) in enumerate(rows):
        op[i], ctrl[i], tgt[i], src[i] = o, c, t, s
        if s == SRC_CONSTANT:
            const[i] = v
        else:
            idx[i] = int(v)
    return Program(n, circuit.n_trainable, op, ctrl, tgt, src, idx, const,
                   bool(np.any(src == SRC_FEATURE)))


@nb.njit(cache=True, inline="always")
def _apply(psi, code, cmask, tmask, theta):
    dim = psi.shape[0]
    if code == OP_CZ:
        both = cmask | tmask
        for i in range(dim):
            if i & both == both:
                psi[i] = -psi[i]
        return
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    for i in range(dim):
        if i & tmask or (cmask != 0 and not i & cmask):
            continue
        j = i | tmask
        a = psi[i]
        b = psi[j]
        if code == OP_RX:
            psi[i] = c * a - 1j * s * b
            psi[j] = -1j * s * a + c * b
        elif code == OP_RY:
            psi[i] = c * a - s * b
            psi[j] = s * a + c * b
        elif code == OP_RZ:
            psi[i] = (c - 1j * s) * a
            psi[j] = (c + 1j * s) * b
        elif code == OP_X:
            psi[i] = b
            psi[j] = a
        elif code == OP_H:
            r = 0.7071067811865476
            psi[i] = r * (a + b)
            psi[j] = r * (a - b)


@nb.njit(cache=True, inline="always")
def _generator_overlap(lam, psi, code, cmask, tmask):
    """Im <lam| G psi> restricted to the control subspace; G the rotation's Pauli."""
    acc = 0.0 + 0.0j
    for i in range(psi.shape[0]):
        if i & tmask or (cmask != 0 and not i & cmask):
            continue
        j = i | tmask
        if code == OP_RX:
            acc += np.conj(lam[i]) * psi[j] + np.conj(lam[j]) * psi[i]
        elif code == OP_RY:
            acc += np.conj(lam[i]) * (-1j * psi[j]) + np.conj(lam[j]) * (1j * psi[i])
        else:
            acc += np.conj(lam[i]) * psi[i] - np.conj(lam[j]) * psi[j]
    return acc.imag


@nb.njit(cache=True, inline="always")
def _angle(k, s, src, idx, const, params, X):
    kind = src[k]
    if kind == SRC_TRAINABLE:
        return params[idx[k]]
    if kind == SRC_FEATURE:
        return X[s, idx[k] % X.shape[1]]
    if kind == SRC_CONSTANT:
        return const[k]
    return 0.0


@nb.njit(cache=True)
def _batch_states(n_qubits, op, ctrl, tgt, src, idx, const, params, X):
    n_samples = X.shape[0]
    dim = 1 << n_qubits
    out = np.zeros((n_samples, dim), np.complex128)
    for s in range(n_samples):
        psi = out[s]
        psi[0] = 1.0
        for k in range(op.shape[0]):
            _apply(psi, op[k], ctrl[k], tgt[k], _angle(k, s, src, idx, const, params, X))
    return out


@nb.njit(cache=True)
def _batch_expval_jac(n_qubits, op, ctrl, tgt, src, idx, const, params, X,
                      wire_mask, n_params, want_jac):
    n_samples = X.shape[0]
    dim = 1 << n_qubits
    n_ops = op.shape[0]
    f = np.empty(n_samples)
    jac = np.zeros((n_samples, n_params if want_jac else 0))
    psi = np.empty(dim, np.complex128)
    lam = np.empty(dim, np.complex128)
    angles = np.empty(n_ops)
    for s in range(n_samples):
        psi[:] = 0.0
        psi[0] = 1.0
        for k in range(n_ops):
            angles[k] = _angle(k, s, src, idx, const, params, X)
            _apply(psi, op[k], ctrl[k], tgt[k], angles[k])
        val = 0.0
        for i in range(dim):
            p = psi[i].real ** 2 + psi[i].imag ** 2
            if i & wire_mask:
                lam[i] = -psi[i]
                val -= p
            else:
                lam[i] = psi[i]
                val += p
        f[s] = val
        if not want_jac:
            continue
        for k in range(n_ops - 1, -1, -1):
            code = op[k]
            if src[k] == SRC_TRAINABLE:
                jac[s, idx[k]] += _generator_overlap(lam, psi, code, ctrl[k], tgt[k])
            if code == OP_RX or code == OP_RY or code == OP_RZ:
                _apply(psi, code, ctrl[k], tgt[k], -angles[k])
                _apply(lam, code, ctrl[k], tgt[k], -angles[k])
            else:
                _apply(psi, code, ctrl[k], tgt[k], 0.0)
                _apply(lam, code, ctrl[k], tgt[k], 0.0)
    return f, jac


def _prepare(circuit, params, X):
    prog = circuit if isinstance(circuit, Program) else compile_program(circuit)
    params = np.ascontiguousarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != prog.n_params:
        raise InvalidArgument(f"circuit has {prog.n_params} trainable angle(s), "
                              f"got {params.shape[0]} parameter(s)")
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[1] == 0:
        if prog.uses_features:
            raise InvalidArgument("circuit reads feature angles but the input has no columns")
        X = np.zeros((X.shape[0], 1))
    return prog, params, X


def batch_states(circuit, params, X) -> np.ndarray:
    """Final statevectors, one row per feature row of ``X``."""
    prog, params, X = _prepare(circuit, params, X)
    return _batch_states(prog.n_qubits, prog.op, prog.ctrl, prog.tgt, prog.src,
                         prog.idx, prog.const, params, X)


def _wire_mask(prog, wire):
    if wire < 0 or wire >= prog.n_qubits:
        raise InvalidArgument(f"wire {wire} out of range for {prog.n_qubits} qubit(s)")
    return 1 << (prog.n_qubits - 1 - wire)


def expvals(circuit, params, X, wire: int = 0) -> np.ndarray:
    prog, params, X = _prepare(circuit, params, X)
    f, _ = _batch_expval_jac(prog.n_qubits, prog.op, prog.ctrl, prog.tgt, prog.src,
                             prog.idx, prog.const, params, X, _wire_mask(prog, wire),
                             prog.n_params, False)
    return f


def expval_and_jacobian(circuit, params, X, wire: int = 0):
    """Return ``(f, J)`` with ``f[s] = <Z_wire>`` and ``J[s, k] = df[s]/dparams[k]``."""
    prog, params, X = _prepare(circuit, params, X)
    return _batch_expval_jac(prog.n_qubits, prog.op, prog.ctrl, prog.tgt, prog.src,
                             prog.idx, prog.const, params, X, _wire_mask(prog, wire),
                             prog.n_params, True)
