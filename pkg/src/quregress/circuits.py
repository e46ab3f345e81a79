"""Fixed ansatz templates with data re-uploading, and GA chromosome decoding."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .sim import CircuitSpec, GateKind, GateOp, feature, trainable

__all__ = [
    "AnsatzFamily", "Chromosome", "CircuitSpec", "Family", "build_ansatz",
    "count_params", "decode_chromosome", "gate_alphabet", "random_chromosome",
]


class Family(enum.Enum):
    STRONGLY_ENTANGLING = "StronglyEntanglingLayers"
    BASIC_ENTANGLER = "BasicEntanglerLayers"
    SIMPLIFIED_TWO_DESIGN = "SimplifiedTwoDesign"

    @classmethod
    def parse(cls, name: str) -> "Family":
        aliases = {"SEL": cls.STRONGLY_ENTANGLING, "BEL": cls.BASIC_ENTANGLER,
                   "STD": cls.SIMPLIFIED_TWO_DESIGN}
        if name.upper() in aliases:
            return aliases[name.upper()]
        for fam in cls:
            if name in (fam.value, fam.name):
                return fam
        raise InvalidArgument(f"unknown ansatz family {name!r}")


@dataclass(frozen=True)
class AnsatzFamily:
    variant: Family
    layers: int
    qubits: int

    def __post_init__(self):
        if self.layers < 1 or self.qubits < 1:
            raise InvalidArgument("layers and qubits must both be >= 1")

    @property
    def expected_params(self) -> int:
        L, M = self.layers, self.qubits
        if self.variant is Family.STRONGLY_ENTANGLING:
            return 3 * L * M
        if self.variant is Family.BASIC_ENTANGLER:
            return L * M
        return M + 2 * L * (M - 1)

    @property
    def name(self) -> str:
        return f"{self.variant.value}-{self.layers}"


def build_ansatz(family: AnsatzFamily, feature_dim: int = 1) -> CircuitSpec:
    """Template circuit with the features re-encoded by RZ before every layer.

    ``feature_dim`` is accepted for interface symmetry; qubit ``j`` always
    reads feature ``j`` and wraps modulo the data dimension at evaluation.
    """
    if feature_dim < 1:
        raise InvalidArgument("feature_dim must be >= 1")
    L, M = family.layers, family.qubits
    gates: list[GateOp] = []
    k = 0

    def nxt():
        nonlocal k
        k += 1
        return trainable(k - 1)

    def encode():
        for j in range(M):
            gates.append(GateOp(GateKind.RZ, (j,), (feature(j),)))

    if family.variant is Family.STRONGLY_ENTANGLING:
        for layer in range(L):
            encode()
            for j in range(M):
                gates.append(GateOp(GateKind.ROT3, (j,), (nxt(), nxt(), nxt())))
            if M >= 2:
                r = layer % (M - 1) + 1
                for i in range(M):
                    gates.append(GateOp(GateKind.CNOT, (i, (i + r) % M)))
    elif family.variant is Family.BASIC_ENTANGLER:
        for _ in range(L):
            encode()
            for j in range(M):
                gates.append(GateOp(GateKind.RX, (j,), (nxt(),)))
            if M == 2:
                gates.append(GateOp(GateKind.CNOT, (0, 1)))
            elif M > 2:
                for i in range(M):
                    gates.append(GateOp(GateKind.CNOT, (i, (i + 1) % M)))
    else:
        for j in range(M):
            gates.append(GateOp(GateKind.RY, (j,), (nxt(),)))
        for _ in range(L):
            encode()
            for start in (0, 1):
                for a in range(start, M - 1, 2):
                    gates.append(GateOp(GateKind.CZ, (a, a + 1)))
                    gates.append(GateOp(GateKind.RY, (a,), (nxt(),)))
                    gates.append(GateOp(GateKind.RY, (a + 1,), (nxt(),)))
    return CircuitSpec(M, tuple(gates))


def count_params(circuit: CircuitSpec) -> int:
    return circuit.n_trainable


# -- chromosomes -------------------------------------------------------------

def gate_alphabet(n_qubits: int) -> int:
    """Number of gate-ID symbols: 7 for one qubit, 14 otherwise."""
    return 7 if n_qubits == 1 else 14


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[int, ...]
    n_gates: int
    n_qubits: int

    def __post_init__(self):
        genes = tuple(int(g) for g in self.genes)
        object.__setattr__(self, "genes", genes)
        if self.n_gates < 1 or self.n_qubits < 1:
            raise InvalidArgument("n_gates and n_qubits must be >= 1")
        if len(genes) != 3 * self.n_gates:
            raise InvalidArgument(f"expected {3 * self.n_gates} genes, got {len(genes)}")
        top = gate_alphabet(self.n_qubits)
        for i, g in enumerate(genes[: self.n_gates]):
            if not 0 <= g < top:
                raise InvalidArgument(f"gate id {g} at position {i} outside 0..{top - 1}")
        if any(g < 0 for g in genes[self.n_gates:]):
            raise InvalidArgument("control/target genes must be non-negative")

    @property
    def gate_ids(self) -> tuple[int, ...]:
        return self.genes[: self.n_gates]

    def segment_bounds(self) -> np.ndarray:
        """Exclusive upper bound of the value range for every gene position."""
        b = np.full(3 * self.n_gates, self.n_qubits, dtype=np.int64)
        b[: self.n_gates] = gate_alphabet(self.n_qubits)
        return b

    def to_json(self) -> dict:
        return {"n_gates": self.n_gates, "n_qubits": self.n_qubits, "genes": list(self.genes)}

    @classmethod
    def from_json(cls, obj) -> "Chromosome":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(obj["genes"]), int(obj["n_gates"]), int(obj["n_qubits"]))

    @classmethod
    def from_gate_ids(cls, gate_ids, n_qubits: int = 1, controls=None, targets=None) -> "Chromosome":
        n = len(gate_ids)
        controls = [0] * n if controls is None else list(controls)
        targets = [0] * n if targets is None else list(targets)
        return cls(tuple(gate_ids) + tuple(controls) + tuple(targets), n, n_qubits)


_SINGLE = (GateKind.RX, GateKind.RY, GateKind.RZ)
_CONTROLLED = (GateKind.CRX, GateKind.CRY, GateKind.CRZ)


def decode_chromosome(chromosome: Chromosome) -> CircuitSpec:
    n, q = chromosome.n_gates, chromosome.n_qubits
    genes = chromosome.genes
    gates: list[GateOp] = []
    n_theta = n_x = 0

    def theta():
        nonlocal n_theta
        n_theta += 1
        return trainable(n_theta - 1)

    def x():
        nonlocal n_x
        n_x += 1
        return feature(n_x - 1)

    for i in range(n):
        g = genes[i]
        if q == 1:
            if g == 0:
                continue
            if g <= 3:
                gates.append(GateOp(_SINGLE[g - 1], (0,), (theta(),)))
            else:
                gates.append(GateOp(_SINGLE[g - 4], (0,), (x(),)))
            continue
        c, t = genes[n + i] % q, genes[2 * n + i] % q
        if g == 0:
            continue
        if 1 <= g <= 3:
            gates.append(GateOp(_SINGLE[g - 1], (t,), (theta(),)))
        elif g == 4:
            if c != t:
                gates.append(GateOp(GateKind.CNOT, (c, t)))
        elif 5 <= g <= 7:
            if c != t:
                gates.append(GateOp(_CONTROLLED[g - 5], (c, t), (theta(),)))
            else:
                gates.append(GateOp(_SINGLE[g - 5], (t,), (theta(),)))
        elif 8 <= g <= 10:
            gates.append(GateOp(_SINGLE[g - 8], (t,), (x(),)))
        else:
            if c != t:
                gates.append(GateOp(_CONTROLLED[g - 11], (c, t), (x(),)))
            else:
                gates.append(GateOp(_SINGLE[g - 11], (t,), (x(),)))
    return CircuitSpec(q, tuple(gates))


def random_chromosome(n_gates: int, n_qubits: int, rng_seed=None) -> Chromosome:
    if n_gates < 1:
        raise InvalidArgument("n_gates must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    bounds = np.full(3 * n_gates, n_qubits, dtype=np.int64)
    bounds[:n_gates] = gate_alphabet(n_qubits)
    genes = rng.integers(0, bounds)
    return Chromosome(tuple(int(g) for g in genes), n_gates, n_qubits)
