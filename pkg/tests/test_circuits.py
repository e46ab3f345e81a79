import numpy as np
import pytest
from hypothesis import given, strategies as st

from quregress.circuits import (
    AnsatzFamily, Chromosome, Family, build_ansatz, count_params, decode_chromosome,
    gate_alphabet, random_chromosome,
)
from quregress.errors import InvalidArgument
from quregress.sim import AngleKind, CircuitSpec, GateKind

SEL, BEL, STD = Family.STRONGLY_ENTANGLING, Family.BASIC_ENTANGLER, Family.SIMPLIFIED_TWO_DESIGN


@pytest.mark.parametrize("fam, L, expected", [(SEL, 10, 60), (SEL, 40, 240), (BEL, 20, 40), (STD, 10, 22)])
def test_golden_param_counts(fam, L, expected):
    assert count_params(build_ansatz(AnsatzFamily(fam, L, 2), 2)) == expected


@given(fam=st.sampled_from(list(Family)), L=st.integers(1, 60), M=st.integers(1, 4))
def test_param_formula_and_reuploading(fam, L, M):
    af = AnsatzFamily(fam, L, M)
    c = build_ansatz(af, M)
    assert c.n_trainable == af.expected_params
    encoders = [g for g in c.gates if any(a.kind is AngleKind.FEATURE for a in g.angles)]
    assert len(encoders) == L * M
    assert all(g.kind is GateKind.RZ for g in encoders)
    if M == 1:
        assert all(len(g.wires) == 1 for g in c.gates)


def test_family_parse():
    assert Family.parse("SEL") is SEL
    assert Family.parse("SimplifiedTwoDesign") is STD
    with pytest.raises(InvalidArgument):
        Family.parse("Nope")
    with pytest.raises(InvalidArgument):
        AnsatzFamily(SEL, 0, 2)


def test_sel_range_schedule_three_qubits():
    c = build_ansatz(AnsatzFamily(SEL, 2, 3), 3)
    cnots = [g.wires for g in c.gates if g.kind is GateKind.CNOT]
    assert cnots[:3] == [(0, 1), (1, 2), (2, 0)]
    assert cnots[3:] == [(0, 2), (1, 0), (2, 1)]


def test_bel_two_qubits_single_cnot():
    c = build_ansatz(AnsatzFamily(BEL, 3, 2), 2)
    assert [g.wires for g in c.gates if g.kind is GateKind.CNOT] == [(0, 1)] * 3


def test_std_layout_two_qubits():
    c = build_ansatz(AnsatzFamily(STD, 1, 2), 2)
    kinds = [g.kind for g in c.gates]
    assert kinds == [GateKind.RY, GateKind.RY, GateKind.RZ, GateKind.RZ, GateKind.CZ, GateKind.RY, GateKind.RY]


def test_decode_one_qubit_example():
    c = decode_chromosome(Chromosome.from_gate_ids([2, 4, 1, 6, 5]))
    summary = [(g.kind, g.angles[0].kind, g.angles[0].value) for g in c.gates]
    assert summary == [
        (GateKind.RY, AngleKind.TRAINABLE, 0), (GateKind.RX, AngleKind.FEATURE, 0),
        (GateKind.RX, AngleKind.TRAINABLE, 1), (GateKind.RZ, AngleKind.FEATURE, 1),
        (GateKind.RY, AngleKind.FEATURE, 2),
    ]
    assert count_params(c) == 2


def test_decode_two_qubit_rules():
    assert decode_chromosome(Chromosome((0, 0, 1), 1, 2)).gates == ()
    assert decode_chromosome(Chromosome((4, 1, 1), 1, 2)).gates == ()
    (g,) = decode_chromosome(Chromosome((4, 1, 0), 1, 2)).gates
    assert (g.kind, g.wires) == (GateKind.CNOT, (1, 0))
    (g,) = decode_chromosome(Chromosome((6, 0, 1), 1, 2)).gates
    assert (g.kind, g.wires, g.angles[0].kind) == (GateKind.CRY, (0, 1), AngleKind.TRAINABLE)
    (g,) = decode_chromosome(Chromosome((6, 1, 1), 1, 2)).gates
    assert (g.kind, g.wires) == (GateKind.RY, (1,))
    (g,) = decode_chromosome(Chromosome((13, 3, 2), 1, 2)).gates  # control 3 -> 1, target 2 -> 0
    assert (g.kind, g.wires, g.angles[0].kind) == (GateKind.CRZ, (1, 0), AngleKind.FEATURE)
    (g,) = decode_chromosome(Chromosome((9, 0, 1), 1, 2)).gates
    assert (g.kind, g.wires, g.angles[0].kind) == (GateKind.RY, (1,), AngleKind.FEATURE)


def test_chromosome_validation():
    with pytest.raises(InvalidArgument):
        Chromosome.from_gate_ids([7])
    with pytest.raises(InvalidArgument):
        Chromosome((14, 0, 0), 1, 2)
    with pytest.raises(InvalidArgument):
        Chromosome((1, 0), 1, 1)
    assert gate_alphabet(1) == 7 and gate_alphabet(2) == 14


def test_random_chromosome_shapes_and_determinism():
    c = random_chromosome(5, 1, 3)
    assert all(0 <= g <= 6 for g in c.gate_ids)
    assert len(random_chromosome(120, 2, 0).genes) == 360
    assert random_chromosome(40, 2, 9) == random_chromosome(40, 2, 9)


def test_chromosome_json_round_trip():
    c = random_chromosome(12, 2, 4)
    assert Chromosome.from_json(c.to_json()) == c


@given(n=st.integers(1, 30), q=st.integers(1, 2), seed=st.integers(0, 10 ** 6))
def test_decode_total_and_deterministic(n, q, seed):
    c = random_chromosome(n, q, seed)
    a, b = decode_chromosome(c), decode_chromosome(c)
    assert isinstance(a, CircuitSpec) and a == b
    assert count_params(a) <= n
