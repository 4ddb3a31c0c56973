"""Test doped circuits, Pauli propagation, preserved groups and OTOCs."""

import math

import numpy as np
import pytest

from decoderlab.clifford import conjugate
from decoderlab.core.exceptions import SizeLimitError, StructuralError, ValidationError
from decoderlab.doped import (
    DopedCircuit,
    PauliSum,
    Surd,
    estimate_otoc,
    is_preserved,
    is_scrambler,
    otoc,
    preserved_subgroup,
    propagate,
    sample_doped_circuit,
    scrambling_otoc_reference,
)
from decoderlab.oracle import dense_conjugate, dense_otoc, pauli_matrix, unitary_of
from decoderlab.pauli import PauliString, PauliSubgroup, SubsystemMask, enumerate_paulis


def dense_sum(s: PauliSum) -> np.ndarray:
    """Dense matrix of a Pauli sum."""
    total = np.zeros((1 << s.n, 1 << s.n), dtype=complex)
    for (x, z), coef in s.terms.items():
        total += float(coef) * pauli_matrix(PauliString(s.n, x, z))
    return (1j ** s.phase) * total


def test_surd_arithmetic():
    """Test exact arithmetic in Q(sqrt 2)."""
    root = Surd(0, 1)
    assert root * root == 2
    assert Surd(1).over_sqrt2() * root == 1
    assert not (root - root)
    assert math.isclose(float(Surd(1, 1)), 1 + math.sqrt(2))


def test_t_rule():
    """Test T† X T = (X - Y)/sqrt2 on a single qubit."""
    c = DopedCircuit.from_text("T 0\n")
    s = propagate(c, PauliString.from_literal("X"))
    half = Surd(1).over_sqrt2()
    assert s.coefficient(PauliString.from_literal("X")) == half
    assert s.coefficient(PauliString.from_literal("Y")) == -half
    expected = dense_conjugate(unitary_of(c), PauliString.from_literal("X"))
    np.testing.assert_allclose(dense_sum(s), expected, atol=1e-12)
    z = PauliString.from_literal("Z")
    assert propagate(c, z).single_pauli() == z


def test_propagation_matches_dense(rng):
    """Test exact propagation against dense conjugation on a doped circuit."""
    c = sample_doped_circuit(4, 3, "generic", 4, rng)
    u = unitary_of(c)
    for literal in ("XIII", "IZIY", "-ZZZZ", "IIIX"):
        p = PauliString.from_literal(literal)
        s = propagate(c, p)
        assert len(s) <= 2 ** c.t
        assert float(s.norm_squared()) == pytest.approx(1.0)
        np.testing.assert_allclose(dense_sum(s), dense_conjugate(u, p), atol=1e-10)


def test_propagation_of_plus_state_circuit(t_on_plus):
    """Test that H then T keeps Z as a Pauli string and mixes X."""
    image = is_preserved(t_on_plus, PauliString.from_literal("Z"))
    assert image == PauliString.from_literal("X")
    assert is_preserved(t_on_plus, PauliString.from_literal("X")) is None
    s = propagate(t_on_plus, PauliString.from_literal("X"))
    assert s.inner(PauliString.from_literal("Z")) == Surd(1).over_sqrt2()
    assert s.inner(PauliString.from_literal("-Y")) == -Surd(1).over_sqrt2()


def test_inner_rejects_non_hermitian():
    """Test inner products need a Hermitian string."""
    s = PauliSum.from_pauli(PauliString.from_literal("X"))
    with pytest.raises(ValidationError):
        s.inner(PauliString.from_literal("+iX"))


def test_clifford_circuit_preserves_everything(clifford_instance):
    """Test that a Clifford scrambler preserves the full group on D."""
    circuit, readout = clifford_instance
    assert circuit.is_clifford
    assert preserved_subgroup(circuit, readout).rank == 2 * readout.size
    tableau = circuit.to_tableau()
    p = PauliString.from_literal("IIIXZY")
    assert is_preserved(circuit, p) == conjugate(tableau, p)


def test_preserved_group_lower_bound(rng):
    """Test that G_D keeps rank at least 2|D| - t for generic circuits."""
    readout = SubsystemMask.last(5, 3)
    for t in (1, 2, 3):
        c = sample_doped_circuit(5, t, "generic", None, rng, readout)
        group = preserved_subgroup(c, readout)
        assert group.rank >= 2 * readout.size - t
        for p in group.generators:
            assert is_preserved(c, p) == group.image_of(p)


@pytest.mark.parametrize("t", [0, 2, 4, 6])
def test_simplified_rank_is_exact(t):
    """Test the simplified ensemble gives rank exactly 2|D| - t."""
    readout = SubsystemMask.last(6, 3)
    rng = np.random.default_rng(t)
    c = sample_doped_circuit(6, t, "simplified", None, rng, readout)
    assert c.t == t
    assert preserved_subgroup(c, readout).rank == 2 * readout.size - t


def test_simplified_rejects_odd_or_excess_t():
    """Test that the simplified ensemble needs an even t within 2|D|."""
    readout = SubsystemMask.last(4, 2)
    rng = np.random.default_rng(0)
    with pytest.raises(StructuralError):
        sample_doped_circuit(4, 3, "simplified", None, rng, readout)
    with pytest.raises(StructuralError):
        sample_doped_circuit(4, 6, "simplified", None, rng, readout)


def test_sampler_validation():
    """Test size and ensemble validation of the sampler."""
    with pytest.raises(ValidationError):
        sample_doped_circuit(0, 0, "generic", None, np.random.default_rng(0))
    with pytest.raises(SizeLimitError):
        sample_doped_circuit(4, 100, "generic", None, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_doped_circuit(4, 0, "unknown", None, np.random.default_rng(0))


def test_sampler_is_seeded():
    """Test that equal seeds give equal circuits."""
    a = sample_doped_circuit(5, 2, "generic", None, np.random.default_rng(3))
    b = sample_doped_circuit(5, 2, "generic", None, np.random.default_rng(3))
    assert a == b


def test_circuit_text_io(tmp_path, rng):
    """Test circuit files keep the register size and gate order."""
    c = sample_doped_circuit(4, 2, "generic", 2, rng)
    path = tmp_path / "circuit.txt"
    c.save(path)
    assert DopedCircuit.load(path) == c
    assert DopedCircuit.from_text("# a comment\nH 0\nCX 0 2\n").n == 3
    with pytest.raises(ValidationError):
        DopedCircuit.from_text("H 0\nRX 1\n")


def test_then_and_to_tableau():
    """Test circuit concatenation and Clifford conversion."""
    a = DopedCircuit.from_text("H 0\n", n=2)
    b = DopedCircuit.from_text("CX 0 1\n", n=2)
    assert a.then(b).gates == a.gates + b.gates
    with pytest.raises(StructuralError):
        DopedCircuit.from_text("T 0\n").to_tableau()


def test_otoc_matches_dense(rng):
    """Test the exact OTOC against brute force on a doped circuit."""
    c = sample_doped_circuit(4, 2, "generic", 4, rng)
    X, Y = SubsystemMask.first(4, 1), SubsystemMask.last(4, 2)
    estimate = estimate_otoc(c, X, Y)
    assert estimate.exact
    assert estimate.value == pytest.approx(dense_otoc(unitary_of(c), X, Y), abs=1e-10)


def test_otoc_of_identity_is_one():
    """Test that nothing scrambles under the identity."""
    c = DopedCircuit(3, ())
    X, Y = SubsystemMask.first(3, 1), SubsystemMask.last(3, 1)
    assert otoc(c, X, Y) == pytest.approx(1.0)


def test_otoc_cap_and_monte_carlo(clifford_instance):
    """Test the exact-sum cap and the seeded Monte Carlo fallback."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    with pytest.raises(SizeLimitError):
        estimate_otoc(circuit, A, readout, cap=16, monte_carlo=False)
    with pytest.raises(ValidationError):
        estimate_otoc(circuit, A, readout, cap=16)
    first = estimate_otoc(circuit, A, readout, cap=16, draws=200, seed=9)
    second = estimate_otoc(circuit, A, readout, cap=16, draws=200, seed=9)
    assert not first.exact
    assert first.value == second.value
    exact = otoc(circuit, A, readout)
    assert abs(first.value - exact) <= 5 * first.stderr + 1e-12


def test_ensemble_otoc_reaches_plateau():
    """Test that random Clifford brickworks average to the scrambling plateau."""
    X, Y = SubsystemMask.first(6, 1), SubsystemMask.last(6, 1)
    circuits = [
        sample_doped_circuit(6, 0, "generic", None, np.random.default_rng([21, k]))
        for k in range(60)
    ]
    values = [otoc(c, X, Y) for c in circuits]
    assert scrambling_otoc_reference(1, 1) == pytest.approx(0.4375)
    assert np.mean(values) == pytest.approx(0.4375, abs=0.08)


def test_scrambling_report(clifford_instance):
    """Test the report fields for a Clifford circuit."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    report = is_scrambler(circuit, A, readout, tolerance=1.0)
    assert report
    assert report.mutual_information_bits == pytest.approx(-math.log2(report.otoc))
    halved = report.mutual_information_bits / 2
    assert report.mutual_information == pytest.approx(halved)
    assert report.reference == scrambling_otoc_reference(1, 3)
    assert not is_scrambler(DopedCircuit(6, ()), A, readout)


def test_every_pauli_on_d_is_counted(clifford_instance):
    """Test the Clifford OTOC equals the fraction of images trivial on A."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    tableau = circuit.to_tableau()
    images = [conjugate(tableau, p) for p in enumerate_paulis(readout)]
    trivial = sum(image.is_trivial_on(A) for image in images)
    assert otoc(circuit, A, readout) == pytest.approx(trivial / 4**readout.size)


@pytest.mark.slow
def test_preservation_count_over_seeds():
    """Test |G_D| >= 2^(2|D| - t) and at most 2^t terms on 100 seeded circuits."""
    readout = SubsystemMask.last(6, 4)
    for seed in range(100):
        t = seed % 5
        rng = np.random.default_rng([seed, t])
        c = sample_doped_circuit(6, t, "generic", None, rng, readout)
        group = PauliSubgroup(6)
        for p in enumerate_paulis(readout, include_identity=False):
            image = propagate(c, p)
            assert len(image) <= 2**t
            single = image.single_pauli()
            if single is not None:
                group.add(p, single)
        assert group.size >= 2 ** (2 * readout.size - t)


@pytest.mark.slow
def test_clifford_otoc_averages_to_plateau():
    """Test the mean of Omega over 200 Clifford brickworks on 8 qubits."""
    X, Y = SubsystemMask.first(8, 1), SubsystemMask.last(8, 1)
    circuits = [
        sample_doped_circuit(8, 0, "generic", None, np.random.default_rng([33, k]))
        for k in range(200)
    ]
    values = [otoc(c, X, Y) for c in circuits]
    assert set(np.round(values, 12)) <= {1.0, 0.5, 0.25}
    assert abs(np.mean(values) - scrambling_otoc_reference(1, 1)) <= 0.05
