"""Test decoder synthesis: diagonalizer, decrypter, randomizer and assembly."""

import numpy as np
import pytest

from decoderlab.clifford import (
    CliffordTableau,
    compose,
    conjugate,
    inverse,
    sample_uniform_on,
)
from decoderlab.core.exceptions import (
    DecrypterConditionError,
    StructuralError,
    ValidationError,
)
from decoderlab.doped import DopedCircuit, is_preserved
from decoderlab.learner import QueryOracle, learn_groups
from decoderlab.pauli import PauliString, SubsystemMask, enumerate_paulis
from decoderlab.synth import (
    assemble,
    build_decrypter,
    build_diagonalizer,
    build_randomizer,
    bundle_from_text,
    bundle_to_text,
    canonical_generators,
    check_decrypter_condition,
    load_bundle,
    save_bundle,
    synthesize,
)


@pytest.fixture
def learned(simplified_instance):
    circuit, readout = simplified_instance
    return circuit, learn_groups(QueryOracle(circuit), readout)


def test_diagonalizer_maps_pairs_to_e(learned):
    """Test that D† a_k D = X_{e_k} and D† b_k D = Z_{e_k} on the default E."""
    _, groups = learned
    diagonalizer, e_mask = build_diagonalizer(groups)
    assert e_mask == SubsystemMask.from_qubits(6, [3, 4])
    for ((a, _), (b, _)), q in zip(groups.pairs, e_mask.qubits):
        assert conjugate(diagonalizer, a) == PauliString.single(6, q, "X")
        assert conjugate(diagonalizer, b) == PauliString.single(6, q, "Z")
    outside = groups.readout.complement()
    for q in outside.qubits:
        x = PauliString.single(6, q, "X")
        assert conjugate(diagonalizer, x) == x


def test_diagonalizer_on_chosen_e(learned):
    """Test a caller-chosen E inside D."""
    _, groups = learned
    diagonalizer, e_mask = build_diagonalizer(groups, [5, 3])
    assert e_mask.qubits == (3, 5)
    for generator in canonical_generators(e_mask):
        assert groups.group.contains(conjugate(inverse(diagonalizer), generator))
    with pytest.raises(ValidationError):
        build_diagonalizer(groups, [0, 3])
    with pytest.raises(ValidationError):
        build_diagonalizer(groups, [3])


def test_degenerate_group_is_rejected_or_truncated():
    """Test that a rank-one group is rejected unless truncation is allowed."""
    circuit = DopedCircuit.from_text("T 0\n", n=2)
    groups = learn_groups(QueryOracle(circuit), SubsystemMask.first(2, 1))
    with pytest.raises(StructuralError):
        build_diagonalizer(groups)
    diagonalizer, e_mask = build_diagonalizer(groups, require_hyperbolic=False)
    assert e_mask.size == 0
    bundle = synthesize(groups, np.random.default_rng(0), require_hyperbolic=False)
    zi = PauliString.from_literal("ZI")
    assert conjugate(bundle.decrypter, zi) == zi


def test_decrypter_condition(learned):
    """Test that V' agrees with U on every D X_q D† and D Z_q D†."""
    circuit, groups = learned
    diagonalizer, e_mask = build_diagonalizer(groups)
    decrypter = build_decrypter(groups, diagonalizer, e_mask)
    undo = inverse(diagonalizer)
    for generator in canonical_generators(e_mask):
        source = conjugate(undo, generator)
        assert conjugate(decrypter, source) == is_preserved(circuit, source)
    for source, image in groups.radical:
        assert conjugate(decrypter, source) == image


def test_randomizer_support(rng):
    """Test the randomizer acts only on F and C."""
    F = SubsystemMask.from_qubits(6, [5])
    C = SubsystemMask.first(6, 3)
    r = build_randomizer(6, F, C, rng)
    for q in (3, 4):
        for letter in "XZ":
            generator = PauliString.single(6, q, letter)
            assert conjugate(r, generator) == generator
    assert build_randomizer(6, SubsystemMask(6, 0), C, rng).is_identity()
    with pytest.raises(ValidationError):
        build_randomizer(6, F, SubsystemMask.last(6, 2), rng)


def test_synthesized_bundle(learned):
    """Test assembly and the decrypter check on a synthesized bundle."""
    circuit, groups = learned
    bundle = synthesize(groups, np.random.default_rng(0), metadata={"seed": 0})
    assert bundle.n == 6
    assert bundle.f_mask == SubsystemMask.from_qubits(6, [5])
    assert bundle.c_mask == SubsystemMask.first(6, 3)
    assert bundle.metadata["e_size"] == 2
    assert bundle.metadata["seed"] == 0
    head = compose(bundle.diagonalizer, bundle.randomizer)
    head = compose(head, inverse(bundle.diagonalizer))
    expected = compose(head, bundle.decrypter)
    assert bundle.composite == expected
    check_decrypter_condition(circuit, bundle)


def test_composite_agrees_with_scrambler_on_diagonalized_paulis(learned):
    """Test that the composite decoder reproduces U on D P_E D† whatever R is."""
    circuit, groups = learned
    bundle = synthesize(groups, np.random.default_rng(1))
    undo = inverse(bundle.diagonalizer)
    for p in enumerate_paulis(bundle.e_mask):
        source = conjugate(undo, p)
        assert conjugate(bundle.composite, source) == is_preserved(circuit, source)


def test_decrypter_condition_names_failing_generator(learned):
    """Test that a wrong decrypter is reported with its generator."""
    circuit, groups = learned
    bundle = synthesize(groups, np.random.default_rng(2))
    broken = assemble(
        bundle.diagonalizer,
        bundle.randomizer,
        CliffordTableau.identity(6),
        bundle.readout,
        bundle.e_mask,
    )
    with pytest.raises(DecrypterConditionError) as excinfo:
        check_decrypter_condition(circuit, broken)
    generators = {str(g) for g in canonical_generators(bundle.e_mask)}
    assert excinfo.value.generator in generators


def test_with_randomizer(learned):
    """Test that swapping the randomizer keeps the other components."""
    _, groups = learned
    bundle = synthesize(groups, np.random.default_rng(3), metadata={"seed": 3})
    support = bundle.f_mask.union(bundle.c_mask)
    other = sample_uniform_on(support, np.random.default_rng(4))
    swapped = bundle.with_randomizer(other, randomizer_draw=7)
    assert swapped.diagonalizer == bundle.diagonalizer
    assert swapped.decrypter == bundle.decrypter
    assert swapped.randomizer == other
    assert swapped.metadata["randomizer_draw"] == 7
    assert swapped.metadata["seed"] == 3


def test_clifford_decoder_is_exact(clifford_instance):
    """Test that a Clifford scrambler yields E = D and a decoder matching U on D."""
    circuit, readout = clifford_instance
    groups = learn_groups(QueryOracle(circuit), readout)
    bundle = synthesize(groups, np.random.default_rng(5))
    assert bundle.e_mask == readout
    assert bundle.randomizer.is_identity()
    tableau = circuit.to_tableau()
    for p in enumerate_paulis(readout):
        assert conjugate(bundle.composite, p) == conjugate(tableau, p)


def test_bundle_text(tmp_path, learned):
    """Test saving and loading a bundle."""
    _, groups = learned
    bundle = synthesize(groups, np.random.default_rng(6), metadata={"seed": 6})
    text = bundle_to_text(bundle)
    assert text.startswith("# {")
    assert "[diagonalizer]" in text and "[randomizer]" in text and "[decrypter]" in text
    path = tmp_path / "bundle.txt"
    save_bundle(bundle, path)
    loaded = load_bundle(path)
    assert loaded == bundle
    assert loaded.metadata["seed"] == 6


@pytest.mark.parametrize(
    "text",
    [
        "",
        "[diagonalizer]\nH 0\n",
        '# {"n": 2, "readout": [1], "e": [1]}\n[diagonalizer]\n',
        '# {"n": 2, "readout": [1], "e": [1]}\nH 0\n',
        '# {"n": 2, "readout": [1], "e": [1]}\n[mixer]\n',
        "# not json\n",
    ],
)
def test_bundle_text_errors(text):
    """Test malformed bundle files."""
    with pytest.raises(ValidationError):
        bundle_from_text(text)
