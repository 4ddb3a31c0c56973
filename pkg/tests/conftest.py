"""Shared fixtures: seeded generators and small circuits."""

import numpy as np
import pytest

from decoderlab.doped import DopedCircuit, sample_doped_circuit
from decoderlab.pauli import SubsystemMask


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for tests that draw random objects."""
    return np.random.default_rng(1234)


@pytest.fixture
def simplified_instance():
    """Simplified-class scrambler with n = 6, t = 2 and |D| = 3."""
    readout = SubsystemMask.last(6, 3)
    rng = np.random.default_rng(11)
    circuit = sample_doped_circuit(6, 2, "simplified", None, rng, readout)
    return circuit, readout


@pytest.fixture
def clifford_instance():
    """Brickwork Clifford scrambler with n = 6 and |D| = 3."""
    readout = SubsystemMask.last(6, 3)
    rng = np.random.default_rng(5)
    circuit = sample_doped_circuit(6, 0, "generic", None, rng, readout)
    return circuit, readout


@pytest.fixture
def t_on_plus() -> DopedCircuit:
    """Single-qubit circuit ``H`` then ``T``."""
    return DopedCircuit.from_text("# qubits 1\nH 0\nT 0\n")
