"""Test ensemble and strategy registries."""

from typing import Iterator, Optional

import numpy as np
import pytest

from decoderlab.core.registry import (
    Registry,
    ensembles,
    get_ensemble,
    get_strategy,
    list_ensembles,
    list_strategies,
    register_ensemble,
    register_strategy,
)
from decoderlab.doped import DopedCircuit, sample_doped_circuit
from decoderlab.learner import ExhaustiveStrategy, QueryOracle, learn_groups
from decoderlab.pauli import PauliString, SubsystemMask, enumerate_paulis


@register_ensemble("identity-test")
def identity_ensemble(
    n: int, t: int, depth: int, rng: np.random.Generator, readout: SubsystemMask
) -> DopedCircuit:
    """Circuit with t T gates on qubit 0 and nothing else."""
    return DopedCircuit.from_text("T 0\n" * t, n=n)


@register_strategy("z-only")
class ZOnlyStrategy:
    """Probe only Z-type strings on D."""

    def probes(
        self, readout: SubsystemMask, rng: Optional[np.random.Generator]
    ) -> Iterator[PauliString]:
        paulis = enumerate_paulis(readout, include_identity=False)
        return (p for p in paulis if p.x == 0)

    def exhausted(self, misses: int, rank: int, readout: SubsystemMask) -> bool:
        return rank == readout.size


def test_registry():
    """Test registry functionality."""
    registry = Registry("widget")
    assert registry.names() == []

    # Test registration
    @registry.register("Spinner")
    def spinner() -> str:
        return "spin"

    assert "spinner" in registry.names()
    assert registry.get("spinner") is spinner

    # Test entry not found
    with pytest.raises(KeyError):
        registry.get("nonexistent")


def test_global_registries():
    """Test the built-in and test-registered entries."""
    assert {"generic", "simplified", "identity-test"} <= set(list_ensembles())
    assert {"exhaustive", "random-probe", "z-only"} <= set(list_strategies())
    assert ensembles.get("identity-test") is identity_ensemble

    # Test case insensitivity
    assert get_ensemble("GENERIC") is get_ensemble("generic")
    assert get_strategy("Exhaustive") is ExhaustiveStrategy

    # Test unknown names
    with pytest.raises(ValueError):
        get_ensemble("nonexistent")
    with pytest.raises(ValueError):
        get_strategy("nonexistent")


def test_registered_ensemble_is_sampled():
    """Test that the sampler dispatches to a registered ensemble."""
    rng = np.random.default_rng(0)
    circuit = sample_doped_circuit(3, 2, "identity-test", None, rng)
    assert circuit.n == 3
    assert circuit.t == 2


def test_registered_strategy_is_used():
    """Test that learning accepts a registered strategy name."""
    circuit = DopedCircuit(2, ())
    readout = SubsystemMask.first(2, 2)
    learned = learn_groups(QueryOracle(circuit), readout, strategy="z-only")
    assert learned.rank == 2
    assert all(g.x == 0 for g in learned.generators)
