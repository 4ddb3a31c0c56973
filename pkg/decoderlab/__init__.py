"""decoderlab - learning Clifford decoders for t-doped Clifford scramblers.

The package hides a t-doped Clifford circuit behind a query oracle, learns
the Pauli strings on a readout subsystem that the circuit maps to Pauli
strings, and assembles the decoder ``V = D R D† V'`` from them. A dense
state-vector oracle checks the resulting fidelity.

Example usage:

    import numpy as np
    from decoderlab import (
        QueryOracle, SubsystemMask, build_scrambled_state, decode_and_project,
        learn_groups, sample_doped_circuit, synthesize,
    )

    rng = np.random.default_rng(7)
    readout = SubsystemMask.last(6, 3)
    circuit = sample_doped_circuit(6, 2, "simplified", None, rng, readout)

    # Learn the preserved group of D and build the decoder
    groups = learn_groups(QueryOracle(circuit), readout)
    bundle = synthesize(groups, rng)

    # Decode one qubit of input on the dense oracle
    A = SubsystemMask.first(6, 1)
    result = decode_and_project(build_scrambled_state(circuit, A), bundle)
    print(result.fidelity, result.pi_v)

The same pipeline runs in batch from the command line:

    python -m decoderlab decode --n 8 --t 2 --a-size 1 --d-size 4 --trials 200 --seed 1
"""

from .clifford import (
    CliffordTableau,
    Gate,
    PartialPauliMap,
    complete_to_clifford,
    compose,
    conjugate,
    inverse,
)
from .core.exceptions import DecoderLabError
from .doped import (
    DopedCircuit,
    PauliSum,
    is_scrambler,
    otoc,
    propagate,
    sample_doped_circuit,
)
from .learner import LearnedGroups, QueryOracle, learn_groups
from .oracle import build_scrambled_state, decode_and_project
from .pauli import PauliString, SubsystemMask
from .synth import DecoderBundle, synthesize

__version__ = "0.1.0"

__all__ = [
    "CliffordTableau",
    "Gate",
    "PartialPauliMap",
    "complete_to_clifford",
    "compose",
    "conjugate",
    "inverse",
    "DecoderLabError",
    "DopedCircuit",
    "PauliSum",
    "is_scrambler",
    "otoc",
    "propagate",
    "sample_doped_circuit",
    "LearnedGroups",
    "QueryOracle",
    "learn_groups",
    "build_scrambled_state",
    "decode_and_project",
    "PauliString",
    "SubsystemMask",
    "DecoderBundle",
    "synthesize",
]
