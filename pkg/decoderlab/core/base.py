"""Base protocols for black boxes, circuit ensembles and learning strategies."""

from typing import TYPE_CHECKING, Iterator, List, Optional, Protocol, Tuple

if TYPE_CHECKING:
    import numpy as np

    from ..doped import DopedCircuit
    from ..pauli import PauliString, SubsystemMask


class BlackBox(Protocol):
    """Protocol defining query access to a hidden unitary.

    Learners see the hidden circuit only through these operations. Every
    call is charged to ``query_count``.
    """

    @property
    def n(self) -> int:
        """Number of qubits the hidden unitary acts on."""
        ...

    @property
    def mode(self) -> str:
        """Query mode, either ``"exact"`` or ``"sampled"``."""
        ...

    @property
    def query_count(self) -> int:
        """Number of queries issued so far."""
        ...

    def preserved_image(self, p: "PauliString") -> Optional["PauliString"]:
        """Return the signed image of ``p`` if it is a Pauli string.

        Args:
            p: Pauli string to conjugate

        Returns:
            U† p U when it is a single signed Pauli string, otherwise None
        """
        ...

    def sample_outcomes(self, p: "PauliString", shots: int) -> List[Tuple[int, int]]:
        """Draw Bell-basis outcomes conditioned on ``p``.

        Args:
            p: Pauli string applied to the output register
            shots: Number of outcomes requested

        Returns:
            List of unsigned outcomes as ``(x, z)`` masks; may be shorter than
            ``shots`` when the query budget runs out
        """
        ...

    def measure_sign(self, p: "PauliString", q: "PauliString") -> int:
        """Measure the eigenvalue of ``q`` on the state prepared by ``p``.

        Args:
            p: Pauli string applied to the output register
            q: Unsigned candidate image

        Returns:
            +1 or -1
        """
        ...


class CircuitEnsemble(Protocol):
    """Protocol for samplers of t-doped Clifford circuits."""

    def __call__(
        self,
        n: int,
        t: int,
        depth: int,
        rng: "np.random.Generator",
        readout: "SubsystemMask",
    ) -> "DopedCircuit":
        ...


class ProbeStrategy(Protocol):
    """Protocol for the order in which a learner probes Pauli strings."""

    def probes(
        self, readout: "SubsystemMask", rng: Optional["np.random.Generator"]
    ) -> Iterator["PauliString"]:
        """Yield candidate Pauli strings supported on ``readout``."""
        ...

    def exhausted(self, misses: int, rank: int, readout: "SubsystemMask") -> bool:
        """Decide whether probing can stop.

        Args:
            misses: Consecutive probes that added no generator
            rank: Current rank of the learned group
            readout: Readout subsystem being learned

        Returns:
            True when no further probes are needed
        """
        ...
