"""Learning the preserved Pauli group of a readout subsystem from query access.

The hidden circuit sits behind :class:`QueryOracle`. In ``exact`` mode a
query answers directly whether ``U† P U`` is a Pauli string. In ``sampled``
mode the learner only sees Bell-basis outcomes drawn from two copies of
the Choi state, plus one stabilizer measurement to fix the sign.
"""

import json
import logging
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .core.base import BlackBox, ProbeStrategy
from .core.config import get_exhaustive_cap
from .core.exceptions import (
    InconclusiveError,
    SizeLimitError,
    StructuralError,
    ValidationError,
)
from .core.registry import get_strategy, register_strategy
from .doped import DopedCircuit, is_preserved, propagate
from .pauli import (
    PauliString,
    PauliSubgroup,
    SubsystemMask,
    commutes,
    enumerate_paulis,
    random_pauli,
    symplectic_gram_schmidt,
)

logger = logging.getLogger(__name__)

MODES = ("exact", "sampled")


class QueryOracle(BlackBox):
    """Black-box access to a hidden doped circuit with query counting.

    Args:
        circuit: Hidden circuit
        mode: ``"exact"`` or ``"sampled"``
        shots: Queries spent per preservation test in sampled mode
        rng: Generator driving measurement outcomes (sampled mode)
        budget: Optional cap on the total number of queries
    """

    def __init__(
        self,
        circuit: DopedCircuit,
        mode: str = "exact",
        shots: int = 1,
        rng: Optional[np.random.Generator] = None,
        budget: Optional[int] = None,
    ):
        if mode not in MODES:
            raise ValidationError(f"Unknown oracle mode: {mode}")
        if mode == "sampled":
            if shots < 2:
                raise ValidationError("Sampled mode needs at least 2 shots per test")
            if rng is None:
                raise ValidationError("Sampled mode needs a random generator")
        self._circuit = circuit
        self._mode = mode
        self.shots = shots
        self._rng = rng
        self.budget = budget
        self._queries = 0
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self._circuit.n

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def query_count(self) -> int:
        return self._queries

    @property
    def remaining(self) -> Optional[int]:
        return None if self.budget is None else max(self.budget - self._queries, 0)

    def _charge(self, requested: int) -> int:
        with self._lock:
            granted = requested
            if self.budget is not None:
                granted = max(min(requested, self.budget - self._queries), 0)
            self._queries += granted
            return granted

    def preserved_image(self, p: PauliString) -> Optional[PauliString]:
        if self._charge(1) == 0:
            raise InconclusiveError(f"Query budget exhausted before testing {p}", {})
        return is_preserved(self._circuit, p)

    def sample_outcomes(self, p: PauliString, shots: int) -> List[Tuple[int, int]]:
        granted = self._charge(shots)
        if granted == 0:
            return []
        terms = propagate(self._circuit, p).terms
        keys = list(terms)
        weights = np.array([float(c) ** 2 for c in terms.values()])
        if self._rng is None:
            raise ValidationError("Sampling outcomes needs a random generator")
        picks = self._rng.choice(len(keys), size=granted, p=weights / weights.sum())
        return [keys[int(k)] for k in picks]

    def measure_sign(self, p: PauliString, q: PauliString) -> int:
        if self._charge(1) == 0:
            raise InconclusiveError(
                f"Query budget exhausted before the sign of {p}", {}
            )
        expectation = float(propagate(self._circuit, p).inner(q.unsigned()))
        if self._rng is None:
            return 1 if expectation >= 0 else -1
        return 1 if self._rng.random() < (1.0 + expectation) / 2.0 else -1


def test_pauli(
    oracle: BlackBox, p_d: PauliString, shots: Optional[int] = None
) -> Optional[PauliString]:
    """Decide whether ``U† p_d U`` is a Pauli string and return it if so.

    In sampled mode ``shots - 1`` Bell outcomes are drawn; ``p_d`` counts as
    preserved only if they all agree, and one extra measurement fixes the sign.

    Args:
        oracle: Black box to query
        p_d: Pauli string supported on the readout subsystem
        shots: Queries per test; defaults to the oracle's setting

    Returns:
        Signed image, or None if ``p_d`` is not preserved

    Raises:
        InconclusiveError: If the budget runs out while every outcome so far agrees
    """
    if oracle.mode == "exact":
        return oracle.preserved_image(p_d)
    shots = test_cost(oracle, shots)
    outcomes = oracle.sample_outcomes(p_d, shots - 1)
    histogram = Counter(outcomes)
    if len(histogram) > 1:
        return None
    if len(outcomes) < shots - 1 or not outcomes:
        seen = {
            str(PauliString(oracle.n, x, z)): count
            for (x, z), count in histogram.items()
        }
        raise InconclusiveError(
            f"Budget ran out after {len(outcomes)} of {shots - 1} outcomes for {p_d}",
            seen,
        )
    (x, z), = histogram
    modal = PauliString(oracle.n, x, z)
    return modal if oracle.measure_sign(p_d, modal) > 0 else -modal


test_pauli.__test__ = False  # type: ignore[attr-defined]


def test_cost(oracle: BlackBox, shots: Optional[int] = None) -> int:
    """Queries one call of :func:`test_pauli` spends at most."""
    if oracle.mode == "exact":
        return 1
    return getattr(oracle, "shots", 2) if shots is None else shots


test_cost.__test__ = False  # type: ignore[attr-defined]


@register_strategy("exhaustive")
class ExhaustiveStrategy:
    """Probe every non-identity Pauli on D in a fixed order."""

    def probes(
        self, readout: SubsystemMask, rng: Optional[np.random.Generator]
    ) -> Iterator[PauliString]:
        cap = get_exhaustive_cap()
        if 4 ** readout.size > cap:
            raise SizeLimitError(
                f"Exhaustive learning over 4^{readout.size} Paulis "
                f"exceeds the cap {cap}"
            )
        return enumerate_paulis(readout, include_identity=False)

    def exhausted(self, misses: int, rank: int, readout: SubsystemMask) -> bool:
        return rank == 2 * readout.size


@register_strategy("random-probe")
class RandomProbeStrategy:
    """Probe uniformly random Paulis on D until ``40 |D|`` tests in a row add nothing.

    Paulis already implied by the learned group are skipped without a query
    and do not count toward the patience.
    """

    def __init__(self, patience_factor: int = 40):
        self.patience_factor = patience_factor

    def probes(
        self, readout: SubsystemMask, rng: Optional[np.random.Generator]
    ) -> Iterator[PauliString]:
        if rng is None:
            raise ValidationError("Random probing needs a random generator")
        while True:
            yield random_pauli(readout, rng, include_identity=False)

    def exhausted(self, misses: int, rank: int, readout: SubsystemMask) -> bool:
        return rank == 2 * readout.size or misses >= self.patience_factor * readout.size


Pair = Tuple[Tuple[PauliString, PauliString], Tuple[PauliString, PauliString]]


@dataclass
class LearnedGroups:
    """Generators of G_D(U) with their signed images.

    Attributes:
        readout: Readout subsystem D
        group: Learned subgroup; each generator carries its image U† g U
        pairs: Hyperbolic pairs ``((a, U†aU), (b, U†bU))`` of the group
        radical: Isotropic generators commuting with the whole group
        query_count: Queries spent while learning
        incomplete: True when the budget ran out before probing finished
        transcript: One record per probe
    """

    readout: SubsystemMask
    group: PauliSubgroup
    pairs: Tuple[Pair, ...]
    radical: Tuple[Tuple[PauliString, PauliString], ...]
    query_count: int
    incomplete: bool = False
    transcript: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def generators(self) -> Tuple[PauliString, ...]:
        return self.group.generators

    @property
    def images(self) -> Tuple[PauliString, ...]:
        return tuple(img for img in self.group.images if img is not None)

    @property
    def rank(self) -> int:
        return self.group.rank

    @property
    def e_size(self) -> int:
        return len(self.pairs)

    @property
    def degenerate(self) -> bool:
        return bool(self.radical)

    def image_of(self, p: PauliString) -> PauliString:
        return self.group.image_of(p)

    def summary(self) -> Dict[str, Any]:
        return {
            "readout": list(self.readout.qubits),
            "rank": self.rank,
            "e_size": self.e_size,
            "degenerate": self.degenerate,
            "incomplete": self.incomplete,
            "query_count": self.query_count,
            "generators": [str(g) for g in self.generators],
            "images": [str(img) for img in self.images],
        }

    def save_transcript(self, path: Union[str, Path]) -> None:
        """Write probes, outcomes, query counts and generators as JSON."""
        payload = dict(self.summary(), probes=self.transcript)
        Path(path).write_text(json.dumps(payload, indent=2))


def load_transcript(path: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())


def learn_groups(
    oracle: BlackBox,
    readout: SubsystemMask,
    strategy: Union[str, ProbeStrategy] = "exhaustive",
    budget: Optional[int] = None,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    require_hyperbolic: bool = False,
) -> LearnedGroups:
    """Learn generators of G_D(U) and their images through the oracle.

    Args:
        oracle: Black box hiding U
        readout: Readout subsystem D
        strategy: Registered strategy name or strategy instance
        budget: Maximum number of queries for this run; a test starts only when
            its full cost (one query, or ``shots`` in sampled mode) fits
        shots: Queries per test in sampled mode
        rng: Generator for random probing
        require_hyperbolic: Raise instead of truncating a degenerate group

    Returns:
        LearnedGroups with hyperbolic pairs and radical

    Raises:
        StructuralError: If the group is degenerate and ``require_hyperbolic``
    """
    if readout.n != oracle.n:
        raise ValidationError(
            f"Readout mask has {readout.n} qubits, oracle has {oracle.n}"
        )
    if readout.size == 0:
        raise ValidationError("Readout subsystem is empty")
    probe_strategy: ProbeStrategy = (
        get_strategy(strategy)() if isinstance(strategy, str) else strategy
    )
    group = PauliSubgroup(oracle.n)
    transcript: List[Dict[str, Any]] = []
    start = oracle.query_count
    misses = 0
    incomplete = False
    cost = test_cost(oracle, shots)

    for probe in probe_strategy.probes(readout, rng):
        if probe_strategy.exhausted(misses, group.rank, readout):
            break
        if group.contains(probe):
            transcript.append(
                {
                    "probe": str(probe),
                    "outcome": "implied",
                    "queries": oracle.query_count,
                }
            )
            continue
        if budget is not None and oracle.query_count - start + cost > budget:
            incomplete = True
            break
        try:
            image = test_pauli(oracle, probe, shots)
        except InconclusiveError as e:
            logger.warning("Stopping early: %s", str(e))
            incomplete = True
            break
        transcript.append(
            {
                "probe": str(probe),
                "outcome": str(image) if image is not None else None,
                "queries": oracle.query_count,
            }
        )
        if image is not None and group.add(probe, image):
            misses = 0
            logger.debug("Learned generator %s -> %s", probe, image)
        else:
            misses += 1

    if incomplete:
        logger.warning(
            "Learning stopped at rank %d after %d queries",
            group.rank,
            oracle.query_count - start,
        )
    decomposition = symplectic_gram_schmidt(group.generators, group.images)
    pairs = tuple(((a[0], a[1]), (b[0], b[1])) for a, b in decomposition.pairs)
    radical = tuple((c[0], c[1]) for c in decomposition.radical)
    for (src_a, img_a), (src_b, img_b) in pairs:
        if commutes(img_a, img_b):
            raise StructuralError(
                f"Learned images of {src_a}, {src_b} commute; learning data corrupted"
            )
    if radical:
        message = (
            f"Learned group of rank {group.rank} has a "
            f"{len(radical)}-dimensional radical; "
            f"keeping {len(pairs)} hyperbolic pairs"
        )
        if require_hyperbolic:
            raise StructuralError(message)
        logger.warning(message)
    learned = LearnedGroups(
        readout=readout,
        group=group,
        pairs=pairs,  # type: ignore[arg-type]
        radical=radical,  # type: ignore[arg-type]
        query_count=oracle.query_count - start,
        incomplete=incomplete,
        transcript=transcript,
    )
    logger.info(
        "Learned rank %d (|E|=%d) with %d queries",
        learned.rank,
        learned.e_size,
        learned.query_count,
    )
    return learned
