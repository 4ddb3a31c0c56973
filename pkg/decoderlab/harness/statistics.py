"""Randomizer statistics: the spread of N1, N2 and F over randomizer draws."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import stats

from ..clifford import conjugate, embed, inverse
from ..core.exceptions import StructuralError
from ..doped import DopedCircuit, propagate, sample_doped_circuit
from ..pauli import SubsystemMask, enumerate_paulis, multiply
from ..synth import (
    DecoderBundle,
    assemble,
    build_randomizer,
    check_decrypter_condition,
    synthesize,
)
from .config import ExperimentConfig
from .experiments import (
    fidelity_terms,
    learn_for,
    pinned_trivial_count,
    propagate_readout,
)

logger = logging.getLogger(__name__)

# Below this many draws intervals use Student-t quantiles and are flagged.
MIN_DRAWS = 30
SIGMAS = 3.0
SPREAD_ATTEMPTS = 64

Instance = Tuple[DopedCircuit, DecoderBundle]


def predicted_n1(f_size: int) -> float:
    """Randomizer average of N1 on a scrambler: ``2**-2|F|``."""
    return 4.0 ** -f_size


def predicted_n2(a_size: int, d_size: int, e_size: int) -> float:
    """Randomizer average of N2 on a scrambler: ``2**-2|D| (2**2|E| + 2**2|A| - 1)``."""
    return 4.0 ** -d_size * (4.0 ** e_size + 4.0 ** a_size - 1)


def predicted_n2_instance(bundle: DecoderBundle, A: SubsystemMask) -> float:
    """Randomizer average of N2 for this decoder.

    It is ``4**(|A|-|D|)`` times :func:`pinned_trivial_count`.
    """
    return 4.0 ** (A.size - bundle.readout.size) * pinned_trivial_count(bundle, A)


def has_fidelity_spread(
    circuit: DopedCircuit, bundle: DecoderBundle, A: SubsystemMask
) -> bool:
    """Whether some randomizer draw moves F off its randomizer-free value.

    A draw changes F only through the terms of ``U† D Q D† U`` for ``Q`` on F.
    Such a term leaves F unchanged when its part on A also occurs on a
    decrypted element of E, so F is the same for every draw exactly when
    all of them do. This always holds when F is empty, and also when the
    decrypted E covers every Pauli on A (pinned count ``4**(|E|-|A|)``).
    """
    undo = inverse(bundle.diagonalizer)
    decrypted = [
        conjugate(bundle.decrypter, conjugate(undo, p))
        for p in enumerate_paulis(bundle.e_mask)
    ]
    for q in enumerate_paulis(bundle.f_mask, include_identity=False):
        for _, term in propagate(circuit, conjugate(undo, q)).as_terms():
            if not any(multiply(term, g).is_trivial_on(A) for g in decrypted):
                return True
    return False


def _interval(samples: np.ndarray, widened: bool) -> Tuple[float, float]:
    stderr = float(samples.std(ddof=1) / math.sqrt(len(samples)))
    width = stats.t.ppf(stats.norm.cdf(SIGMAS), len(samples) - 1) if widened else SIGMAS
    return float(samples.mean()), float(width * stderr)


@dataclass
class StatisticsRecord:
    """Samples of N1, N2 and F over randomizer draws with their predictions.

    Attributes:
        n1: ``4**|A| pi_V F`` per draw
        n2: ``4**|A| pi_V`` per draw
        fidelity: F per draw
        predicted_n1: Scrambler value ``2**-2|F|``
        predicted_n2: Scrambler value from the subsystem sizes
        predicted_n2_instance: Value for the learned decrypter
        variance_scale: Expected order ``2**-2|C|`` of the F variance
        widened: True when too few draws forced Student-t intervals
    """

    n: int
    a_size: int
    d_size: int
    e_size: int
    f_size: int
    c_size: int
    n1: np.ndarray
    n2: np.ndarray
    fidelity: np.ndarray
    predicted_n1: float
    predicted_n2: float
    predicted_n2_instance: float
    variance_scale: float
    widened: bool = False

    @property
    def draws(self) -> int:
        return len(self.fidelity)

    @property
    def n1_interval(self) -> Tuple[float, float]:
        """Mean and half-width of the 3-sigma interval."""
        return _interval(self.n1, self.widened)

    @property
    def n2_interval(self) -> Tuple[float, float]:
        return _interval(self.n2, self.widened)

    @property
    def fidelity_variance(self) -> float:
        return float(self.fidelity.var(ddof=1))

    def summary(self) -> Dict[str, Any]:
        n1_mean, n1_width = self.n1_interval
        n2_mean, n2_width = self.n2_interval
        return {
            "n": self.n,
            "a_size": self.a_size,
            "d_size": self.d_size,
            "e_size": self.e_size,
            "f_size": self.f_size,
            "c_size": self.c_size,
            "draws": self.draws,
            "n1_mean": n1_mean,
            "n1_halfwidth": n1_width,
            "n2_mean": n2_mean,
            "n2_halfwidth": n2_width,
            "fidelity_mean": float(self.fidelity.mean()),
            "fidelity_variance": self.fidelity_variance,
            "predicted_n1": self.predicted_n1,
            "predicted_n2": self.predicted_n2,
            "predicted_n2_instance": self.predicted_n2_instance,
            "variance_scale": self.variance_scale,
            "widened": self.widened,
        }


def prepare_instance(config: ExperimentConfig, attempt: int = 0) -> Instance:
    """Sample the scrambler of ``config`` and learn its decoder.

    Attempt 0 draws from stream ``[seed, 0]`` and attempt ``k`` from
    ``[seed, 0, k]``.
    """
    stream = [config.seed, 0] if attempt == 0 else [config.seed, 0, attempt]
    rng = np.random.default_rng(stream)
    readout = SubsystemMask.last(config.n, config.d_size)
    circuit = sample_doped_circuit(
        config.n, config.t, config.ensemble, config.depth, rng, readout
    )
    groups = learn_for(config, circuit, readout, rng)
    bundle = synthesize(
        groups,
        rng,
        metadata={"seed": config.seed},
        require_hyperbolic=config.require_hyperbolic,
    )
    check_decrypter_condition(circuit, bundle)
    return circuit, bundle


def prepare_spread_instance(
    config: ExperimentConfig, attempts: int = SPREAD_ATTEMPTS
) -> Instance:
    """First instance of ``config`` whose fidelity varies with the randomizer.

    Raises:
        StructuralError: If none of ``attempts`` instances has a spread
    """
    A = SubsystemMask.first(config.n, config.a_size)
    for attempt in range(attempts):
        circuit, bundle = prepare_instance(config, attempt)
        if has_fidelity_spread(circuit, bundle, A):
            logger.debug(
                "Instance %d of seed %d has a fidelity spread", attempt, config.seed
            )
            return circuit, bundle
    raise StructuralError(
        f"None of {attempts} instances of seed {config.seed} "
        "has a randomizer spread of F"
    )


def add_idle_qubit(circuit: DopedCircuit, bundle: DecoderBundle) -> Instance:
    """Append one qubit that U does not touch; it lands in B and in C."""
    n = circuit.n + 1
    qubits = list(range(circuit.n))

    def widen(mask: SubsystemMask) -> SubsystemMask:
        return SubsystemMask.from_qubits(n, mask.qubits)

    widened = assemble(
        embed(bundle.diagonalizer, qubits, n),
        embed(bundle.randomizer, qubits, n),
        embed(bundle.decrypter, qubits, n),
        widen(bundle.readout),
        widen(bundle.e_mask),
        {key: value for key, value in bundle.metadata.items() if key != "n"},
    )
    return DopedCircuit(n, circuit.gates), widened


def randomizer_statistics(
    config: ExperimentConfig,
    draws: Optional[int] = None,
    instance: Optional[Instance] = None,
) -> StatisticsRecord:
    """Resample only the randomizer of a fixed decoder and record N1, N2 and F.

    Args:
        config: Experiment parameters; ``config.draws`` sets the default draw count
        draws: Number of randomizer draws
        instance: Circuit and bundle to reuse instead of sampling a new one; its
            register may be wider than ``config.n``

    Returns:
        StatisticsRecord with per-draw samples and predictions

    Raises:
        DecrypterConditionError: If the learned decrypter is wrong on E
    """
    draws = config.draws if draws is None else draws
    circuit, bundle = prepare_instance(config) if instance is None else instance
    A = SubsystemMask.first(circuit.n, config.a_size)
    F, C = bundle.f_mask, bundle.c_mask
    if F.size == 0:
        logger.warning("F is empty; every draw uses the identity randomizer")
    if C.size == 0:
        logger.warning("C is empty; the randomizer acts on F alone")
    propagated = propagate_readout(circuit, bundle.readout)
    samples = np.empty((draws, 3))
    for k in range(draws):
        rng = np.random.default_rng([config.seed, 1, k])
        randomizer = build_randomizer(bundle.n, F, C, rng)
        randomized = bundle.with_randomizer(randomizer, randomizer_draw=k)
        terms = fidelity_terms(
            circuit, randomized, A, bundle.readout, propagated=propagated
        )
        samples[k] = (terms.n1, terms.n2, terms.fidelity)
    widened = draws < MIN_DRAWS
    if widened:
        logger.warning(
            "Only %d randomizer draws; intervals widened to Student-t quantiles", draws
        )
    record = StatisticsRecord(
        n=circuit.n,
        a_size=A.size,
        d_size=bundle.readout.size,
        e_size=bundle.e_mask.size,
        f_size=F.size,
        c_size=C.size,
        n1=samples[:, 0],
        n2=samples[:, 1],
        fidelity=samples[:, 2],
        predicted_n1=predicted_n1(F.size),
        predicted_n2=predicted_n2(A.size, bundle.readout.size, bundle.e_mask.size),
        predicted_n2_instance=predicted_n2_instance(bundle, A),
        variance_scale=4.0 ** -C.size,
        widened=widened,
    )
    logger.info("Randomizer statistics: %s", record.summary())
    return record


@dataclass
class VarianceScaling:
    """Fidelity variance at ``|C|`` and ``|C| + 1`` on the same scrambler.

    ``degenerate`` is set when the draws at ``|C|`` show no spread of F; the
    ratio is then None.
    """

    base: StatisticsRecord
    extended: StatisticsRecord

    @property
    def degenerate(self) -> bool:
        return self.base.fidelity_variance == 0.0

    @property
    def ratio(self) -> Optional[float]:
        if self.degenerate:
            return None
        return self.extended.fidelity_variance / self.base.fidelity_variance

    @property
    def predicted_ratio(self) -> float:
        """Ratio ``(4**m - 1) / (4**(m+1) - 1)`` for a randomizer on m qubits."""
        m = self.base.f_size + self.base.c_size
        return (4.0**m - 1) / (4.0 ** (m + 1) - 1)

    def summary(self) -> Dict[str, Any]:
        return {
            "c_size": self.base.c_size,
            "variance": self.base.fidelity_variance,
            "variance_extended": self.extended.fidelity_variance,
            "ratio": self.ratio,
            "predicted_ratio": self.predicted_ratio,
            "degenerate": self.degenerate,
        }


def variance_scaling(
    config: ExperimentConfig, draws: Optional[int] = None
) -> VarianceScaling:
    """Compare the randomizer variance of F with one more qubit in C.

    Both runs use the same scrambler and decoder, picked by
    :func:`prepare_spread_instance`; the second adds an idle qubit to C.

    Raises:
        StructuralError: If no instance of ``config`` has a spread of F
    """
    circuit, bundle = prepare_spread_instance(config)
    base = randomizer_statistics(config, draws, instance=(circuit, bundle))
    wider = add_idle_qubit(circuit, bundle)
    extended = randomizer_statistics(config, draws, instance=wider)
    scaling = VarianceScaling(base, extended)
    if scaling.degenerate:
        logger.warning(
            "No spread of F in %d draws at |C|=%d; ratio undefined",
            base.draws,
            base.c_size,
        )
    return scaling
