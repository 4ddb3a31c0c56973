"""Fidelity evaluators and the Monte Carlo decoding experiment.

Fidelities are computed two ways. The formula evaluators work in the Pauli
picture: for every ``P`` on D they pair the exact image ``U† P U`` with the
decoder image ``V† P V``, and the ``P_A`` average is done analytically
(it keeps a term exactly when the decoder image is trivial on A). The dense
oracle in :mod:`decoderlab.oracle` runs the protocol on a state vector and is
used to cross-check the formulas wherever it fits in memory.
"""

import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import binomtest

from ..clifford import CliffordTableau, conjugate, inverse
from ..core.config import get_dense_qubit_cap, get_exact_sum_cap
from ..core.exceptions import (
    DecoderLabError,
    DimensionError,
    ImpossibleOutcomeError,
    SizeLimitError,
    ValidationError,
)
from ..doped import ZERO, DopedCircuit, PauliSum, otoc, propagate, sample_doped_circuit
from ..learner import LearnedGroups, QueryOracle, learn_groups
from ..oracle import build_scrambled_state, decode_and_project
from ..pauli import SubsystemMask, enumerate_paulis
from ..synth import DecoderBundle, check_decrypter_condition, synthesize
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

# Absolute slack below the bound still counted as a success.
BOUND_SLACK = 1e-12


def meets_bound(fidelity: float, bound: float) -> bool:
    """Whether ``fidelity`` reaches ``bound`` up to ``BOUND_SLACK``.

    Bound values such as 0.8 are not exact binary fractions and the dense
    oracle reaches them only up to rounding. Fidelities of distinct learned
    decoders differ by far more than the slack.
    """
    return fidelity >= bound - BOUND_SLACK


def fidelity_bound(a_size: int, d_size: int, t: int) -> float:
    """Guaranteed fidelity ``1 / (1 + 2**(2|A| + t - 2|D|))``."""
    return 1.0 / (1.0 + 2.0 ** (2 * a_size + t - 2 * d_size))


def success_floor(n: int, d_size: int, t: int) -> float:
    """Probability ``1 - 2**(t - 2(n - |D|))`` of learning a good decoder."""
    return 1.0 - 2.0 ** (t - 2 * (n - d_size))


def scrambling_fidelity(a_size: int, e_size: int) -> float:
    """Fidelity ``1 / (1 + 2**(2|A| - 2|E|))`` reached on a perfect scrambler."""
    return 1.0 / (1.0 + 2.0 ** (2 * a_size - 2 * e_size))


def random_baseline(a_size: int) -> float:
    """Fidelity ``2**-2|A|`` of guessing the reference state."""
    return 4.0 ** -a_size


class FidelityTerms(NamedTuple):
    """Fidelity with ``N1 = 4**|A| pi_V F`` and ``N2 = 4**|A| pi_V``."""

    fidelity: float
    pi_v: float
    n1: float
    n2: float


def _decoder_tableau(decoder: Union[DecoderBundle, CliffordTableau]) -> CliffordTableau:
    return decoder if isinstance(decoder, CliffordTableau) else decoder.composite


def propagate_readout(c: DopedCircuit, D: SubsystemMask) -> List[PauliSum]:
    """``U† P U`` for every P on D, in :func:`enumerate_paulis` order."""
    return [propagate(c, p) for p in enumerate_paulis(D)]


def fidelity_terms(
    c: DopedCircuit,
    decoder: Union[DecoderBundle, CliffordTableau],
    A: SubsystemMask,
    D: SubsystemMask,
    cap: Optional[int] = None,
    propagated: Optional[Sequence[PauliSum]] = None,
) -> FidelityTerms:
    """Exact Pauli-group evaluation of the decoding fidelity and pi_V.

    Args:
        c: Scrambler U
        decoder: Bundle or bare decoder tableau V
        A: Input subsystem
        D: Readout subsystem
        cap: Largest ``4**(|D|+|A|)`` summed exactly
        propagated: Output of :func:`propagate_readout` for ``c`` and D, reused
            when one scrambler is paired with many decoders

    Returns:
        FidelityTerms for the protocol without post-selection slack

    Raises:
        SizeLimitError: If the sum exceeds the cap
        ImpossibleOutcomeError: If the denominator vanishes
    """
    tableau = _decoder_tableau(decoder)
    for size in (tableau.n, A.n, D.n):
        if size != c.n:
            raise DimensionError(c.n, size, "decoder or mask")
    cap = get_exact_sum_cap() if cap is None else cap
    if 4 ** (D.size + A.size) > cap:
        raise SizeLimitError(
            f"Fidelity sum over 4^{D.size + A.size} Paulis exceeds the cap {cap}"
        )
    if propagated is not None and len(propagated) != 4**D.size:
        raise ValidationError(
            f"Expected {4 ** D.size} propagated images, got {len(propagated)}"
        )
    total = ZERO
    pinned = ZERO
    for k, p in enumerate(enumerate_paulis(D)):
        image = conjugate(tableau, p)
        weight = (propagate(c, p) if propagated is None else propagated[k]).inner(image)
        total = total + weight
        if image.is_trivial_on(A):
            pinned = pinned + weight
    if not pinned:
        raise ImpossibleOutcomeError("Fidelity denominator vanishes (pi_V = 0)")
    scale = 4.0 ** -D.size
    n1 = float(total) * scale
    pi_v = float(pinned) * scale
    n2 = 4.0 ** A.size * pi_v
    return FidelityTerms(n1 / n2, pi_v, n1, n2)


def fidelity_formula(
    c: DopedCircuit,
    bundle: Union[DecoderBundle, CliffordTableau],
    A: SubsystemMask,
    D: SubsystemMask,
) -> float:
    """Decoding fidelity as a ratio of exact Pauli averages.

    See :func:`fidelity_terms`.
    """
    return fidelity_terms(c, bundle, A, D).fidelity


def pinned_trivial_count(
    bundle: DecoderBundle, A: SubsystemMask, E: Optional[SubsystemMask] = None
) -> int:
    """Number of ``P`` on E whose image ``V'† D P D† V'`` is trivial on A."""
    E = bundle.e_mask if E is None else E
    undo = inverse(bundle.diagonalizer)
    count = 0
    for p in enumerate_paulis(E):
        if conjugate(bundle.decrypter, conjugate(undo, p)).is_trivial_on(A):
            count += 1
    return count


def fidelity_post_randomizer(
    c: DopedCircuit,
    bundle: DecoderBundle,
    A: SubsystemMask,
    E: Optional[SubsystemMask] = None,
) -> float:
    """Fidelity once the randomizer has traced out F: ``4**-|A| / Omega_AE``.

    Args:
        c: Scrambler U
        bundle: Decoder whose decrypter satisfies the generator condition on E
        A: Input subsystem
        E: Subsystem kept by the diagonalizer, the bundle's E when None

    Raises:
        DecrypterConditionError: If V' and U disagree on a generator of E
    """
    E = bundle.e_mask if E is None else E
    check_decrypter_condition(c, bundle, E)
    return 4.0 ** (E.size - A.size) / pinned_trivial_count(bundle, A, E)


@dataclass
class TrialRecord:
    """Outcome of one decoding trial.

    ``fidelity`` comes from the dense oracle when it ran and from the formula
    otherwise; ``success`` compares it with ``bound``. Failed trials keep
    their error text and have no fidelity.
    """

    trial: int
    seed: int
    n: int
    t: int
    a_size: int
    d_size: int
    bound: float
    breakdown: bool
    e_size: Optional[int] = None
    rank: Optional[int] = None
    fidelity_formula: Optional[float] = None
    fidelity_oracle: Optional[float] = None
    fidelity: Optional[float] = None
    pi_v: Optional[float] = None
    n1: Optional[float] = None
    n2: Optional[float] = None
    success: bool = False
    query_count: int = 0
    incomplete: bool = False
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def completed(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentSummary:
    """Aggregate of a batch of trials.

    ``success_rate`` is the mean of the per-trial flags over every trial,
    failed ones included; ``ci_low``/``ci_high`` is its exact 95% binomial
    interval, and ``floor_consistent`` says whether the learning floor lies
    at or below the upper end.
    """

    n: int
    t: int
    a_size: int
    d_size: int
    trials: int
    completed: int
    failures: int
    successes: int
    success_rate: float
    ci_low: float
    ci_high: float
    bound: float
    floor: float
    floor_consistent: bool
    median_fidelity: Optional[float]
    mean_fidelity: Optional[float]
    random_baseline: float
    breakdown: bool
    query_count: int
    wall_time: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def learn_for(
    config: ExperimentConfig,
    circuit: DopedCircuit,
    readout: SubsystemMask,
    rng: np.random.Generator,
) -> LearnedGroups:
    """Learn G_D through a fresh query oracle set up from ``config``."""
    sampled = config.mode == "sampled"
    oracle = QueryOracle(
        circuit,
        mode=config.mode,
        shots=config.shots if sampled else 1,
        rng=rng if sampled else None,
        budget=config.budget,
    )
    return learn_groups(
        oracle,
        readout,
        strategy=config.strategy,
        rng=rng,
        require_hyperbolic=config.require_hyperbolic,
    )


def use_dense_oracle(config: ExperimentConfig) -> bool:
    if config.oracle == "auto":
        return 2 * config.n + 2 * config.a_size <= get_dense_qubit_cap()
    return config.oracle == "on"


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    """Sample, learn, synthesize and evaluate one instance.

    The trial succeeds when its fidelity meets the bound in the sense of
    :func:`meets_bound`. Errors raised by the library are recorded on the
    returned record.
    """
    bound = fidelity_bound(config.a_size, config.d_size, config.t)
    record = TrialRecord(
        trial=trial,
        seed=config.seed,
        n=config.n,
        t=config.t,
        a_size=config.a_size,
        d_size=config.d_size,
        bound=bound,
        breakdown=config.breakdown,
    )
    started = time.perf_counter()
    rng = np.random.default_rng([config.seed, trial])
    readout = SubsystemMask.last(config.n, config.d_size)
    A = SubsystemMask.first(config.n, config.a_size)
    try:
        circuit = sample_doped_circuit(
            config.n, config.t, config.ensemble, config.depth, rng, readout
        )
        groups = learn_for(config, circuit, readout, rng)
        record.e_size = groups.e_size
        record.rank = groups.rank
        record.query_count = groups.query_count
        record.incomplete = groups.incomplete
        metadata = {"seed": config.seed, "trial": trial}
        bundle = synthesize(
            groups, rng, metadata=metadata, require_hyperbolic=config.require_hyperbolic
        )
        terms = fidelity_terms(circuit, bundle, A, readout)
        record.fidelity_formula = terms.fidelity
        record.pi_v = terms.pi_v
        record.n1 = terms.n1
        record.n2 = terms.n2
        record.fidelity = terms.fidelity
        if use_dense_oracle(config):
            projection = decode_and_project(build_scrambled_state(circuit, A), bundle)
            record.fidelity_oracle = projection.fidelity
            record.fidelity = projection.fidelity
        record.success = meets_bound(record.fidelity, bound)
    except DecoderLabError as e:
        record.error = f"{type(e).__name__}: {str(e)}"
        logger.warning(
            "Trial %d (seed %d) failed: %s", trial, config.seed, record.error
        )
    record.wall_time = time.perf_counter() - started
    logger.debug("Trial %d: %s", trial, record)
    return record


def summarize(
    config: ExperimentConfig, records: Sequence[TrialRecord]
) -> ExperimentSummary:
    """Reduce trial records to an :class:`ExperimentSummary`."""
    if not records:
        raise ValidationError("Cannot summarize an empty batch")
    successes = sum(1 for r in records if r.success)
    interval = binomtest(successes, len(records)).proportion_ci(confidence_level=0.95)
    fidelities = [r.fidelity for r in records if r.fidelity is not None]
    floor = success_floor(config.n, config.d_size, config.t)
    return ExperimentSummary(
        n=config.n,
        t=config.t,
        a_size=config.a_size,
        d_size=config.d_size,
        trials=len(records),
        completed=sum(1 for r in records if r.completed),
        failures=sum(1 for r in records if not r.completed),
        successes=successes,
        success_rate=successes / len(records),
        ci_low=float(interval.low),
        ci_high=float(interval.high),
        bound=fidelity_bound(config.a_size, config.d_size, config.t),
        floor=floor,
        floor_consistent=floor <= float(interval.high),
        median_fidelity=float(np.median(fidelities)) if fidelities else None,
        mean_fidelity=float(np.mean(fidelities)) if fidelities else None,
        random_baseline=random_baseline(config.a_size),
        breakdown=config.breakdown,
        query_count=sum(r.query_count for r in records),
        wall_time=sum(r.wall_time for r in records),
    )


def run_decoding_experiment(
    config: ExperimentConfig,
) -> Tuple[List[TrialRecord], ExperimentSummary]:
    """Run ``config.trials`` independent decoding trials.

    Trial ``k`` owns the random stream ``[config.seed, k]``, so results do
    not depend on the order in which trials run.

    Args:
        config: Experiment parameters

    Returns:
        Tuple of per-trial records and the batch summary
    """
    if config.breakdown:
        logger.warning(
            "t=%d exceeds n=%d: decoding is expected to break down", config.t, config.n
        )
    logger.info(
        "Decoding experiment n=%d t=%d |A|=%d |D|=%d (%d trials, %s ensemble)",
        config.n,
        config.t,
        config.a_size,
        config.d_size,
        config.trials,
        config.ensemble,
    )
    records = [run_trial(config, trial) for trial in range(config.trials)]
    summary = summarize(config, records)
    logger.info(
        "Success rate %.4f [%.4f, %.4f] against floor %.4f",
        summary.success_rate, summary.ci_low, summary.ci_high, summary.floor,
    )
    return records, summary


@dataclass
class SweepPoint:
    """Median fidelity at one ``(t, |D|)`` grid point."""

    t: int
    d_size: int
    trials: int
    completed: int
    median_fidelity: Optional[float]
    mean_fidelity: Optional[float]
    success_rate: float
    bound: float
    baseline: float
    breakdown: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def sweep(
    config: ExperimentConfig,
    t_values: Sequence[int],
    d_values: Optional[Sequence[int]] = None,
) -> List[SweepPoint]:
    """Run the decoding experiment over a grid of T counts and readout sizes."""
    points = []
    for d_size in d_values or [config.d_size]:
        for t in t_values:
            _, summary = run_decoding_experiment(config.replace(t=t, d_size=d_size))
            points.append(
                SweepPoint(
                    t=t,
                    d_size=d_size,
                    trials=summary.trials,
                    completed=summary.completed,
                    median_fidelity=summary.median_fidelity,
                    mean_fidelity=summary.mean_fidelity,
                    success_rate=summary.success_rate,
                    bound=summary.bound,
                    baseline=summary.random_baseline,
                    breakdown=summary.breakdown,
                )
            )
    return points


VERIFY_SUITES = {"clifford-only": (0,), "doped": (2, 4), "all": (0, 2, 4)}


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def verification_checks(
    suite: str, seed: int, trials: int = 5, n: int = 6, a_size: int = 1, d_size: int = 3
) -> List[Check]:
    """Cross-check formula, oracle and structural guarantees on seeded instances.

    Every instance must give formula and dense-oracle fidelities within 1e-9,
    a decrypter that matches U on the generators of E, and a learned rank of
    at least ``2|D| - t``. Clifford instances must also reach
    ``1 / (4**|A| Omega_AD)`` exactly.

    Raises:
        ValidationError: If the suite is unknown
    """
    if suite not in VERIFY_SUITES:
        raise ValidationError(f"Unknown verification suite: {suite}")
    checks: List[Check] = []
    A = SubsystemMask.first(n, a_size)
    readout = SubsystemMask.last(n, d_size)
    for t in VERIFY_SUITES[suite]:
        config = ExperimentConfig(
            n=n, t=t, a_size=a_size, d_size=d_size, seed=seed, trials=trials
        )
        for trial in range(trials):
            label = f"t={t} trial={trial}"
            rng = np.random.default_rng([seed, trial])
            try:
                circuit = sample_doped_circuit(
                    n, t, config.ensemble, None, rng, readout
                )
                groups = learn_for(config, circuit, readout, rng)
                bundle = synthesize(
                    groups, rng, require_hyperbolic=config.require_hyperbolic
                )
                check_decrypter_condition(circuit, bundle)
                formula = fidelity_formula(circuit, bundle, A, readout)
                state = build_scrambled_state(circuit, A)
                dense = decode_and_project(state, bundle).fidelity
            except DecoderLabError as e:
                checks.append(Check(label, False, f"{type(e).__name__}: {str(e)}"))
                continue
            agree = abs(formula - dense) <= 1e-9
            checks.append(Check(f"{label} oracle", agree, f"{formula!r} vs {dense!r}"))
            full = groups.rank >= 2 * d_size - t
            checks.append(Check(f"{label} rank", full, f"rank {groups.rank}"))
            if t == 0:
                expected = 1.0 / (4.0 ** a_size * otoc(circuit, A, readout))
                detail = f"{formula!r} vs {expected!r}"
                match = abs(formula - expected) <= 1e-9
                checks.append(Check(f"{label} clifford", match, detail))
    failed = [c for c in checks if not c.passed]
    logger.info(
        "Verification suite %s: %d checks, %d failed", suite, len(checks), len(failed)
    )
    return checks
