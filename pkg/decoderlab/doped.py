"""t-doped Clifford circuits, exact Pauli propagation and scrambling diagnostics."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .clifford import (
    CliffordTableau,
    Gate,
    conjugate,
    from_gates,
    sample_uniform,
    to_gates,
)
from .core.base import CircuitEnsemble
from .core.config import get_exact_sum_cap, get_max_t, get_monte_carlo_draws
from .core.exceptions import (
    DimensionError,
    SizeLimitError,
    StructuralError,
    ValidationError,
)
from .core.registry import get_ensemble, register_ensemble
from .pauli import (
    PauliString,
    PauliSubgroup,
    SubsystemMask,
    enumerate_paulis,
    random_pauli,
)

logger = logging.getLogger(__name__)


class Surd:
    """Exact number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a: Union[int, Fraction] = 0, b: Union[int, Fraction] = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, other: "Surd") -> "Surd":
        return Surd(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "Surd") -> "Surd":
        return Surd(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "Surd":
        return Surd(-self.a, -self.b)

    def __mul__(self, other: "Surd") -> "Surd":
        a = self.a * other.a + 2 * self.b * other.b
        return Surd(a, self.a * other.b + self.b * other.a)

    def over_sqrt2(self) -> "Surd":
        # (a + b*sqrt2) / sqrt2 = b + (a/2)*sqrt2
        return Surd(self.b, self.a / 2)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd(other)
        if not isinstance(other, Surd):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(2.0)

    def __repr__(self) -> str:
        return f"Surd({self.a}, {self.b})"


ZERO = Surd(0)
ONE = Surd(1)


class PauliSum:
    """Real combination of Hermitian Pauli strings, times ``i**phase``.

    Terms are keyed by their unsigned symplectic part ``(x, z)``; signs are
    absorbed into the exact coefficients. ``phase`` is 1 only when the
    propagated string itself carried an odd power of ``i``.
    """

    def __init__(self, n: int, terms: Dict[Tuple[int, int], Surd], phase: int = 0):
        self.n = n
        self.terms = {key: coef for key, coef in terms.items() if coef}
        self.phase = phase

    @classmethod
    def from_pauli(cls, p: PauliString) -> "PauliSum":
        phase = p.phase % 2
        sign = -1 if (p.phase - phase) % 4 == 2 else 1
        return cls(p.n, {p.key: Surd(sign)}, phase)

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, p: PauliString) -> Surd:
        """Coefficient of the unsigned string of ``p``."""
        return self.terms.get(p.key, ZERO)

    def inner(self, p: PauliString) -> Surd:
        """Normalized trace ``2**-n tr(p S)`` for a Hermitian ``p``.

        Raises:
            ValidationError: If ``p`` is not Hermitian or the sum is not real
        """
        if not p.is_hermitian or self.phase:
            raise ValidationError("inner requires a Hermitian string and a real sum")
        coef = self.coefficient(p)
        return -coef if p.phase == 2 else coef

    def weight_trivial_on(self, mask: SubsystemMask) -> float:
        """Sum of squared coefficients of terms acting as identity on ``mask``."""
        total = 0.0
        for (x, z), coef in self.terms.items():
            if (x | z) & mask.bits == 0:
                total += float(coef) ** 2
        return total

    def norm_squared(self) -> Surd:
        total = ZERO
        for coef in self.terms.values():
            total = total + coef * coef
        return total

    def single_pauli(self) -> Optional[PauliString]:
        """The signed Pauli string if the sum is a single term of weight one."""
        if len(self.terms) != 1:
            return None
        (key, coef), = self.terms.items()
        if coef == ONE:
            sign = 0
        elif coef == -ONE:
            sign = 2
        else:
            return None
        return PauliString(self.n, key[0], key[1], sign + self.phase)

    def as_terms(self) -> List[Tuple[float, PauliString]]:
        return [
            (float(coef), PauliString(self.n, x, z))
            for (x, z), coef in sorted(self.terms.items())
        ]

    def __str__(self) -> str:
        body = " + ".join(f"{c:.6g}*{p}" for c, p in self.as_terms()) or "0"
        return f"i*({body})" if self.phase else body


Segment = Union[CliffordTableau, int]


@dataclass(frozen=True)
class DopedCircuit:
    """Time-ordered Clifford gates interleaved with T gates."""

    n: int
    gates: Tuple[Gate, ...]
    _segments: Optional[Tuple[Segment, ...]] = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            if any(q >= self.n for q in gate.qubits):
                raise ValidationError(f"Gate {gate} out of range for {self.n} qubits")

    @property
    def t(self) -> int:
        return sum(1 for g in self.gates if g.name == "T")

    @property
    def is_clifford(self) -> bool:
        return self.t == 0

    @classmethod
    def from_tableau(cls, tableau: CliffordTableau) -> "DopedCircuit":
        return cls(tableau.n, tuple(to_gates(tableau)))

    def to_tableau(self) -> CliffordTableau:
        """Convert a T-free circuit to its tableau.

        Raises:
            StructuralError: If the circuit contains T gates
        """
        if self.t:
            raise StructuralError(f"Circuit has {self.t} T gates and is not Clifford")
        return from_gates(self.n, self.gates)

    def segments(self) -> Tuple[Segment, ...]:
        """Clifford runs compiled to tableaux, with T gates as bare qubit indices."""
        if self._segments is None:
            compiled: List[Segment] = []
            run: List[Gate] = []
            for gate in self.gates:
                if gate.name == "T":
                    if run:
                        compiled.append(from_gates(self.n, run))
                        run = []
                    compiled.append(gate.qubits[0])
                else:
                    run.append(gate)
            if run:
                compiled.append(from_gates(self.n, run))
            object.__setattr__(self, "_segments", tuple(compiled))
        return self._segments  # type: ignore[return-value]

    def then(self, other: "DopedCircuit") -> "DopedCircuit":
        """Circuit running ``self`` first and ``other`` second."""
        if other.n != self.n:
            raise DimensionError(self.n, other.n, "circuit")
        return DopedCircuit(self.n, self.gates + other.gates)

    def to_text(self) -> str:
        lines = [f"# qubits {self.n}"] + [str(g) for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n: Optional[int] = None) -> "DopedCircuit":
        """Parse circuit text, one gate per line.

        A ``# qubits N`` header fixes the register size; otherwise ``n`` or the
        largest index used decides it. Other ``#`` lines are comments.

        Raises:
            ValidationError: If a line is not a gate
        """
        gates: List[Gate] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                if len(tokens) == 2 and tokens[0] == "qubits" and n is None:
                    n = int(tokens[1])
                continue
            try:
                gates.append(Gate.parse(line))
            except ValidationError as e:
                raise ValidationError(f"Line {number}: {str(e)}")
        if n is None:
            n = 1 + max((q for g in gates for q in g.qubits), default=-1)
        return cls(n, tuple(gates))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "DopedCircuit":
        return cls.from_text(Path(path).read_text())


def _check_same_n(expected: int, actual: int, what: str = "operand") -> None:
    if expected != actual:
        raise DimensionError(expected, actual, what)


def _apply_t(
    terms: Dict[Tuple[int, int], Surd], qubit: int
) -> Dict[Tuple[int, int], Surd]:
    bit = 1 << qubit
    out: Dict[Tuple[int, int], Surd] = {}
    for (x, z), coef in terms.items():
        if not x & bit:
            out[(x, z)] = out.get((x, z), ZERO) + coef
            continue
        half = coef.over_sqrt2()
        # T† X T = (X - Y)/sqrt2 and T† Y T = (X + Y)/sqrt2
        partner = (x, z ^ bit)
        out[(x, z)] = out.get((x, z), ZERO) + half
        out[partner] = out.get(partner, ZERO) + (half if z & bit else -half)
    return {key: coef for key, coef in out.items() if coef}


def _apply_clifford(
    terms: Dict[Tuple[int, int], Surd], tableau: CliffordTableau
) -> Dict[Tuple[int, int], Surd]:
    out: Dict[Tuple[int, int], Surd] = {}
    for (x, z), coef in terms.items():
        image = conjugate(tableau, PauliString(tableau.n, x, z))
        out[image.key] = -coef if image.phase == 2 else coef
    return out


def propagate(c: DopedCircuit, p: PauliString) -> PauliSum:
    """Exact Heisenberg image ``U† p U`` as a Pauli sum.

    Args:
        c: Circuit of U
        p: Pauli string on the same qubits

    Returns:
        PauliSum with at most ``2**t`` terms

    Raises:
        DimensionError: If the qubit counts differ
    """
    _check_same_n(c.n, p.n)
    start = PauliSum.from_pauli(p)
    terms = start.terms
    for segment in reversed(c.segments()):
        if isinstance(segment, CliffordTableau):
            terms = _apply_clifford(terms, segment)
        else:
            terms = _apply_t(terms, segment)
    return PauliSum(c.n, terms, start.phase)


def is_preserved(c: DopedCircuit, p: PauliString) -> Optional[PauliString]:
    """Signed image of ``p`` if ``U† p U`` is a Pauli string, else None."""
    return propagate(c, p).single_pauli()


def preserved_subgroup(c: DopedCircuit, readout: SubsystemMask) -> PauliSubgroup:
    """Exhaustively compute G_D(U) with signed images by scanning every Pauli on D."""
    _check_same_n(c.n, readout.n, "mask")
    group = PauliSubgroup(c.n)
    for p in enumerate_paulis(readout, include_identity=False):
        if group.contains(p):
            continue
        image = is_preserved(c, p)
        if image is not None:
            group.add(p, image)
    return group


@dataclass(frozen=True)
class OtocEstimate:
    """OTOC value with its Monte Carlo standard error (zero when exact)."""

    value: float
    stderr: float
    exact: bool
    samples: int


def estimate_otoc(
    c: DopedCircuit,
    X: SubsystemMask,
    Y: SubsystemMask,
    cap: Optional[int] = None,
    draws: Optional[int] = None,
    seed: Optional[int] = None,
    monte_carlo: bool = True,
) -> OtocEstimate:
    """Average of ``2**-n tr(P_X U†P_YU P_X U†P_YU)`` over both local Pauli groups.

    The ``P_X`` average is taken analytically: a term of ``U† P_Y U`` survives
    it exactly when the term acts trivially on ``X``. The ``P_Y`` average is an
    exact sum when ``4**(|X|+|Y|) <= cap`` and a seeded Monte Carlo estimate
    otherwise, with one random stream per draw.

    Raises:
        SizeLimitError: If the cap is exceeded and Monte Carlo is disabled
        ValidationError: If Monte Carlo is needed but no seed is given
    """
    _check_same_n(c.n, X.n, "mask")
    _check_same_n(c.n, Y.n, "mask")
    cap = get_exact_sum_cap() if cap is None else cap
    total = 4 ** (X.size + Y.size)
    if total <= cap:
        values = [propagate(c, p).weight_trivial_on(X) for p in enumerate_paulis(Y)]
        return OtocEstimate(float(np.mean(values)), 0.0, True, len(values))
    if not monte_carlo:
        raise SizeLimitError(f"OTOC needs {total} Pauli pairs, above the cap {cap}")
    if seed is None:
        raise ValidationError("Monte Carlo OTOC requires a seed")
    draws = get_monte_carlo_draws() if draws is None else draws
    logger.warning(
        "OTOC over %d Pauli pairs exceeds cap %d; sampling %d draws", total, cap, draws
    )
    samples = np.empty(draws)
    for k in range(draws):
        q = random_pauli(Y, np.random.default_rng([seed, k]))
        samples[k] = propagate(c, q).weight_trivial_on(X)
    stderr = float("inf")
    if draws > 1:
        stderr = float(samples.std(ddof=1) / math.sqrt(draws))
    return OtocEstimate(float(samples.mean()), stderr, False, draws)


def otoc(
    c: DopedCircuit, X: SubsystemMask, Y: SubsystemMask, **kwargs: object
) -> float:
    """OTOC ``Omega_XY(U)``; see :func:`estimate_otoc` for the options."""
    return estimate_otoc(c, X, Y, **kwargs).value  # type: ignore[arg-type]


def scrambling_otoc_reference(x_size: int, y_size: int) -> float:
    """OTOC plateau of a scrambler: ``4**-|X| + 4**-|Y| - 4**-(|X|+|Y|)``."""
    return 4.0 ** -x_size + 4.0 ** -y_size - 4.0 ** -(x_size + y_size)


@dataclass(frozen=True)
class ScramblingReport:
    """Outcome of a scrambling test between input A and output D.

    ``mutual_information_bits`` is the Renyi-2 estimate ``-log2(Omega_AD)`` of
    I(R:DB'), which equals ``2|A|`` for a perfect scrambler;
    ``mutual_information`` is the same quantity in units where that maximum
    is ``|A|``.
    """

    is_scrambler: bool
    otoc: float
    stderr: float
    reference: float
    deviation: float
    tolerance: float
    mutual_information_bits: float
    mutual_information: float
    epsilon: float

    def __bool__(self) -> bool:
        return self.is_scrambler


def is_scrambler(
    c: DopedCircuit,
    A: SubsystemMask,
    D: SubsystemMask,
    tolerance: float = 0.05,
    **kwargs: object,
) -> ScramblingReport:
    """Compare ``Omega_AD`` with the scrambling plateau.

    Args:
        c: Circuit under test
        A: Input subsystem
        D: Output subsystem
        tolerance: Allowed absolute deviation from the plateau
        **kwargs: Forwarded to :func:`estimate_otoc`

    Returns:
        ScramblingReport; truthy when the circuit scrambles A into D
    """
    estimate = estimate_otoc(c, A, D, **kwargs)  # type: ignore[arg-type]
    reference = scrambling_otoc_reference(A.size, D.size)
    deviation = abs(estimate.value - reference)
    bits = -math.log2(estimate.value)
    report = ScramblingReport(
        is_scrambler=deviation <= tolerance,
        otoc=estimate.value,
        stderr=estimate.stderr,
        reference=reference,
        deviation=deviation,
        tolerance=tolerance,
        mutual_information_bits=bits,
        mutual_information=bits / 2,
        epsilon=A.size - bits / 2,
    )
    logger.debug("Scrambling report for |A|=%d |D|=%d: %s", A.size, D.size, report)
    return report


def _local_gates(tableau: CliffordTableau, qubits: Sequence[int]) -> List[Gate]:
    return [Gate(g.name, tuple(qubits[q] for q in g.qubits)) for g in to_gates(tableau)]


def brickwork(n: int, depth: int, rng: np.random.Generator) -> List[List[Gate]]:
    """Layers of uniformly random two-qubit Cliffords on alternating bonds."""
    layers: List[List[Gate]] = []
    for layer in range(depth):
        gates: List[Gate] = []
        if n == 1:
            gates.extend(_local_gates(sample_uniform(1, rng), [0]))
        for a in range(layer % 2, n - 1, 2):
            gates.extend(_local_gates(sample_uniform(2, rng), [a, a + 1]))
        layers.append(gates)
    return layers


@register_ensemble("generic")
def sample_generic(
    n: int, t: int, depth: int, rng: np.random.Generator, readout: SubsystemMask
) -> DopedCircuit:
    """Brickwork Clifford circuit with ``t`` T gates at random layer boundaries."""
    layers = brickwork(n, depth, rng)
    boundaries = rng.integers(0, depth + 1, size=t)
    qubits = rng.integers(0, n, size=t)
    gates: List[Gate] = []
    for boundary in range(depth + 1):
        for k in range(t):
            if boundaries[k] == boundary:
                gates.append(Gate("T", (int(qubits[k]),)))
        if boundary < depth:
            gates.extend(layers[boundary])
    return DopedCircuit(n, tuple(gates))


@register_ensemble("simplified")
def sample_simplified(
    n: int, t: int, depth: int, rng: np.random.Generator, readout: SubsystemMask
) -> DopedCircuit:
    """Scrambler followed by T-doped qubits in D and local Cliffords on D and C.

    The circuit is ``(A_D x A_C) W C0'`` where ``W`` applies ``T`` and ``H T H``
    to each of ``t/2`` distinct qubits of D. The preserved group of D is then
    the A_D image of the Paulis avoiding those qubits, a hyperbolic group of
    rank ``2|D| - t``.

    Raises:
        StructuralError: If ``t`` is odd or exceeds ``2|D|``
    """
    if t % 2:
        raise StructuralError(f"Simplified ensemble needs an even T count, got {t}")
    if t // 2 > readout.size:
        raise StructuralError(
            f"Cannot place {t // 2} doped qubits in |D|={readout.size}"
        )
    gates = [g for layer in brickwork(n, depth, rng) for g in layer]
    hosts: List[int] = []
    if t:
        picked = rng.choice(readout.qubits, size=t // 2, replace=False)
        hosts = sorted(int(q) for q in picked)
    for q in hosts:
        gates += [Gate("T", (q,)), Gate("H", (q,)), Gate("T", (q,)), Gate("H", (q,))]
    complement = readout.complement()
    for mask in (readout, complement):
        if mask.size:
            gates += _local_gates(sample_uniform(mask.size, rng), mask.qubits)
    return DopedCircuit(n, tuple(gates))


def sample_doped_circuit(
    n: int,
    t: int,
    ensemble: str,
    depth: Optional[int],
    rng: np.random.Generator,
    readout: Optional[SubsystemMask] = None,
) -> DopedCircuit:
    """Sample a circuit from a registered ensemble.

    Args:
        n: Number of qubits
        t: Number of T gates
        ensemble: Registered ensemble name (``generic`` or ``simplified``)
        depth: Brickwork depth, ``3n`` when None
        rng: Random generator
        readout: Subsystem D; the last ``n // 2`` qubits when None

    Returns:
        Sampled circuit

    Raises:
        ValidationError: If the sizes are invalid
        SizeLimitError: If ``t`` exceeds the configured maximum
        StructuralError: If the ensemble cannot realize the parameters
    """
    if n < 1 or t < 0:
        raise ValidationError(f"Invalid circuit size n={n}, t={t}")
    if t > get_max_t():
        raise SizeLimitError(f"t={t} exceeds the supported maximum {get_max_t()}")
    depth = 3 * n if depth is None else depth
    if depth < 0:
        raise ValidationError(f"Depth must be non-negative, got {depth}")
    readout = SubsystemMask.last(n, max(1, n // 2)) if readout is None else readout
    _check_same_n(n, readout.n, "mask")
    sampler: CircuitEnsemble = get_ensemble(ensemble)
    circuit = sampler(n, t, depth, rng, readout)
    logger.debug(
        "Sampled %s circuit n=%d t=%d with %d gates", ensemble, n, t, len(circuit.gates)
    )
    return circuit
