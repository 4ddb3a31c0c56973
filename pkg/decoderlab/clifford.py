"""Clifford unitaries as tableaux.

A :class:`CliffordTableau` stores the Heisenberg images ``U† X_i U`` and
``U† Z_i U`` of the 2n generators. ``compose(a, b)`` is the operator
product ``U_a U_b`` (``b`` acts first in time) and ``apply_gate(t, g)``
appends ``g`` after ``t`` in time.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core.exceptions import DimensionError, NotCompletableError, ValidationError
from .pauli import (
    PauliString,
    PauliSubgroup,
    SubsystemMask,
    commutes,
    complex_conjugate as pauli_complex_conjugate,
    symplectic_form,
    symplectic_gram_schmidt,
)

logger = logging.getLogger(__name__)

GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Y": 1, "Z": 1, "T": 1, "CX": 2, "SWAP": 2}
CLIFFORD_GATES = frozenset(GATE_ARITY) - {"T"}


@dataclass(frozen=True)
class Gate:
    """A named gate on one or two qubits."""

    name: str
    qubits: Tuple[int, ...]

    def __post_init__(self) -> None:
        arity = GATE_ARITY.get(self.name)
        if arity is None:
            raise ValidationError(f"Unknown gate: {self.name}")
        if len(self.qubits) != arity:
            raise ValidationError(
                f"Gate {self.name} takes {arity} qubit(s), got {self.qubits}"
            )
        if any(q < 0 for q in self.qubits) or len(set(self.qubits)) != arity:
            raise ValidationError(f"Invalid qubits for {self.name}: {self.qubits}")

    @classmethod
    def parse(cls, line: str) -> "Gate":
        """Parse one line of circuit text such as ``"CX 0 1"``.

        Raises:
            ValidationError: If the line is not a gate
        """
        tokens = line.split()
        if not tokens:
            raise ValidationError("Empty gate line")
        try:
            qubits = tuple(int(tok) for tok in tokens[1:])
        except ValueError:
            raise ValidationError(f"Malformed gate line: {line!r}")
        return cls(tokens[0].upper(), qubits)

    @property
    def is_clifford(self) -> bool:
        return self.name in CLIFFORD_GATES

    def __str__(self) -> str:
        return " ".join([self.name, *map(str, self.qubits)])


def _swap_bits(value: int, a: int, b: int) -> int:
    if ((value >> a) ^ (value >> b)) & 1:
        value ^= (1 << a) | (1 << b)
    return value


def gate_conjugate(p: PauliString, gate: Gate) -> PauliString:
    """Return ``G† p G`` for a Clifford gate ``G``, with exact phase.

    Raises:
        ValidationError: If the gate is not Clifford or out of range
    """
    if any(q >= p.n for q in gate.qubits):
        raise ValidationError(f"Gate {gate} out of range for {p.n} qubits")
    x, z, phase = p.x, p.z, p.phase
    name = gate.name
    if name == "CX":
        c, t = gate.qubits
        xc, zc = (x >> c) & 1, (z >> c) & 1
        xt, zt = (x >> t) & 1, (z >> t) & 1
        if xc and zt and xt == zc:
            phase += 2
        if xc:
            x ^= 1 << t
        if zt:
            z ^= 1 << c
        return PauliString(p.n, x, z, phase)
    if name == "SWAP":
        a, b = gate.qubits
        return PauliString(p.n, _swap_bits(x, a, b), _swap_bits(z, a, b), phase)

    (q,) = gate.qubits
    bit = 1 << q
    bx, bz = (x >> q) & 1, (z >> q) & 1
    if name == "H":
        if bx and bz:
            phase += 2
        if bx != bz:
            x ^= bit
            z ^= bit
    elif name == "S":
        if bx and not bz:
            phase += 2
        if bx:
            z ^= bit
    elif name == "X":
        phase += 2 * bz
    elif name == "Z":
        phase += 2 * bx
    elif name == "Y":
        phase += 2 * (bx ^ bz)
    else:
        raise ValidationError(f"{name} is not a Clifford gate")
    return PauliString(p.n, x, z, phase)


def dagger(gate: Gate) -> List[Gate]:
    """Gates implementing ``G†`` up to global phase."""
    if gate.name == "S":
        return [gate, gate, gate]
    return [gate]


@dataclass(frozen=True)
class CliffordTableau:
    """Clifford unitary stored as the images of ``X_0..X_{n-1}, Z_0..Z_{n-1}``."""

    n: int
    images: Tuple[PauliString, ...]
    gates: Optional[Tuple[Gate, ...]] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.images) != 2 * self.n:
            raise ValidationError(
                f"Expected {2 * self.n} images, got {len(self.images)}"
            )
        for img in self.images:
            if img.n != self.n:
                raise DimensionError(self.n, img.n, "image")

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        images = [PauliString.single(n, q, "X") for q in range(n)]
        images += [PauliString.single(n, q, "Z") for q in range(n)]
        return cls(n, tuple(images), ())

    def image_x(self, qubit: int) -> PauliString:
        return self.images[qubit]

    def image_z(self, qubit: int) -> PauliString:
        return self.images[self.n + qubit]

    def validate(self) -> None:
        """Check Hermitian images and the symplectic condition.

        Raises:
            ValidationError: If any check fails
        """
        n = self.n
        for k, img in enumerate(self.images):
            if not img.is_hermitian:
                raise ValidationError(f"Image {k} ({img}) is not Hermitian")
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                expected = j == i + n
                if commutes(self.images[i], self.images[j]) == expected:
                    raise ValidationError(
                        f"Images {i} and {j} violate the symplectic condition"
                    )

    def is_valid(self) -> bool:
        try:
            self.validate()
        except ValidationError:
            return False
        return True

    def is_identity(self) -> bool:
        return self == CliffordTableau.identity(self.n)

    def __str__(self) -> str:
        rows = [f"X{q} -> {self.images[q]}" for q in range(self.n)]
        rows += [f"Z{q} -> {self.images[self.n + q]}" for q in range(self.n)]
        return "\n".join(rows)


def _check_same_n(expected: int, actual: int, what: str = "operand") -> None:
    if expected != actual:
        raise DimensionError(expected, actual, what)


def _set_bits(value: int) -> Iterable[int]:
    while value:
        low = value & -value
        yield low.bit_length() - 1
        value ^= low


def conjugate(t: CliffordTableau, p: PauliString) -> PauliString:
    """Return ``U† p U`` with exact phase.

    Args:
        t: Tableau of U
        p: Pauli string on the same qubits

    Returns:
        Conjugated Pauli string

    Raises:
        DimensionError: If the qubit counts differ
    """
    _check_same_n(t.n, p.n)
    # sigma(x, z) = i**#Y * prod X_j**x_j * prod Z_j**z_j
    result = PauliString(t.n, 0, 0, p.phase + p.y_count)
    for j in _set_bits(p.x):
        result = result * t.images[j]
    for j in _set_bits(p.z):
        result = result * t.images[t.n + j]
    return result


def apply_gate(t: CliffordTableau, gate: Gate) -> CliffordTableau:
    """Tableau of ``G U``: the gate acts after ``t`` in time.

    Raises:
        ValidationError: If the gate is not Clifford or out of range
    """
    if not gate.is_clifford:
        raise ValidationError(f"{gate.name} is not a Clifford gate")
    if any(q >= t.n for q in gate.qubits):
        raise ValidationError(f"Gate {gate} out of range for {t.n} qubits")
    images = list(t.images)
    for q in gate.qubits:
        for index, letter in ((q, "X"), (t.n + q, "Z")):
            generator = PauliString.single(t.n, q, letter)
            images[index] = conjugate(t, gate_conjugate(generator, gate))
    provenance = t.gates + (gate,) if t.gates is not None else None
    return CliffordTableau(t.n, tuple(images), provenance)


def from_gates(n: int, gates: Iterable[Gate]) -> CliffordTableau:
    """Fold a time-ordered Clifford circuit into a tableau."""
    tableau = CliffordTableau.identity(n)
    for gate in gates:
        tableau = apply_gate(tableau, gate)
    return tableau


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau of the operator product ``U_a U_b``.

    Raises:
        DimensionError: If the qubit counts differ
    """
    _check_same_n(a.n, b.n)
    images = tuple(conjugate(b, img) for img in a.images)
    provenance = None
    if a.gates is not None and b.gates is not None:
        provenance = b.gates + a.gates
    return CliffordTableau(a.n, images, provenance)


def inverse(t: CliffordTableau) -> CliffordTableau:
    """Tableau of ``U†``."""
    n = t.n
    generators = CliffordTableau.identity(n).images
    images = []
    for e in generators:
        x = z = 0
        for j in range(n):
            if not commutes(e, t.images[n + j]):
                x |= 1 << j
            if not commutes(e, t.images[j]):
                z |= 1 << j
        candidate = PauliString(n, x, z)
        images.append(candidate.times_i(-conjugate(t, candidate).phase))
    provenance = None
    if t.gates is not None:
        provenance = tuple(g for gate in reversed(t.gates) for g in dagger(gate))
    return CliffordTableau(n, tuple(images), provenance)


def complex_conjugate(t: CliffordTableau) -> CliffordTableau:
    """Tableau of ``U*``, the entrywise complex conjugate in the computational basis."""
    images = tuple(pauli_complex_conjugate(img) for img in t.images)
    provenance = None
    if t.gates is not None:
        provenance = tuple(
            g
            for gate in t.gates
            for g in (dagger(gate) if gate.name == "S" else [gate])
        )
    return CliffordTableau(t.n, images, provenance)


def transpose(t: CliffordTableau) -> CliffordTableau:
    """Tableau of ``U^T = (U*)†``."""
    return inverse(complex_conjugate(t))


def embed(t: CliffordTableau, qubits: Sequence[int], n: int) -> CliffordTableau:
    """Act with ``t`` on ``qubits`` of an n-qubit register and trivially elsewhere."""
    if len(qubits) != t.n:
        raise DimensionError(t.n, len(qubits), "qubit list")
    images = list(CliffordTableau.identity(n).images)
    for j, q in enumerate(qubits):
        images[q] = t.images[j].embed(qubits, n)
        images[n + q] = t.images[t.n + j].embed(qubits, n)
    provenance = None
    if t.gates is not None:
        provenance = tuple(
            Gate(g.name, tuple(qubits[q] for q in g.qubits)) for g in t.gates
        )
    return CliffordTableau(n, tuple(images), provenance)


def to_gates(t: CliffordTableau) -> List[Gate]:
    """Synthesize an H/S/CX/SWAP circuit followed by a Pauli layer.

    The tableau is reduced column by column: gates are multiplied on the
    right until ``U G_1 ... G_k`` is a Pauli operator. The returned circuit
    is time ordered and reproduces ``t`` exactly, signs included.

    Raises:
        ValidationError: If the tableau is not a valid Clifford
    """
    t.validate()
    n = t.n
    work = list(t.images)
    applied: List[Gate] = []

    def push(name: str, *qubits: int) -> None:
        gate = Gate(name, qubits)
        applied.append(gate)
        for k in range(2 * n):
            work[k] = gate_conjugate(work[k], gate)

    for i in range(n):
        for q in range(i, n):
            letter = work[i].letter(q)
            if letter == "Z":
                push("H", q)
            elif letter == "Y":
                push("S", q)
        if not (work[i].x >> i) & 1:
            above = work[i].x >> (i + 1)
            push("SWAP", i, i + 1 + ((above & -above).bit_length() - 1))
        for q in range(i + 1, n):
            if (work[i].x >> q) & 1:
                push("CX", i, q)

        if work[n + i].letter(i) == "Y":
            push("H", i)
            push("S", i)
            push("H", i)
        for q in range(i + 1, n):
            letter = work[n + i].letter(q)
            if letter == "X":
                push("H", q)
            elif letter == "Y":
                push("S", q)
                push("H", q)
        for q in range(i + 1, n):
            if (work[n + i].z >> q) & 1:
                push("CX", q, i)

    circuit = [g for gate in applied for g in dagger(gate)]
    for q in range(n):
        flip_x = work[q].phase == 2
        flip_z = work[n + q].phase == 2
        if flip_x and flip_z:
            circuit.append(Gate("Y", (q,)))
        elif flip_x:
            circuit.append(Gate("Z", (q,)))
        elif flip_z:
            circuit.append(Gate("X", (q,)))
    return circuit


def _random_combination(spanning: Sequence[int], rng: np.random.Generator) -> int:
    choice = rng.integers(0, 2, size=len(spanning))
    value = 0
    for vector, bit in zip(spanning, choice):
        if bit:
            value ^= vector
    return value


def sample_uniform(n: int, rng: np.random.Generator) -> CliffordTableau:
    """Draw a Clifford uniformly from the n-qubit Clifford group.

    Symplectic basis vectors are chosen one hyperbolic pair at a time:
    ``v`` uniformly among non-zero vectors of the current complement, ``w``
    uniformly among complement vectors with ``<v, w> = 1``. Every free
    choice is counted exactly, then independent random signs are applied.

    Args:
        n: Number of qubits
        rng: Random generator

    Returns:
        Uniformly random tableau

    Raises:
        ValidationError: If ``n < 1``
    """
    if n < 1:
        raise ValidationError(f"Cannot sample a Clifford on {n} qubits")
    spanning = [1 << k for k in range(2 * n)]
    xs: List[int] = []
    zs: List[int] = []
    for _ in range(n):
        v = 0
        while v == 0:
            v = _random_combination(spanning, rng)
        while True:
            w = _random_combination(spanning, rng)
            if symplectic_form(v, w, n):
                break
        spanning = [
            u
            ^ (v if symplectic_form(u, w, n) else 0)
            ^ (w if symplectic_form(u, v, n) else 0)
            for u in spanning
        ]
        spanning = [u for u in spanning if u]
        xs.append(v)
        zs.append(w)
    signs = rng.integers(0, 2, size=2 * n)
    images = tuple(
        PauliString.from_vector(n, vector, 2 * int(signs[k]))
        for k, vector in enumerate(xs + zs)
    )
    return CliffordTableau(n, images)


def sample_uniform_on(mask: SubsystemMask, rng: np.random.Generator) -> CliffordTableau:
    """Uniform Clifford on the qubits of ``mask``, identity elsewhere."""
    if mask.size == 0:
        return CliffordTableau.identity(mask.n)
    return embed(sample_uniform(mask.size, rng), mask.qubits, mask.n)


@dataclass(frozen=True)
class PartialPauliMap:
    """Pauli-to-Pauli assignments ``source -> target`` to be extended to a Clifford."""

    n: int
    pairs: Tuple[Tuple[PauliString, PauliString], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple((s, t) for s, t in self.pairs))
        for source, target in self.pairs:
            _check_same_n(self.n, source.n, "source")
            _check_same_n(self.n, target.n, "target")

    @property
    def sources(self) -> Tuple[PauliString, ...]:
        return tuple(s for s, _ in self.pairs)

    @property
    def targets(self) -> Tuple[PauliString, ...]:
        return tuple(t for _, t in self.pairs)


def _project_out(
    vectors: Iterable[int], pairs: Sequence[Tuple[PauliString, PauliString]], n: int
) -> List[int]:
    projected = []
    for u in vectors:
        for a, b in pairs:
            av, bv = a.vector, b.vector
            wa, wb = symplectic_form(u, av, n), symplectic_form(u, bv, n)
            if wb:
                u ^= av
            if wa:
                u ^= bv
        if u:
            projected.append(u)
    return projected


def _solve_gf2(rows: List[int], ncols: int) -> Optional[int]:
    # Each row holds coefficient bits 0..ncols-1 and the right-hand side at bit ncols.
    rows = list(rows)
    pivots: List[Tuple[int, int]] = []
    r = 0
    for col in range(ncols):
        hit = next((i for i in range(r, len(rows)) if (rows[i] >> col) & 1), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> col) & 1:
                rows[i] ^= rows[r]
        pivots.append((r, col))
        r += 1
    if any(row == 1 << ncols for row in rows[r:]):
        return None
    solution = 0
    for row_index, col in pivots:
        if (rows[row_index] >> ncols) & 1:
            solution |= 1 << col
    return solution


def _extend_symplectic_basis(
    n: int,
    pairs: Sequence[Tuple[PauliString, PauliString]],
    isotropic: Sequence[PauliString],
) -> List[Tuple[PauliString, PauliString]]:
    basis = list(pairs)
    standard = [1 << k for k in range(2 * n)]
    pending = list(isotropic)
    while pending:
        c = pending.pop(0)
        candidates = _project_out(standard, basis, n)
        constraints = [c.vector] + [p.vector for p in pending]
        rows = []
        for k, constraint in enumerate(constraints):
            row = 0
            for i, cand in enumerate(candidates):
                if symplectic_form(cand, constraint, n):
                    row |= 1 << i
            if k == 0:
                row |= 1 << len(candidates)
            rows.append(row)
        solution = _solve_gf2(rows, len(candidates))
        if solution is None:
            raise ValidationError(f"No symplectic partner exists for {c}")
        d = 0
        for i, cand in enumerate(candidates):
            if (solution >> i) & 1:
                d ^= cand
        basis.append((c, PauliString.from_vector(n, d)))
    remainder = [
        PauliString.from_vector(n, v) for v in _project_out(standard, basis, n)
    ]
    for a, b in symplectic_gram_schmidt(remainder).pairs:
        basis.append((a[0], b[0]))
    if len(basis) != n:
        raise ValidationError(
            f"Symplectic completion produced {len(basis)} of {n} pairs"
        )
    return basis


def _tableau_from_basis(
    n: int, basis: Sequence[Tuple[PauliString, PauliString]]
) -> CliffordTableau:
    images = tuple(a for a, _ in basis) + tuple(b for _, b in basis)
    return CliffordTableau(n, images)


def complete_to_clifford(m: PartialPauliMap) -> CliffordTableau:
    """Extend a commutation-preserving Pauli map to a full Clifford tableau.

    Sources and targets are split jointly into hyperbolic pairs and an
    isotropic radical, each side is completed to a symplectic basis, and the
    Clifford taking one basis to the other is returned. Signs are carried
    through every product, so the result reproduces each target exactly.

    Args:
        m: Partial map to extend

    Returns:
        Tableau T with ``conjugate(T, source) == target`` for every pair

    Raises:
        NotCompletableError: If the map breaks commutation, Hermiticity,
            independence or sign consistency; names the offending pair
    """
    n = m.n
    normalized: List[Tuple[int, PauliString, PauliString]] = []
    for i, (source, target) in enumerate(m.pairs):
        shift = -source.phase
        source, target = source.times_i(shift), target.times_i(shift)
        if source.is_identity:
            if target != source:
                raise NotCompletableError(f"Pair {i} maps the identity to {target}", i)
            continue
        if not target.is_hermitian:
            raise NotCompletableError(
                f"Pair {i} maps Hermitian {source} to non-Hermitian {target}", i
            )
        normalized.append((i, source, target))

    for a in range(len(normalized)):
        ia, sa, ta = normalized[a]
        for b in range(a + 1, len(normalized)):
            ib, sb, tb = normalized[b]
            if commutes(sa, sb) != commutes(ta, tb):
                raise NotCompletableError(
                    f"Pairs {ia} and {ib} do not preserve commutation: "
                    f"{sa}, {sb} -> {ta}, {tb}",
                    ia,
                    ib,
                )

    sources = PauliSubgroup(n)
    targets = PauliSubgroup(n)
    kept: List[Tuple[PauliString, PauliString]] = []
    for i, source, target in normalized:
        if sources.contains(source):
            implied = sources.image_of(source)
            if implied != target:
                raise NotCompletableError(
                    f"Pair {i} is a product of earlier sources but maps to {target}, "
                    f"expected {implied}",
                    i,
                )
            continue
        if targets.contains(target):
            raise NotCompletableError(
                f"Pair {i} has independent source {source} "
                f"but dependent target {target}",
                i,
            )
        sources.add(source, target)
        targets.add(target)
        kept.append((source, target))

    decomposition = symplectic_gram_schmidt([s for s, _ in kept], [t for _, t in kept])
    source_pairs = [(a[0], b[0]) for a, b in decomposition.pairs]
    target_pairs = [(a[1], b[1]) for a, b in decomposition.pairs]
    source_radical = [c[0] for c in decomposition.radical]
    target_radical = [c[1] for c in decomposition.radical]

    source_extended = _extend_symplectic_basis(n, source_pairs, source_radical)
    target_extended = _extend_symplectic_basis(n, target_pairs, target_radical)
    source_basis = _tableau_from_basis(n, source_extended)
    target_basis = _tableau_from_basis(n, target_extended)
    result = compose(inverse(source_basis), target_basis)

    for i, (source, target) in enumerate(m.pairs):
        actual = conjugate(result, source)
        if actual != target:
            raise NotCompletableError(
                f"Pair {i}: completed tableau maps {source} to {actual}, "
                f"expected {target}",
                i,
            )
    logger.debug(
        "Completed %d pairs on %d qubits (%d hyperbolic, %d isotropic)",
        len(m.pairs), n, len(source_pairs), len(source_radical),
    )
    return result
