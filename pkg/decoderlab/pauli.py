"""Binary symplectic Pauli strings, subsystem masks and Pauli subgroups.

A :class:`PauliString` on ``n`` qubits is stored as two packed integers
``x`` and ``z`` (bit ``j`` belongs to qubit ``j``) plus a phase exponent
``k`` so that the operator is ``i**k`` times the tensor product of the
Hermitian letters ``I, X, Y, Z``. All group operations are word-parallel
bit manipulations on these integers.
"""

import logging
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core.exceptions import DimensionError, ValidationError

logger = logging.getLogger(__name__)

_LITERAL = re.compile(r"^(\+i|-i|\+|-)?([IXYZ]*)$")
_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}


def popcount(value: int) -> int:
    return bin(value).count("1")


def _deposit(bits: int, qubits: Sequence[int]) -> int:
    out = 0
    for i, q in enumerate(qubits):
        if (bits >> i) & 1:
            out |= 1 << q
    return out


def _extract(bits: int, qubits: Sequence[int]) -> int:
    out = 0
    for i, q in enumerate(qubits):
        if (bits >> q) & 1:
            out |= 1 << i
    return out


def symplectic_form(a: int, b: int, n: int) -> int:
    """Symplectic inner product of two packed ``(x << n) | z`` vectors."""
    mask = (1 << n) - 1
    return popcount(((a >> n) & b & mask) ^ (a & mask & (b >> n))) & 1


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit Pauli string ``i**phase * P(x, z)``.

    Equality compares the symplectic part and the phase. Use
    :meth:`equals_up_to_phase` or :attr:`key` for unsigned comparisons.
    """

    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValidationError(f"Qubit count must be non-negative, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValidationError(
                f"Bit masks x={self.x:#x}, z={self.z:#x} exceed {self.n} qubits"
            )
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str, phase: int = 0) -> "PauliString":
        """Build a weight-one Pauli string.

        Args:
            n: Number of qubits
            qubit: Qubit carrying the letter
            letter: One of ``I``, ``X``, ``Y``, ``Z``
            phase: Phase exponent of ``i``

        Returns:
            PauliString with ``letter`` on ``qubit``

        Raises:
            ValidationError: If the qubit or letter is invalid
        """
        if not 0 <= qubit < n:
            raise ValidationError(f"Qubit {qubit} out of range for {n} qubits")
        if letter not in "IXYZ" or len(letter) != 1:
            raise ValidationError(f"Unknown Pauli letter {letter!r}")
        bit = 1 << qubit
        x = bit if letter in "XY" else 0
        z = bit if letter in "ZY" else 0
        return cls(n, x, z, phase)

    @classmethod
    def from_literal(cls, literal: str) -> "PauliString":
        """Parse a Pauli literal such as ``"-iXYZI"``.

        Args:
            literal: Optional sign prefix followed by one letter per qubit

        Returns:
            Parsed PauliString

        Raises:
            ValidationError: If the literal is malformed
        """
        match = _LITERAL.match(literal.strip())
        if match is None:
            raise ValidationError(f"Malformed Pauli literal: {literal!r}")
        prefix, letters = match.groups()
        phase = {None: 0, "+": 0, "+i": 1, "-": 2, "-i": 3}[prefix]
        x = z = 0
        for j, letter in enumerate(letters):
            if letter in "XY":
                x |= 1 << j
            if letter in "ZY":
                z |= 1 << j
        return cls(len(letters), x, z, phase)

    @classmethod
    def from_bits(
        cls, x_bits: Sequence[int], z_bits: Sequence[int], phase: int = 0
    ) -> "PauliString":
        if len(x_bits) != len(z_bits):
            raise ValidationError("x and z bit vectors must have equal length")
        x = sum(1 << j for j, b in enumerate(x_bits) if b)
        z = sum(1 << j for j, b in enumerate(z_bits) if b)
        return cls(len(x_bits), x, z, phase)

    @classmethod
    def from_vector(cls, n: int, vector: int, phase: int = 0) -> "PauliString":
        mask = (1 << n) - 1
        return cls(n, (vector >> n) & mask, vector & mask, phase)

    @property
    def x_bits(self) -> np.ndarray:
        return np.array([(self.x >> j) & 1 for j in range(self.n)], dtype=np.uint8)

    @property
    def z_bits(self) -> np.ndarray:
        return np.array([(self.z >> j) & 1 for j in range(self.n)], dtype=np.uint8)

    @property
    def vector(self) -> int:
        """Packed symplectic vector ``(x << n) | z``."""
        return (self.x << self.n) | self.z

    @property
    def key(self) -> Tuple[int, int]:
        """Unsigned symplectic part."""
        return (self.x, self.z)

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return popcount(self.support)

    @property
    def y_count(self) -> int:
        return popcount(self.x & self.z)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        if not self.is_hermitian:
            raise ValidationError(f"{self} is not Hermitian and has no sign")
        return 1 if self.phase == 0 else -1

    def letter(self, qubit: int) -> str:
        bx = (self.x >> qubit) & 1
        bz = (self.z >> qubit) & 1
        return "IXZY"[bx + 2 * bz]

    def to_literal(self) -> str:
        letters = "".join(self.letter(j) for j in range(self.n))
        return _PREFIX[self.phase] + letters

    def __str__(self) -> str:
        return self.to_literal()

    def unsigned(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, 0)

    def times_i(self, k: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + k)

    def __neg__(self) -> "PauliString":
        return self.times_i(2)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def equals_up_to_phase(self, other: "PauliString") -> bool:
        return self.n == other.n and self.key == other.key

    def is_trivial_on(self, mask: "SubsystemMask") -> bool:
        """Whether every letter inside ``mask`` is the identity."""
        _check_same_n(self.n, mask.n, "mask")
        return self.support & mask.bits == 0

    def is_supported_on(self, mask: "SubsystemMask") -> bool:
        _check_same_n(self.n, mask.n, "mask")
        return self.support & ~mask.bits == 0

    def embed(self, qubits: Sequence[int], n: int) -> "PauliString":
        """Place qubit ``j`` of this string on ``qubits[j]`` of an n-qubit register."""
        if len(qubits) != self.n:
            raise DimensionError(len(qubits), self.n, "Pauli string")
        x, z = _deposit(self.x, qubits), _deposit(self.z, qubits)
        return PauliString(n, x, z, self.phase)

    def extract(self, qubits: Sequence[int]) -> "PauliString":
        """Restrict to ``qubits``, keeping the phase and dropping other letters."""
        return PauliString(
            len(qubits), _extract(self.x, qubits), _extract(self.z, qubits), self.phase
        )


def _check_same_n(expected: int, actual: int, what: str = "operand") -> None:
    if expected != actual:
        raise DimensionError(expected, actual, what)


def _product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    # Phase exponent of sigma(x1, z1) * sigma(x2, z2) with Hermitian letters.
    y1, xo1, zo1 = x1 & z1, x1 & ~z1, z1 & ~x1
    y2, xo2, zo2 = x2 & z2, x2 & ~z2, z2 & ~x2
    plus = popcount(y1 & zo2) + popcount(xo1 & y2) + popcount(zo1 & xo2)
    minus = popcount(y1 & xo2) + popcount(xo1 & zo2) + popcount(zo1 & y2)
    return plus - minus


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Group product ``p * q`` with exact phase.

    Args:
        p: Left factor
        q: Right factor

    Returns:
        Product Pauli string

    Raises:
        DimensionError: If the qubit counts differ
    """
    _check_same_n(p.n, q.n)
    phase = p.phase + q.phase + _product_phase(p.x, p.z, q.x, q.z)
    return PauliString(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def symplectic_product(p: PauliString, q: PauliString) -> int:
    """Symplectic form ``x_p . z_q + z_p . x_q`` over GF(2)."""
    _check_same_n(p.n, q.n)
    return popcount((p.x & q.z) ^ (p.z & q.x)) & 1


def commutes(p: PauliString, q: PauliString) -> bool:
    """Whether ``p`` and ``q`` commute.

    Raises:
        DimensionError: If the qubit counts differ
    """
    return symplectic_product(p, q) == 0


def complex_conjugate(p: PauliString) -> PauliString:
    """Entrywise complex conjugate in the computational basis."""
    return PauliString(p.n, p.x, p.z, -p.phase + 2 * p.y_count)


@dataclass(frozen=True)
class SubsystemMask:
    """Subset of the qubits of an n-qubit register."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 0 or not 0 <= self.bits < (1 << self.n):
            raise ValidationError(f"Mask {self.bits:#x} invalid for {self.n} qubits")

    @classmethod
    def from_qubits(cls, n: int, qubits: Sequence[int]) -> "SubsystemMask":
        bits = 0
        for q in qubits:
            if not 0 <= q < n:
                raise ValidationError(f"Qubit {q} out of range for {n} qubits")
            bits |= 1 << q
        return cls(n, bits)

    @classmethod
    def first(cls, n: int, size: int) -> "SubsystemMask":
        if not 0 <= size <= n:
            raise ValidationError(f"Cannot select {size} of {n} qubits")
        return cls(n, (1 << size) - 1)

    @classmethod
    def last(cls, n: int, size: int) -> "SubsystemMask":
        if not 0 <= size <= n:
            raise ValidationError(f"Cannot select {size} of {n} qubits")
        return cls(n, ((1 << size) - 1) << (n - size))

    @property
    def size(self) -> int:
        return popcount(self.bits)

    def __len__(self) -> int:
        return self.size

    @property
    def qubits(self) -> Tuple[int, ...]:
        return tuple(q for q in range(self.n) if (self.bits >> q) & 1)

    @property
    def member_bits(self) -> np.ndarray:
        return np.array([(self.bits >> q) & 1 for q in range(self.n)], dtype=np.uint8)

    def __contains__(self, qubit: object) -> bool:
        if not isinstance(qubit, int) or not 0 <= qubit < self.n:
            return False
        return bool((self.bits >> qubit) & 1)

    def complement(self) -> "SubsystemMask":
        return SubsystemMask(self.n, ((1 << self.n) - 1) & ~self.bits)

    def union(self, other: "SubsystemMask") -> "SubsystemMask":
        _check_same_n(self.n, other.n, "mask")
        return SubsystemMask(self.n, self.bits | other.bits)

    def intersection(self, other: "SubsystemMask") -> "SubsystemMask":
        _check_same_n(self.n, other.n, "mask")
        return SubsystemMask(self.n, self.bits & other.bits)

    def difference(self, other: "SubsystemMask") -> "SubsystemMask":
        _check_same_n(self.n, other.n, "mask")
        return SubsystemMask(self.n, self.bits & ~other.bits)

    def is_subset(self, other: "SubsystemMask") -> bool:
        _check_same_n(self.n, other.n, "mask")
        return self.bits & ~other.bits == 0

    def is_disjoint(self, other: "SubsystemMask") -> bool:
        _check_same_n(self.n, other.n, "mask")
        return self.bits & other.bits == 0

    def __str__(self) -> str:
        return "{" + ",".join(str(q) for q in self.qubits) + "}"


def enumerate_paulis(
    mask: SubsystemMask, include_identity: bool = True
) -> Iterator[PauliString]:
    """Yield the unsigned Pauli strings supported on ``mask``.

    The order is fixed: the ``x`` part varies slowest.
    """
    qubits = mask.qubits
    k = len(qubits)
    for xs in range(1 << k):
        x = _deposit(xs, qubits)
        for zs in range(1 << k):
            if not include_identity and xs == 0 and zs == 0:
                continue
            yield PauliString(mask.n, x, _deposit(zs, qubits))


def random_pauli(
    mask: SubsystemMask, rng: np.random.Generator, include_identity: bool = True
) -> PauliString:
    """Draw a uniformly random unsigned Pauli string supported on ``mask``."""
    qubits = mask.qubits
    k = len(qubits)
    while True:
        bits = int(rng.integers(0, 1 << (2 * k))) if k else 0
        xs, zs = bits >> k, bits & ((1 << k) - 1)
        if include_identity or bits:
            return PauliString(mask.n, _deposit(xs, qubits), _deposit(zs, qubits))
        if k == 0:
            raise ValidationError("Empty mask has no non-identity Pauli strings")


class _Row(NamedTuple):
    vector: int
    source: PauliString
    image: Optional[PauliString]


class PauliSubgroup:
    """Unsigned Pauli subgroup held as an incremental echelon basis.

    Each generator may carry an image Pauli string. Images are multiplied
    alongside the reduction so members can be mapped to their signed image.
    """

    def __init__(self, n: int):
        self.n = n
        self._rows: Dict[int, _Row] = {}
        self._generators: List[PauliString] = []
        self._images: List[Optional[PauliString]] = []

    @property
    def generators(self) -> Tuple[PauliString, ...]:
        return tuple(self._generators)

    @property
    def images(self) -> Tuple[Optional[PauliString], ...]:
        return tuple(self._images)

    @property
    def rank(self) -> int:
        return len(self._generators)

    @property
    def size(self) -> int:
        return 1 << self.rank

    def _reduce(self, p: PauliString) -> Tuple[int, PauliString, Optional[PauliString]]:
        _check_same_n(self.n, p.n)
        vector = p.vector
        source = PauliString.identity(self.n)
        image: Optional[PauliString] = PauliString.identity(self.n)
        while vector:
            row = self._rows.get(vector.bit_length() - 1)
            if row is None:
                break
            vector ^= row.vector
            source = source * row.source
            if image is not None and row.image is not None:
                image = image * row.image
            else:
                image = None
        return vector, source, image

    def add(self, p: PauliString, image: Optional[PauliString] = None) -> bool:
        """Add ``p`` as a generator unless it is already a member.

        Args:
            p: Candidate generator
            image: Optional signed image carried with the generator

        Returns:
            True if the rank grew
        """
        vector, source, accumulated = self._reduce(p)
        if vector == 0:
            return False
        row_image = None
        if image is not None and accumulated is not None:
            row_image = image * accumulated
        self._rows[vector.bit_length() - 1] = _Row(vector, p * source, row_image)
        self._generators.append(p)
        self._images.append(image)
        return True

    def contains(self, p: PauliString) -> bool:
        return self._reduce(p)[0] == 0

    def __contains__(self, p: object) -> bool:
        return isinstance(p, PauliString) and self.contains(p)

    def image_of(self, p: PauliString) -> PauliString:
        """Signed image of a member, obtained from the generator images.

        Raises:
            ValidationError: If ``p`` is not a member or images are missing
        """
        vector, source, image = self._reduce(p)
        if vector:
            raise ValidationError(f"{p} is not in the subgroup")
        if image is None:
            raise ValidationError("Subgroup generators carry no images")
        return image.times_i(p.phase - source.phase)

    def elements(self) -> Iterator[PauliString]:
        """Yield every member as a Hermitian string with phase zero."""
        rows = list(self._rows.values())
        for subset in range(1 << len(rows)):
            acc = PauliString.identity(self.n)
            for i, row in enumerate(rows):
                if (subset >> i) & 1:
                    acc = acc * row.source
            yield acc.unsigned()


def subgroup_close(gens: Sequence[PauliString]) -> PauliSubgroup:
    """Reduce generators to an independent set spanning the same group.

    Args:
        gens: Pauli strings sharing one qubit count

    Returns:
        PauliSubgroup whose generators are the independent inputs in order

    Raises:
        DimensionError: If the inputs have different qubit counts
    """
    if not gens:
        return PauliSubgroup(0)
    group = PauliSubgroup(gens[0].n)
    for g in gens:
        group.add(g)
    logger.debug("Closed %d generators to rank %d", len(gens), group.rank)
    return group


Tagged = Tuple[PauliString, Optional[PauliString]]


class SymplecticDecomposition(NamedTuple):
    """Hyperbolic pairs and radical of a Pauli group, with optional images."""

    pairs: Tuple[Tuple[Tagged, Tagged], ...]
    radical: Tuple[Tagged, ...]


def _times(a: Tagged, b: Tagged) -> Tagged:
    src = a[0] * b[0]
    img = a[1] * b[1] if a[1] is not None and b[1] is not None else None
    shift = -src.phase
    return src.times_i(shift), img.times_i(shift) if img is not None else None


def symplectic_gram_schmidt(
    gens: Sequence[PauliString],
    images: Optional[Sequence[Optional[PauliString]]] = None,
) -> SymplecticDecomposition:
    """Split a Pauli group into hyperbolic pairs and an isotropic radical.

    Pairs are chosen greedily: each remaining element is matched with the
    first later element it anticommutes with. Products are carried with
    exact phases on both the sources and the optional images, and every
    source is rescaled to phase zero.

    Args:
        gens: Generators of the group
        images: Optional images, one per generator

    Returns:
        SymplecticDecomposition of the group
    """
    if images is not None and len(images) != len(gens):
        raise ValidationError("images must match gens one to one")
    work: List[Tagged] = []
    for i, g in enumerate(gens):
        img = images[i] if images is not None else None
        shift = -g.phase
        work.append((g.times_i(shift), img.times_i(shift) if img is not None else None))

    pairs: List[Tuple[Tagged, Tagged]] = []
    radical: List[Tagged] = []
    while work:
        a = work.pop(0)
        if a[0].is_identity:
            continue
        partner = next(
            (j for j, c in enumerate(work) if not commutes(a[0], c[0])), None
        )
        if partner is None:
            radical.append(a)
            continue
        b = work.pop(partner)
        pairs.append((a, b))
        reduced: List[Tagged] = []
        for c in work:
            wa = symplectic_product(c[0], a[0])
            wb = symplectic_product(c[0], b[0])
            if wb:
                c = _times(c, a)
            if wa:
                c = _times(c, b)
            if not c[0].is_identity:
                reduced.append(c)
        work = reduced

    if radical:
        span = PauliSubgroup(radical[0][0].n)
        radical = [c for c in radical if span.add(c[0])]
    return SymplecticDecomposition(tuple(pairs), tuple(radical))
