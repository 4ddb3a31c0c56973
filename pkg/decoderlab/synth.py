"""Decoder synthesis: diagonalizer, randomizer and decrypter.

The assembled decoder is ``V = D R D† V'``. ``D`` sends the learned group
G_D onto the full Pauli group of a subsystem E of the readout. ``V'``
reproduces the scrambler's action on ``D P_E D†``. ``R`` is a uniformly
random Clifford on ``F u C`` that hides whatever ``V'`` gets wrong.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .clifford import (
    CliffordTableau,
    Gate,
    PartialPauliMap,
    complete_to_clifford,
    compose,
    conjugate,
    embed,
    from_gates,
    inverse,
    sample_uniform_on,
    to_gates,
)
from .core.exceptions import (
    DecrypterConditionError,
    DimensionError,
    StructuralError,
    ValidationError,
)
from .doped import DopedCircuit, is_preserved
from .learner import LearnedGroups
from .pauli import PauliString, SubsystemMask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecoderBundle:
    """The three decoder Cliffords with subsystem bookkeeping.

    Attributes:
        diagonalizer: Clifford D supported on the readout subsystem
        randomizer: Clifford R supported on ``F u C``
        decrypter: Clifford V' on all n qubits
        readout: Readout subsystem D
        e_mask: Subsystem E of D onto which G_D is diagonalized
        composite: ``D R D† V'``
        metadata: Seeds and sizes recorded at assembly
    """

    diagonalizer: CliffordTableau
    randomizer: CliffordTableau
    decrypter: CliffordTableau
    readout: SubsystemMask
    e_mask: SubsystemMask
    composite: CliffordTableau
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.decrypter.n

    @property
    def f_mask(self) -> SubsystemMask:
        return self.readout.difference(self.e_mask)

    @property
    def c_mask(self) -> SubsystemMask:
        return self.readout.complement()

    def with_randomizer(
        self, randomizer: CliffordTableau, **metadata: Any
    ) -> "DecoderBundle":
        """Same diagonalizer and decrypter with a different randomizer."""
        return assemble(
            self.diagonalizer,
            randomizer,
            self.decrypter,
            self.readout,
            self.e_mask,
            dict(self.metadata, **metadata),
        )


def _default_e(readout: SubsystemMask, size: int) -> SubsystemMask:
    return SubsystemMask.from_qubits(readout.n, readout.qubits[:size])


def build_diagonalizer(
    groups: LearnedGroups,
    e_choice: Optional[Union[SubsystemMask, Sequence[int]]] = None,
    require_hyperbolic: bool = True,
) -> Tuple[CliffordTableau, SubsystemMask]:
    """Clifford on D mapping the hyperbolic part of G_D onto P_E.

    Hyperbolic pairs ``(a_k, b_k)`` are sent to ``(X_{e_k}, Z_{e_k})`` and the
    map is completed on D. E defaults to the lowest-index qubits of D. A
    degenerate group is either rejected or truncated to its pairs.

    Args:
        groups: Learned groups
        e_choice: Qubits of D hosting E
        require_hyperbolic: Reject groups with a radical instead of truncating

    Returns:
        Tuple of the n-qubit diagonalizer tableau and the mask of E

    Raises:
        StructuralError: If the group is degenerate and ``require_hyperbolic``
        ValidationError: If ``e_choice`` is not a subset of D of size |E|
    """
    readout = groups.readout
    if groups.degenerate:
        message = (
            f"Learned group of rank {groups.rank} has a "
            f"{len(groups.radical)}-dimensional radical"
        )
        if require_hyperbolic:
            raise StructuralError(message)
        logger.warning("%s; diagonalizing %d hyperbolic pairs", message, groups.e_size)
    size = groups.e_size
    if e_choice is None:
        e_mask = _default_e(readout, size)
    elif isinstance(e_choice, SubsystemMask):
        e_mask = e_choice
    else:
        e_mask = SubsystemMask.from_qubits(readout.n, list(e_choice))
    if not e_mask.is_subset(readout) or e_mask.size != size:
        raise ValidationError(f"E={e_mask} must be {size} qubits inside D={readout}")

    local = readout.qubits
    e_local = [local.index(q) for q in e_mask.qubits]
    pairs = []
    for ((a, _), (b, _)), q in zip(groups.pairs, e_local):
        pairs.append((a.extract(local), PauliString.single(len(local), q, "X")))
        pairs.append((b.extract(local), PauliString.single(len(local), q, "Z")))
    tableau = complete_to_clifford(PartialPauliMap(len(local), tuple(pairs)))
    diagonalizer = embed(tableau, local, readout.n)
    logger.debug("Diagonalizer built with |E|=%d on D=%s", size, readout)
    return diagonalizer, e_mask


def canonical_generators(e_mask: SubsystemMask) -> List[PauliString]:
    """``X_q`` and ``Z_q`` for every qubit ``q`` of E."""
    out = []
    for q in e_mask.qubits:
        out.append(PauliString.single(e_mask.n, q, "X"))
        out.append(PauliString.single(e_mask.n, q, "Z"))
    return out


def build_decrypter(
    groups: LearnedGroups, diagonalizer: CliffordTableau, E: SubsystemMask
) -> CliffordTableau:
    """Clifford V' agreeing with the scrambler on ``D P_E D†`` and on the radical.

    Raises:
        StructuralError: If the diagonalizer does not map into the learned group
        NotCompletableError: If the learned images are inconsistent
    """
    undo = inverse(diagonalizer)
    pairs = []
    for generator in canonical_generators(E):
        source = conjugate(undo, generator)
        if not groups.group.contains(source):
            raise StructuralError(
                f"{source} = D {generator} D† is not in the learned group"
            )
        pairs.append((source, groups.image_of(source)))
    pairs.extend(groups.radical)
    return complete_to_clifford(PartialPauliMap(diagonalizer.n, tuple(pairs)))


def build_randomizer(
    n: int, F: SubsystemMask, C: SubsystemMask, rng: np.random.Generator
) -> CliffordTableau:
    """Uniform Clifford on ``F u C``; the identity when F is empty.

    Raises:
        ValidationError: If F and C overlap
    """
    if F.n != n or C.n != n:
        raise DimensionError(n, F.n if F.n != n else C.n, "mask")
    if not F.is_disjoint(C):
        raise ValidationError(f"F={F} and C={C} overlap")
    if F.size == 0:
        return CliffordTableau.identity(n)
    return sample_uniform_on(F.union(C), rng)


def assemble(
    diagonalizer: CliffordTableau,
    randomizer: CliffordTableau,
    decrypter: CliffordTableau,
    readout: SubsystemMask,
    e_mask: SubsystemMask,
    metadata: Optional[Dict[str, Any]] = None,
) -> DecoderBundle:
    """Bundle the components and form ``D R D† V'``.

    Raises:
        DimensionError: If the components act on different registers
    """
    n = decrypter.n
    for part in (diagonalizer, randomizer):
        if part.n != n:
            raise DimensionError(n, part.n, "decoder component")
    if readout.n != n or e_mask.n != n:
        raise DimensionError(n, readout.n, "mask")
    randomized = compose(compose(diagonalizer, randomizer), inverse(diagonalizer))
    composite = compose(randomized, decrypter)
    meta = dict(metadata or {})
    meta.setdefault("n", n)
    meta.setdefault("d_size", readout.size)
    meta.setdefault("e_size", e_mask.size)
    return DecoderBundle(
        diagonalizer, randomizer, decrypter, readout, e_mask, composite, meta
    )


def synthesize(
    groups: LearnedGroups,
    rng: np.random.Generator,
    e_choice: Optional[Union[SubsystemMask, Sequence[int]]] = None,
    metadata: Optional[Dict[str, Any]] = None,
    require_hyperbolic: bool = True,
) -> DecoderBundle:
    """Build and assemble all three components from learned groups."""
    diagonalizer, e_mask = build_diagonalizer(groups, e_choice, require_hyperbolic)
    decrypter = build_decrypter(groups, diagonalizer, e_mask)
    f_mask = groups.readout.difference(e_mask)
    c_mask = groups.readout.complement()
    randomizer = build_randomizer(decrypter.n, f_mask, c_mask, rng)
    return assemble(
        diagonalizer, randomizer, decrypter, groups.readout, e_mask, metadata
    )


def check_decrypter_condition(
    circuit: DopedCircuit, bundle: DecoderBundle, E: Optional[SubsystemMask] = None
) -> None:
    """Verify that V' and U act identically on every ``D X_q D†`` and ``D Z_q D†``.

    Args:
        circuit: Scrambler U
        bundle: Assembled decoder
        E: Qubits to check, the bundle's E when None

    Raises:
        DecrypterConditionError: Naming the first failing generator
    """
    undo = inverse(bundle.diagonalizer)
    for generator in canonical_generators(bundle.e_mask if E is None else E):
        source = conjugate(undo, generator)
        expected = is_preserved(circuit, source)
        if expected is None:
            raise DecrypterConditionError(
                str(generator), f"U† {source} U is not a Pauli string"
            )
        actual = conjugate(bundle.decrypter, source)
        if actual != expected:
            raise DecrypterConditionError(
                str(generator), f"decrypter gives {actual}, scrambler {expected}"
            )


_SECTIONS = ("diagonalizer", "randomizer", "decrypter")


def bundle_to_text(bundle: DecoderBundle) -> str:
    """Serialize as a JSON header line followed by three circuit sections."""
    header = {
        "n": bundle.n,
        "readout": list(bundle.readout.qubits),
        "e": list(bundle.e_mask.qubits),
        "metadata": bundle.metadata,
    }
    lines = ["# " + json.dumps(header, sort_keys=True)]
    for name in _SECTIONS:
        lines.append(f"[{name}]")
        lines.extend(str(g) for g in to_gates(getattr(bundle, name)))
    return "\n".join(lines) + "\n"


def bundle_from_text(text: str) -> DecoderBundle:
    """Inverse of :func:`bundle_to_text`.

    Raises:
        ValidationError: If the text is malformed
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("# "):
        raise ValidationError("Bundle text must start with a JSON header line")
    try:
        header = json.loads(lines[0][2:])
        n = int(header["n"])
    except (ValueError, KeyError) as e:
        raise ValidationError(f"Malformed bundle header: {str(e)}")
    sections: Dict[str, List[Gate]] = {}
    current: Optional[str] = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in _SECTIONS:
                raise ValidationError(f"Unknown bundle section: {current}")
            sections[current] = []
        elif current is None:
            raise ValidationError(f"Gate line outside a section: {line!r}")
        else:
            sections[current].append(Gate.parse(line))
    missing = [name for name in _SECTIONS if name not in sections]
    if missing:
        raise ValidationError(f"Bundle text lacks sections: {missing}")
    readout = SubsystemMask.from_qubits(n, header["readout"])
    e_mask = SubsystemMask.from_qubits(n, header["e"])
    parts = {name: from_gates(n, sections[name]) for name in _SECTIONS}
    return assemble(
        parts["diagonalizer"], parts["randomizer"], parts["decrypter"], readout, e_mask,
        header.get("metadata", {}),
    )


def save_bundle(bundle: DecoderBundle, path: Union[str, Path]) -> None:
    Path(path).write_text(bundle_to_text(bundle))


def load_bundle(path: Union[str, Path]) -> DecoderBundle:
    return bundle_from_text(Path(path).read_text())
