"""Dense state-vector reference for the decoding protocol.

The register is laid out as ``R | X | X' | R'``: ``R`` and ``R'`` hold ``|A|``
qubits each, ``X`` is the scrambler register (input ``A u B`` and output
``C u D`` on the same positions) and ``X'`` is its mirror (``A' u B'`` on
input, ``C' u D'`` on output). Amplitudes are stored as a tensor with one
axis per qubit; qubit 0 of every matrix is the most significant index.

Everything here is deliberately brute force and serves as ground truth.
"""

import logging
import math
from dataclasses import dataclass
from typing import (
    TYPE_CHECKING,
    Dict,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from scipy.linalg import eigvalsh

from .clifford import CliffordTableau, Gate, to_gates
from .core.config import get_dense_qubit_cap, get_marginal_qubit_cap
from .core.exceptions import (
    DimensionError,
    ImpossibleOutcomeError,
    SizeLimitError,
    ValidationError,
)
from .doped import DopedCircuit
from .pauli import PauliString, SubsystemMask, enumerate_paulis

if TYPE_CHECKING:
    from .synth import DecoderBundle

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_LETTER_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "X": _LETTER_MATRICES["X"],
    "Y": _LETTER_MATRICES["Y"],
    "Z": _LETTER_MATRICES["Z"],
    "CX": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
_EPR = np.eye(2, dtype=complex) / _SQRT2


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli string."""
    matrix = np.array([[1.0 + 0j]])
    for q in range(p.n):
        matrix = np.kron(matrix, _LETTER_MATRICES[p.letter(q)])
    return (1j ** p.phase) * matrix


def gate_matrix(gate: Gate) -> np.ndarray:
    return _GATE_MATRICES[gate.name]


def _apply(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def circuit_unitary(n: int, gates: Sequence[Gate]) -> np.ndarray:
    """Dense unitary of a time-ordered gate list.

    Raises:
        SizeLimitError: If ``n`` exceeds the dense qubit cap
    """
    if n > get_dense_qubit_cap():
        raise SizeLimitError(f"{n} qubits exceed the dense cap {get_dense_qubit_cap()}")
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for gate in gates:
        u = _apply(u, gate_matrix(gate), gate.qubits)
    return u.reshape(dim, dim)


def unitary_of(operator: Union[DopedCircuit, CliffordTableau]) -> np.ndarray:
    """Dense unitary of a circuit or, up to global phase, of a tableau."""
    if isinstance(operator, DopedCircuit):
        return circuit_unitary(operator.n, operator.gates)
    return circuit_unitary(operator.n, to_gates(operator))


def dense_conjugate(u: np.ndarray, p: PauliString) -> np.ndarray:
    """``U† P U`` as a dense matrix."""
    return u.conj().T @ pauli_matrix(p) @ u


def dense_otoc(u: np.ndarray, X: SubsystemMask, Y: SubsystemMask) -> float:
    """Brute-force OTOC averaged over every ``P_X`` and ``P_Y``."""
    dim = u.shape[0]
    total = 0.0
    count = 0
    x_matrices = [pauli_matrix(p) for p in enumerate_paulis(X)]
    for p_y in enumerate_paulis(Y):
        heisenberg = dense_conjugate(u, p_y)
        for p_x in x_matrices:
            total += np.trace(p_x @ heisenberg @ p_x @ heisenberg).real / dim
            count += 1
    return total / count


@dataclass
class DenseState:
    """Amplitude tensor of the ``R | X | X' | R'`` register.

    Attributes:
        amplitudes: Complex tensor with one length-2 axis per qubit
        n: Size of the scrambler register
        input_mask: Subsystem A of the scrambler input
        registers: Tensor axes of the blocks R, A, B, B', A', R'
    """

    amplitudes: np.ndarray
    n: int
    input_mask: SubsystemMask
    registers: Dict[str, Tuple[int, ...]]

    @property
    def qubit_count(self) -> int:
        return self.amplitudes.ndim

    @property
    def a_size(self) -> int:
        return self.input_mask.size

    def axes(self, name: str) -> Tuple[int, ...]:
        if name not in self.registers:
            raise ValidationError(f"Unknown register block: {name}")
        return self.registers[name]

    def x_axes(self, mask: SubsystemMask) -> Tuple[int, ...]:
        """Tensor axes of ``mask`` inside the scrambler register."""
        return tuple(self.a_size + q for q in mask.qubits)

    def mirror_axes(self, mask: SubsystemMask) -> Tuple[int, ...]:
        """Tensor axes of ``mask`` inside the mirrored register."""
        return tuple(self.a_size + self.n + q for q in mask.qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _layout(n: int, A: SubsystemMask) -> Dict[str, Tuple[int, ...]]:
    a = A.size
    B = A.complement()
    return {
        "R": tuple(range(a)),
        "A": tuple(a + q for q in A.qubits),
        "B": tuple(a + q for q in B.qubits),
        "B'": tuple(a + n + q for q in B.qubits),
        "A'": tuple(a + n + q for q in A.qubits),
        "R'": tuple(range(a + 2 * n, 2 * a + 2 * n)),
    }


def _product_state(
    count: int, pairs: Sequence[Tuple[int, int]], zeros: Sequence[int]
) -> np.ndarray:
    psi = np.array(1.0 + 0j)
    order: List[int] = []
    for first, second in pairs:
        psi = np.multiply.outer(psi, _EPR)
        order += [first, second]
    for axis in zeros:
        psi = np.multiply.outer(psi, np.array([1.0 + 0j, 0.0]))
        order.append(axis)
    if sorted(order) != list(range(count)):
        raise ValidationError("Register layout does not cover every qubit")
    return np.transpose(psi, np.argsort(order))


def build_scrambled_state(
    c: DopedCircuit, A: SubsystemMask, cap: Optional[int] = None
) -> DenseState:
    """Prepare ``U (|AR> |BB'>)`` with the decoder halves ``A'``, ``R'`` in ``|0>``.

    Raises:
        SizeLimitError: If ``2n + 2|A|`` exceeds the dense cap
    """
    if A.n != c.n:
        raise DimensionError(c.n, A.n, "mask")
    cap = get_dense_qubit_cap() if cap is None else cap
    count = 2 * c.n + 2 * A.size
    if count > cap:
        raise SizeLimitError(f"Dense state needs {count} qubits, above the cap {cap}")
    registers = _layout(c.n, A)
    pairs = list(zip(registers["R"], registers["A"]))
    pairs += list(zip(registers["B"], registers["B'"]))
    psi = _product_state(count, pairs, registers["A'"] + registers["R'"])
    x_axes = tuple(A.size + q for q in range(c.n))
    psi = _apply(psi, unitary_of(c), x_axes)
    logger.debug("Built scrambled state on %d qubits", count)
    return DenseState(psi, c.n, A, registers)


def _epr_contract(
    tensor: np.ndarray, first: Sequence[int], second: Sequence[int]
) -> Tuple[np.ndarray, List[int]]:
    # Project axes first[k], second[k] onto EPR pairs and drop them.
    k = len(first)
    moved = list(first) + list(second)
    remaining = [ax for ax in range(tensor.ndim) if ax not in moved]
    block = np.moveaxis(tensor, moved, list(range(2 * k)))
    block = block.reshape((1 << k, 1 << k) + block.shape[2 * k:])
    reduced = np.trace(block, axis1=0, axis2=1) / math.sqrt(1 << k)
    return reduced, remaining


def epr_overlap(
    state: Union[DenseState, np.ndarray], first: Sequence[int], second: Sequence[int]
) -> float:
    """``<psi| Pi |psi>`` for the EPR projector pairing ``first[k]`` with ``second[k]``.

    The projector is applied as a dense matrix, independently of the
    contraction used by :func:`decode_and_project`.
    """
    psi = state.amplitudes if isinstance(state, DenseState) else state
    if len(first) != len(second):
        raise ValidationError("EPR projection needs equally many axes on both sides")
    k = len(first)
    epr = np.zeros(1 << (2 * k), dtype=complex).reshape((2,) * (2 * k))
    for bits in range(1 << k):
        index = tuple((bits >> (k - 1 - j)) & 1 for j in range(k))
        epr[index + index] = 1.0
    epr = epr.reshape(-1) / math.sqrt(1 << k)
    projector = np.outer(epr, epr.conj())
    projected = _apply(psi, projector, list(first) + list(second))
    return float(np.vdot(psi, projected).real)


class ProjectionResult(NamedTuple):
    """Decoding fidelity and the probability of the EPR projection."""

    fidelity: float
    pi_v: float


def prepare_decoding(
    state: DenseState,
    decoder: Union["DecoderBundle", CliffordTableau],
) -> np.ndarray:
    """Entangle ``A'`` with ``R'`` and apply ``V*`` to the mirrored register.

    ``V`` is the decoder Clifford that mimics the scrambler; its complex
    conjugate acting on ``A' u B'`` realizes ``V^T`` of the inverse decoder.
    """
    tableau = decoder if isinstance(decoder, CliffordTableau) else decoder.composite
    if tableau.n != state.n:
        raise DimensionError(state.n, tableau.n, "decoder")
    psi = state.amplitudes
    for r_axis, a_axis in zip(state.axes("R'"), state.axes("A'")):
        psi = _apply(psi, _GATE_MATRICES["H"], [r_axis])
        psi = _apply(psi, _GATE_MATRICES["CX"], [r_axis, a_axis])
    mirror = tuple(state.a_size + state.n + q for q in range(state.n))
    return _apply(psi, unitary_of(tableau).conj(), mirror)


def decode_and_project(
    state: DenseState,
    decoder: Union["DecoderBundle", CliffordTableau],
    readout: Optional[SubsystemMask] = None,
) -> ProjectionResult:
    """Run the decoder, project ``DD'`` onto EPR pairs and measure ``RR'``.

    Args:
        state: State from :func:`build_scrambled_state`
        decoder: Decoder bundle, or a bare decoder tableau plus ``readout``
        readout: Output subsystem D; taken from the bundle when omitted

    Returns:
        ProjectionResult with the fidelity and pi_V

    Raises:
        ValidationError: If no readout subsystem is available
        ImpossibleOutcomeError: If the projection has zero probability
    """
    if readout is None:
        if isinstance(decoder, CliffordTableau):
            raise ValidationError(
                "A bare decoder tableau needs an explicit readout mask"
            )
        readout = decoder.readout
    psi = prepare_decoding(state, decoder)
    projected, remaining = _epr_contract(
        psi, state.x_axes(readout), state.mirror_axes(readout)
    )
    pi_v = float(np.vdot(projected, projected).real)
    if pi_v < 1e-14:
        raise ImpossibleOutcomeError(f"EPR projection on D has probability {pi_v:.3g}")
    r_positions = [remaining.index(ax) for ax in state.axes("R")]
    rp_positions = [remaining.index(ax) for ax in state.axes("R'")]
    distilled, _ = _epr_contract(projected, r_positions, rp_positions)
    fidelity = float(np.vdot(distilled, distilled).real) / pi_v
    logger.debug("Dense decoding: F=%.12f pi_V=%.12f", fidelity, pi_v)
    return ProjectionResult(min(max(fidelity, 0.0), 1.0), pi_v)


def entropy(state: Union[DenseState, np.ndarray], axes: Sequence[int]) -> float:
    """Von Neumann entropy in bits of the marginal on ``axes``.

    Raises:
        SizeLimitError: If the smaller side of the cut exceeds the marginal cap
    """
    psi = state.amplitudes if isinstance(state, DenseState) else state
    axes = sorted(set(axes))
    if not axes or len(axes) == psi.ndim:
        return 0.0
    if len(axes) > psi.ndim - len(axes):
        axes = [ax for ax in range(psi.ndim) if ax not in axes]
    if len(axes) > get_marginal_qubit_cap():
        raise SizeLimitError(
            f"Marginal on {len(axes)} qubits exceeds the cap {get_marginal_qubit_cap()}"
        )
    block = np.moveaxis(psi, axes, list(range(len(axes)))).reshape(1 << len(axes), -1)
    rho = block @ block.conj().T
    eigenvalues = eigvalsh(rho)
    eigenvalues = eigenvalues[eigenvalues > 1e-15]
    return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def mutual_information(
    state: Union[DenseState, np.ndarray], first: Sequence[int], second: Sequence[int]
) -> float:
    """``I(first : second)`` in bits; one Bell pair carries 2 bits."""
    if set(first) & set(second):
        raise ValidationError("Mutual information needs disjoint parts")
    joint = entropy(state, list(first) + list(second))
    return entropy(state, first) + entropy(state, second) - joint
