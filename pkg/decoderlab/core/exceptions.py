"""Custom exceptions for decoderlab library."""

from typing import Dict, Optional


class DecoderLabError(Exception):
    """Base exception for decoderlab library."""
    pass


class ValidationError(DecoderLabError):
    """Exception raised for malformed literals, masks, gates or parameters."""
    pass


class DimensionError(ValidationError):
    """Exception raised when operands act on different qubit counts."""

    def __init__(self, expected: int, actual: int, what: str = "operand"):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what} has {actual} qubits, expected {expected}")


class ConfigurationError(DecoderLabError):
    """Exception raised for configuration-related errors."""
    pass


class SizeLimitError(DecoderLabError):
    """Exception raised when a computation exceeds a configured cap."""
    pass


class NotCompletableError(DecoderLabError):
    """Exception raised when a partial Pauli map has no Clifford extension.

    Attributes:
        pair_index: Index of the first offending pair
        other_index: Index of the second pair involved, if the violation is
            a commutation mismatch between two pairs
    """

    def __init__(
        self,
        message: str,
        pair_index: int,
        other_index: Optional[int] = None,
    ):
        self.pair_index = pair_index
        self.other_index = other_index
        super().__init__(message)


class StructuralError(DecoderLabError):
    """Exception raised when a group or ensemble lacks the required structure."""
    pass


class ImpossibleOutcomeError(DecoderLabError):
    """Exception raised when the EPR projection has zero probability."""
    pass


class InconclusiveError(DecoderLabError):
    """Exception raised when a sampled preservation test runs out of budget.

    Attributes:
        histogram: Observed Bell outcomes, keyed by unsigned Pauli literal
    """

    def __init__(self, message: str, histogram: Dict[str, int]):
        self.histogram = dict(histogram)
        super().__init__(f"{message} (observed {self.histogram})")


class DecrypterConditionError(DecoderLabError):
    """Exception raised when the decrypter disagrees with the scrambler on P_E.

    Attributes:
        generator: Literal of the failing generator on E
    """

    def __init__(self, generator: str, detail: str = ""):
        self.generator = generator
        message = f"Decrypter condition fails on generator {generator}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
