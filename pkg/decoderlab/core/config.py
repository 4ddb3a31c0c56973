"""Environment configuration utilities."""

import os

from .exceptions import ConfigurationError


def _get_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")


def get_dense_qubit_cap() -> int:
    """Get the largest register the dense oracle will allocate.

    Returns:
        int: Qubit cap for dense states
    """
    return _get_int("DECODERLAB_DENSE_QUBIT_CAP", 24)


def get_marginal_qubit_cap() -> int:
    """Get the largest marginal the oracle will diagonalize.

    Returns:
        int: Qubit cap for reduced density matrices
    """
    return _get_int("DECODERLAB_MARGINAL_QUBIT_CAP", 14)


def get_exact_sum_cap() -> int:
    """Get the number of Pauli terms below which averages are summed exactly.

    Returns:
        int: Cap on exact Pauli-group sums
    """
    return _get_int("DECODERLAB_EXACT_SUM_CAP", 2**16)


def get_monte_carlo_draws() -> int:
    """Get the default number of Monte Carlo draws.

    Returns:
        int: Draw count for sampled averages
    """
    return _get_int("DECODERLAB_MC_DRAWS", 10_000)


def get_max_t() -> int:
    """Get the largest supported number of T gates.

    Returns:
        int: Maximum T count for exact propagation
    """
    return _get_int("DECODERLAB_MAX_T", 16)


def get_exhaustive_cap() -> int:
    """Get the largest Pauli group the exhaustive learner will scan.

    Returns:
        int: Cap on 4^|D|
    """
    return _get_int("DECODERLAB_EXHAUSTIVE_CAP", 4**6)


def get_log_level() -> str:
    """Get the logging level used by the command line.

    Returns:
        str: Logging level name
    """
    return os.getenv("DECODERLAB_LOG_LEVEL", "WARNING").upper()
