"""Experiment configuration."""

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..core.exceptions import ConfigurationError
from ..core.registry import list_ensembles, list_strategies
from ..learner import MODES

ORACLE_CHOICES = ("on", "off", "auto")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one batch of decoding trials.

    Sizes follow the protocol: ``a_size`` input qubits are entangled with
    the reference, ``d_size`` output qubits are handed to the decoder.

    Attributes:
        n: Number of scrambler qubits
        t: Number of T gates
        a_size: Size of the input subsystem A
        d_size: Size of the readout subsystem D
        seed: Master seed; trial ``k`` draws from the stream ``[seed, k]``
        ensemble: Registered circuit ensemble
        trials: Number of trials
        shots: Queries per preservation test in sampled mode
        depth: Brickwork depth, ``3n`` when None
        mode: Learner mode, ``exact`` or ``sampled``
        oracle: Dense oracle use, ``on``, ``off`` or ``auto``
        strategy: Registered probing strategy
        budget: Optional query budget per trial
        draws: Randomizer draws for the statistics experiment
        tolerance: Absolute OTOC tolerance for scrambling checks
        out_dir: Directory for result files
    """

    n: int
    t: int
    a_size: int
    d_size: int
    seed: int
    ensemble: str = "simplified"
    trials: int = 1
    shots: int = 200
    depth: Optional[int] = None
    mode: str = "exact"
    oracle: str = "auto"
    strategy: str = "exhaustive"
    budget: Optional[int] = None
    draws: int = 500
    tolerance: float = 0.05
    out_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.seed is None:
            raise ConfigurationError("A seed is required")
        if self.n < 1:
            raise ConfigurationError(f"n must be positive, got {self.n}")
        if self.t < 0:
            raise ConfigurationError(f"t must be non-negative, got {self.t}")
        if not 1 <= self.a_size <= self.n:
            raise ConfigurationError(f"|A|={self.a_size} must lie in [1, {self.n}]")
        if not 1 <= self.d_size <= self.n:
            raise ConfigurationError(f"|D|={self.d_size} must lie in [1, {self.n}]")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {self.trials}")
        if self.draws < 2:
            raise ConfigurationError(f"draws must be at least 2, got {self.draws}")
        if self.mode not in MODES:
            raise ConfigurationError(f"Unknown learner mode: {self.mode}")
        if self.mode == "sampled" and self.shots < 2:
            raise ConfigurationError("Sampled mode needs at least 2 shots")
        if self.oracle not in ORACLE_CHOICES:
            raise ConfigurationError(f"Unknown oracle setting: {self.oracle}")
        if self.ensemble.lower() not in list_ensembles():
            raise ConfigurationError(f"Unsupported ensemble: {self.ensemble}")
        if self.strategy.lower() not in list_strategies():
            raise ConfigurationError(f"Unsupported strategy: {self.strategy}")
        if self.depth is not None and self.depth < 0:
            raise ConfigurationError(f"depth must be non-negative, got {self.depth}")

    @property
    def breakdown(self) -> bool:
        """True in the regime ``t > n`` where decoding is expected to fail."""
        return self.t > self.n

    @property
    def require_hyperbolic(self) -> bool:
        """Simplified-class scramblers must yield a G_D without radical."""
        return self.ensemble.lower() == "simplified"

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Build a config from a mapping, rejecting unknown keys.

        Raises:
            ConfigurationError: On unknown keys, missing fields or invalid values
        """
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {unknown}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Incomplete configuration: {str(e)}")


def load_config(
    path: Optional[Union[str, Path]] = None, **overrides: Any
) -> ExperimentConfig:
    """Load a JSON config file and apply overrides; None overrides are ignored.

    Raises:
        ConfigurationError: If the file cannot be read or the result is invalid
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            raise ConfigurationError(f"Cannot read config {path}: {str(e)}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config {path} must hold a JSON object")
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.from_dict(data)
