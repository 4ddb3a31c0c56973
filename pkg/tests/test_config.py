"""Test experiment configuration and environment settings."""

import json

import pytest

from decoderlab.core import config as env
from decoderlab.core.exceptions import ConfigurationError
from decoderlab.harness.config import ExperimentConfig, load_config


def test_defaults():
    """Test default values of an experiment config."""
    config = ExperimentConfig(n=6, t=2, a_size=1, d_size=3, seed=0)
    assert config.ensemble == "simplified"
    assert config.mode == "exact"
    assert config.oracle == "auto"
    assert config.trials == 1
    assert not config.breakdown
    assert config.require_hyperbolic
    assert not config.replace(ensemble="generic").require_hyperbolic


def test_breakdown_regime():
    """Test that t > n is flagged."""
    assert ExperimentConfig(n=4, t=5, a_size=1, d_size=2, seed=0).breakdown


@pytest.mark.parametrize(
    "changes",
    [
        {"n": 0},
        {"t": -1},
        {"a_size": 0},
        {"a_size": 7},
        {"d_size": 7},
        {"trials": 0},
        {"draws": 1},
        {"mode": "noisy"},
        {"mode": "sampled", "shots": 1},
        {"oracle": "maybe"},
        {"ensemble": "haar"},
        {"strategy": "greedy"},
        {"depth": -1},
        {"seed": None},
    ],
)
def test_invalid_values(changes):
    """Test that invalid values raise ConfigurationError."""
    params = {"n": 6, "t": 2, "a_size": 1, "d_size": 3, "seed": 0}
    params.update(changes)
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**params)


def test_from_dict_errors():
    """Test unknown and missing keys."""
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(
            {"n": 6, "t": 2, "a_size": 1, "d_size": 3, "seed": 0, "colour": "red"}
        )
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"n": 6, "t": 2})


def test_load_config(tmp_path):
    """Test loading a JSON file with overrides."""
    path = tmp_path / "config.json"
    settings = {"n": 6, "t": 2, "a_size": 1, "d_size": 3, "seed": 5, "trials": 4}
    path.write_text(json.dumps(settings))
    config = load_config(path, t=0, trials=None)
    assert config.t == 0
    assert config.trials == 4
    assert config.seed == 5
    assert ExperimentConfig.from_dict(config.to_dict()) == config


def test_load_config_errors(tmp_path):
    """Test unreadable and malformed config files."""
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_config(bad)


def test_environment_settings(monkeypatch):
    """Test environment overrides and their validation."""
    monkeypatch.setenv("DECODERLAB_DENSE_QUBIT_CAP", "18")
    monkeypatch.setenv("DECODERLAB_LOG_LEVEL", "debug")
    assert env.get_dense_qubit_cap() == 18
    assert env.get_log_level() == "DEBUG"
    monkeypatch.setenv("DECODERLAB_MAX_T", "many")
    with pytest.raises(ConfigurationError):
        env.get_max_t()
    monkeypatch.delenv("DECODERLAB_EXACT_SUM_CAP", raising=False)
    assert env.get_exact_sum_cap() == 2**16
