"""Test result files: trial CSV, sweep CSV, JSON and gnuplot data."""

import json

import pytest

from decoderlab.core.exceptions import ValidationError
from decoderlab.harness.config import ExperimentConfig
from decoderlab.harness.experiments import (
    SweepPoint,
    TrialRecord,
    run_decoding_experiment,
)
from decoderlab.harness.io import (
    CSV_SCHEMA,
    TRIAL_FIELDS,
    read_trials_csv,
    write_gnuplot,
    write_json,
    write_sweep_csv,
    write_trials_csv,
)


def make_point(t: int, d_size: int, median: float) -> SweepPoint:
    return SweepPoint(
        t=t,
        d_size=d_size,
        trials=4,
        completed=4,
        median_fidelity=median,
        mean_fidelity=median,
        success_rate=0.5,
        bound=0.8,
        baseline=0.25,
        breakdown=False,
    )


def test_trial_csv_round_trip(tmp_path):
    """Test the schema line, columns and values of a trial file."""
    record = TrialRecord(
        trial=0, seed=3, n=6, t=2, a_size=1, d_size=3, bound=0.8, breakdown=False,
        fidelity=0.81, success=True, wall_time=1.5,
    )
    failed = TrialRecord(
        trial=1, seed=3, n=6, t=2, a_size=1, d_size=3, bound=0.8, breakdown=False,
        error="StructuralError: no room",
    )
    path = write_trials_csv([record, failed], tmp_path / "out" / "trials.csv")
    assert path.read_text().splitlines()[0] == f"# schema: {CSV_SCHEMA}"
    rows = read_trials_csv(path)
    assert list(rows[0]) == list(TRIAL_FIELDS)
    assert "wall_time" not in rows[0]
    assert rows[0]["fidelity"] == "0.81"
    assert rows[0]["success"] == "True"
    assert rows[1]["fidelity"] == ""
    assert rows[1]["error"] == "StructuralError: no room"


def test_trial_csv_rejects_other_schema(tmp_path):
    """Test that files without the schema line are refused."""
    path = tmp_path / "trials.csv"
    path.write_text("trial,seed\n0,1\n")
    with pytest.raises(ValidationError):
        read_trials_csv(path)


def test_equal_configs_give_identical_files(tmp_path):
    """Test byte-identical trial files for repeated runs."""
    config = ExperimentConfig(
        n=5, t=2, a_size=1, d_size=3, seed=21, trials=3, oracle="off"
    )
    first = write_trials_csv(run_decoding_experiment(config)[0], tmp_path / "a.csv")
    second = write_trials_csv(run_decoding_experiment(config)[0], tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_sweep_csv(tmp_path):
    """Test the sweep file layout."""
    points = [make_point(0, 3, 0.9), make_point(2, 3, 0.8)]
    path = write_sweep_csv(points, tmp_path / "sweep.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema: decoderlab-sweep/1"
    assert lines[1].startswith("t,d_size,trials")
    assert len(lines) == 4


def test_write_json(tmp_path):
    """Test sorted JSON output."""
    path = write_json({"b": 1, "a": [1, 2]}, tmp_path / "nested" / "summary.json")
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1, 2], "b": 1}


def test_gnuplot_blocks(tmp_path):
    """Test one block per readout size, sorted along the x axis."""
    points = [make_point(2, 3, 0.7), make_point(0, 3, 0.9), make_point(0, 4, 0.95)]
    path = write_gnuplot(points, tmp_path / "fidelity_vs_t.dat")
    blocks = path.read_text().strip().split("\n\n\n")
    assert len(blocks) == 2
    rows = [line for line in blocks[0].splitlines() if not line.startswith("#")]
    assert [row.split()[0] for row in rows] == ["0", "2"]
    assert rows[0].split()[1:] == ["0.9", "0.9", "0.5", "0.8", "0.25"]

    empty = make_point(4, 3, 0.5)
    empty.median_fidelity = None
    text = write_gnuplot([empty], tmp_path / "by_d.dat", x="d_size").read_text()
    assert "3 nan" in text
    with pytest.raises(ValidationError):
        write_gnuplot(points, tmp_path / "bad.dat", x="n")
