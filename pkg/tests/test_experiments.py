"""Test fidelity evaluators, decoding trials, summaries, sweeps and verification."""

import math

import numpy as np
import pytest

from decoderlab.core.exceptions import (
    ImpossibleOutcomeError,
    SizeLimitError,
    ValidationError,
)
from decoderlab.clifford import Gate, from_gates
from decoderlab.doped import DopedCircuit, otoc, sample_doped_circuit
from decoderlab.harness.config import ExperimentConfig
from decoderlab.harness.experiments import (
    BOUND_SLACK,
    TrialRecord,
    fidelity_bound,
    fidelity_formula,
    fidelity_post_randomizer,
    fidelity_terms,
    meets_bound,
    pinned_trivial_count,
    random_baseline,
    run_decoding_experiment,
    run_trial,
    scrambling_fidelity,
    success_floor,
    summarize,
    sweep,
    use_dense_oracle,
    verification_checks,
)
from decoderlab.learner import QueryOracle, learn_groups
from decoderlab.oracle import build_scrambled_state, decode_and_project
from decoderlab.pauli import SubsystemMask
from decoderlab.synth import synthesize


def test_reference_functions():
    """Test the closed-form bound, floor and baselines."""
    assert fidelity_bound(1, 3, 2) == pytest.approx(0.8)
    assert success_floor(6, 3, 2) == pytest.approx(1 - 2.0**-4)
    assert scrambling_fidelity(1, 2) == pytest.approx(0.8)
    assert random_baseline(2) == 1 / 16
    # Simplified-class scramblers reach the bound with |E| = |D| - t/2
    for a, d, t in [(1, 3, 2), (1, 4, 4), (2, 4, 2)]:
        bound = fidelity_bound(a, d, t)
        assert scrambling_fidelity(a, d - t // 2) == pytest.approx(bound)


def test_bound_monotonicity():
    """Test that the bound falls with t and rises with |D|."""
    by_t = [fidelity_bound(1, 3, t) for t in range(8)]
    by_d = [fidelity_bound(1, d, 2) for d in range(1, 6)]
    assert all(a > b for a, b in zip(by_t, by_t[1:]))
    assert all(a < b for a, b in zip(by_d, by_d[1:]))
    assert fidelity_bound(1, 3, 100) == pytest.approx(0.0, abs=1e-20)


def test_perfect_clifford_decoder_fidelity(clifford_instance):
    """Test that a Clifford decoder reaches 1 / (4^|A| Omega_AD)."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    terms = fidelity_terms(circuit, circuit.to_tableau(), A, readout)
    assert terms.n1 == pytest.approx(1.0)
    assert terms.pi_v == pytest.approx(otoc(circuit, A, readout))
    assert terms.n2 == pytest.approx(4 * terms.pi_v)
    assert terms.fidelity == pytest.approx(1.0 / (4.0 * otoc(circuit, A, readout)))


def test_fidelity_terms_cap(clifford_instance):
    """Test the exact-sum cap of the formula."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    with pytest.raises(SizeLimitError):
        fidelity_terms(circuit, circuit.to_tableau(), A, readout, cap=64)


def test_post_randomizer_fidelity_for_clifford(clifford_instance):
    """Test that with E = D the post-randomizer fidelity equals the formula."""
    circuit, readout = clifford_instance
    A = SubsystemMask.first(6, 1)
    groups = learn_groups(QueryOracle(circuit), readout)
    bundle = synthesize(groups, np.random.default_rng(0))
    expected = fidelity_formula(circuit, bundle, A, readout)
    assert fidelity_post_randomizer(circuit, bundle, A) == pytest.approx(expected)
    omega = otoc(circuit, A, readout)
    assert pinned_trivial_count(bundle, A) == round(4**readout.size * omega)


def test_post_randomizer_fidelity_for_doped(simplified_instance):
    """Test the post-randomizer fidelity of a doped instance against its count."""
    circuit, readout = simplified_instance
    A = SubsystemMask.first(6, 1)
    groups = learn_groups(QueryOracle(circuit), readout)
    bundle = synthesize(groups, np.random.default_rng(1))
    count = pinned_trivial_count(bundle, A)
    assert 1 <= count <= 4**bundle.e_mask.size
    expected = 4.0 ** (2 - 1) / count
    assert fidelity_post_randomizer(circuit, bundle, A) == pytest.approx(expected)


def test_use_dense_oracle():
    """Test the auto rule for the dense oracle."""
    config = ExperimentConfig(n=6, t=2, a_size=1, d_size=3, seed=0)
    assert use_dense_oracle(config)
    assert not use_dense_oracle(config.replace(n=12))
    assert use_dense_oracle(config.replace(n=12, oracle="on"))
    assert not use_dense_oracle(config.replace(oracle="off"))


def test_formula_matches_oracle_in_trials():
    """Test that formula and dense fidelities agree on every trial."""
    config = ExperimentConfig(
        n=5, t=2, a_size=1, d_size=3, seed=17, trials=4, oracle="on"
    )
    records, summary = run_decoding_experiment(config)
    assert summary.failures == 0
    for record in records:
        formula = record.fidelity_formula
        assert record.fidelity_oracle == pytest.approx(formula, abs=1e-9)
        assert record.fidelity == record.fidelity_oracle
        assert record.rank == 2 * 3 - 2
        assert record.e_size == 2
        assert record.n1 == pytest.approx(record.fidelity * record.n2)
        assert record.success == meets_bound(record.fidelity, record.bound)


def test_trial_without_oracle():
    """Test that the formula alone fills the record when the oracle is off."""
    config = ExperimentConfig(n=6, t=2, a_size=1, d_size=3, seed=3, oracle="off")
    record = run_trial(config, 0)
    assert record.completed
    assert record.fidelity_oracle is None
    assert record.fidelity == record.fidelity_formula
    assert record.query_count > 0
    assert record.wall_time >= 0.0


def test_trials_are_reproducible():
    """Test that trial k depends only on the seed and k."""
    config = ExperimentConfig(
        n=5, t=2, a_size=1, d_size=2, seed=9, trials=3, oracle="off"
    )
    records, _ = run_decoding_experiment(config)
    again = run_trial(config, 2)
    assert again.fidelity == records[2].fidelity
    assert again.rank == records[2].rank


def test_failed_trials_are_recorded():
    """Test that library errors become error text on the record."""
    # Simplified ensemble cannot host t/2 = 2 doped qubits in |D| = 1
    config = ExperimentConfig(
        n=4, t=4, a_size=1, d_size=1, seed=0, trials=2, oracle="off"
    )
    records, summary = run_decoding_experiment(config)
    assert all(not r.completed for r in records)
    assert records[0].error.startswith("StructuralError")
    assert summary.failures == 2
    assert summary.success_rate == 0.0
    assert summary.median_fidelity is None


def test_summary_statistics():
    """Test the summary is the mean of the flags with a binomial interval."""
    config = ExperimentConfig(n=6, t=2, a_size=1, d_size=3, seed=0, trials=4)
    flags = [True, True, False, True]
    records = [
        TrialRecord(
            trial=k, seed=0, n=6, t=2, a_size=1, d_size=3, bound=0.8, breakdown=False,
            fidelity=0.9 if flag else 0.5, success=flag,
        )
        for k, flag in enumerate(flags)
    ]
    summary = summarize(config, records)
    assert summary.success_rate == 0.75
    assert summary.successes == 3
    assert summary.ci_low < 0.75 < summary.ci_high
    assert summary.median_fidelity == pytest.approx(0.9)
    assert summary.floor == pytest.approx(success_floor(6, 3, 2))
    assert summary.floor_consistent == (summary.floor <= summary.ci_high)
    with pytest.raises(ValidationError):
        summarize(config, [])


def test_t_zero_trials_match_otoc():
    """Test that Clifford trials give F = 1 / (4^|A| Omega_AD) up to quantization."""
    config = ExperimentConfig(
        n=5, t=0, a_size=1, d_size=2, seed=4, trials=3, ensemble="generic", oracle="off"
    )
    records, _ = run_decoding_experiment(config)
    for record in records:
        rng = np.random.default_rng([config.seed, record.trial])
        readout = SubsystemMask.last(5, 2)
        circuit = sample_doped_circuit(5, 0, "generic", None, rng, readout)
        omega = otoc(circuit, SubsystemMask.first(5, 1), readout)
        assert record.fidelity == pytest.approx(1.0 / (4.0 * omega))
        assert (4**2 * omega) == pytest.approx(round(4**2 * omega))


def test_sweep_fidelity_drops_with_t():
    """Test that the median fidelity at t = 2n lies below the Clifford value."""
    config = ExperimentConfig(
        n=4, t=0, a_size=1, d_size=2, seed=2, trials=5, ensemble="generic", oracle="off"
    )
    points = sweep(config, [0, 8])
    assert [p.t for p in points] == [0, 8]
    assert points[1].breakdown and not points[0].breakdown
    assert points[1].median_fidelity < points[0].median_fidelity
    assert points[0].baseline == random_baseline(1)


def test_sweep_over_readout_sizes():
    """Test a two-dimensional sweep grid."""
    config = ExperimentConfig(
        n=5, t=0, a_size=1, d_size=2, seed=1, trials=2, oracle="off"
    )
    points = sweep(config, [0, 2], [2, 3])
    assert [(p.d_size, p.t) for p in points] == [(2, 0), (2, 2), (3, 0), (3, 2)]
    assert all(math.isclose(p.bound, fidelity_bound(1, p.d_size, p.t)) for p in points)


def test_impossible_outcome_is_reported():
    """Test that a vanishing EPR projection raises in the formula and the oracle."""
    # The decoder flips the sign of Y and Z on D while U is the identity
    circuit = DopedCircuit(2, ())
    decoder = from_gates(2, [Gate("X", (1,))])
    A, D = SubsystemMask.first(2, 1), SubsystemMask.last(2, 1)
    with pytest.raises(ImpossibleOutcomeError):
        fidelity_terms(circuit, decoder, A, D)
    with pytest.raises(ImpossibleOutcomeError):
        decode_and_project(build_scrambled_state(circuit, A), decoder, D)


@pytest.mark.parametrize("suite", ["clifford-only", "doped"])
def test_verification_checks(suite):
    """Test that seeded verification suites pass."""
    checks = verification_checks(suite, seed=7, trials=2, n=5, a_size=1, d_size=3)
    assert checks
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    with pytest.raises(ValidationError):
        verification_checks("everything", seed=7)


def test_bound_comparison_allows_rounding_only():
    """Test that the success comparison absorbs rounding and nothing more."""
    bound = fidelity_bound(1, 3, 2)
    assert bound == pytest.approx(0.8)
    assert meets_bound(bound, bound)
    assert meets_bound(bound - 1e-15, bound)
    assert meets_bound(bound - BOUND_SLACK, bound)
    assert not meets_bound(bound - 1e-9, bound)
    assert not meets_bound(0.5, bound)


@pytest.mark.slow
def test_bound_holds_at_scale():
    """Test the fidelity bound over 200 trials at n = 8, |D| = 4, t = 2."""
    config = ExperimentConfig(
        n=8, t=2, a_size=1, d_size=4, seed=1, trials=200, oracle="off"
    )
    records, summary = run_decoding_experiment(config)
    assert summary.completed == 200
    assert all(r.rank == 6 and r.e_size == 3 for r in records)
    assert summary.ci_high >= 0.95
    assert all(r.fidelity < r.bound for r in records if not r.success)


@pytest.mark.slow
def test_clifford_limit_follows_otoc():
    """Test F = 1 / (4^|A| Omega_AD) per trial and its scrambler average at t = 0."""
    config = ExperimentConfig(
        n=8,
        t=0,
        a_size=1,
        d_size=3,
        seed=5,
        trials=200,
        ensemble="generic",
        oracle="off",
    )
    records, summary = run_decoding_experiment(config)
    assert summary.completed == 200
    A, readout = SubsystemMask.first(8, 1), SubsystemMask.last(8, 3)
    scaled = []
    for record in records:
        rng = np.random.default_rng([config.seed, record.trial])
        circuit = sample_doped_circuit(8, 0, "generic", None, rng, readout)
        value = 4.0 * otoc(circuit, A, readout)
        assert record.fidelity == pytest.approx(1.0 / value)
        if value == pytest.approx(1.0):
            assert record.success
        scaled.append(value)
    # Scrambler average of 4^|A| Omega_AD is 1 + 4^(|A|-|D|) - 4^-|D|
    expected = 1.0 + 4.0 ** -2 - 4.0 ** -3
    stderr = np.std(scaled, ddof=1) / math.sqrt(len(scaled))
    assert abs(np.mean(scaled) - expected) <= 3 * stderr + 1e-3
    assert 1.0 / expected == pytest.approx(scrambling_fidelity(1, 3), abs=0.02)


@pytest.mark.slow
def test_fidelity_breaks_down_past_n():
    """Test that the median fidelity falls toward the random baseline for t > n."""
    config = ExperimentConfig(
        n=4,
        t=0,
        a_size=1,
        d_size=2,
        seed=8,
        trials=50,
        ensemble="generic",
        oracle="off",
    )
    points = sweep(config, list(range(9)))
    assert all(p.completed == 50 for p in points)
    medians = [p.median_fidelity for p in points]
    assert medians[0] == max(medians)
    assert all(medians[k + 2] <= medians[k] + 0.1 for k in range(len(medians) - 2))
    late = [p for p in points if p.t > 4]
    assert all(p.breakdown for p in late)
    assert all(p.median_fidelity <= 0.6 for p in late)
    assert all(p.median_fidelity < medians[0] for p in late)
