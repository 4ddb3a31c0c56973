"""Command line interface.

Subcommands::

    learn   learn G_D of a circuit and write the transcript
    decode  run the decoding experiment and write trial CSV plus summary
    otoc    print Omega_XY of a circuit with the scrambling reference
    sweep   median fidelity over a grid of T counts and readout sizes
    stats   randomizer statistics of N1, N2 and F
    verify  formula/oracle cross-checks on seeded instances

Exit codes: 0 success, 2 configuration error, 3 trial failures,
4 acceptance failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Set

import numpy as np

from ..core.config import get_log_level
from ..core.exceptions import ConfigurationError, DecoderLabError, ValidationError
from ..core.registry import list_ensembles, list_strategies
from ..doped import DopedCircuit, is_scrambler, sample_doped_circuit
from ..learner import MODES
from ..pauli import SubsystemMask
from .config import ORACLE_CHOICES, ExperimentConfig, load_config
from .experiments import (
    VERIFY_SUITES,
    learn_for,
    run_decoding_experiment,
    sweep,
    verification_checks,
)
from .io import write_gnuplot, write_json, write_sweep_csv, write_trials_csv
from .statistics import randomizer_statistics, variance_scaling

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRIALS = 3
EXIT_ACCEPTANCE = 4


def parse_int_list(text: str) -> List[int]:
    """Parse ``"3"``, ``"0,2,4"`` or an inclusive range ``"0..6"``."""
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            return list(range(int(low), int(high) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"Expected an integer, list or range, got {text!r}"
        )


def _add_experiment_flags(
    parser: argparse.ArgumentParser, t_type: Callable[[str], Any] = int
) -> None:
    parser.add_argument("--config", help="JSON experiment config; flags override it")
    parser.add_argument("--n", type=int, help="number of qubits")
    parser.add_argument("--t", type=t_type, help="number of T gates")
    parser.add_argument("--a-size", type=int, help="size of the input subsystem A")
    parser.add_argument("--d-size", type=int, help="size of the readout subsystem D")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--shots", type=int, help="queries per test in sampled mode")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--depth", type=int, help="brickwork depth (default 3n)")
    parser.add_argument("--ensemble", choices=list_ensembles())
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--oracle", choices=ORACLE_CHOICES)
    parser.add_argument("--strategy", choices=list_strategies())
    parser.add_argument("--budget", type=int, help="query budget per trial")
    parser.add_argument("--draws", type=int, help="randomizer draws for stats")
    parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    description = __doc__.split("\n\n")[0]
    parser = argparse.ArgumentParser(prog="decoderlab", description=description)
    parser.add_argument(
        "--log-level", help="logging level (default from DECODERLAB_LOG_LEVEL)"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    learn = commands.add_parser("learn", help="learn the preserved group of a circuit")
    _add_experiment_flags(learn)
    learn.add_argument(
        "--circuit", help="circuit text file; sampled from the config when omitted"
    )

    decode = commands.add_parser("decode", help="run the decoding experiment")
    _add_experiment_flags(decode)

    otoc = commands.add_parser("otoc", help="out-of-time-order correlator of a circuit")
    _add_experiment_flags(otoc)
    otoc.add_argument(
        "--circuit", help="circuit text file; sampled from the config when omitted"
    )
    otoc.add_argument("--X", type=int, nargs="+", required=True, help="qubits of X")
    otoc.add_argument("--Y", type=int, nargs="+", required=True, help="qubits of Y")
    otoc.add_argument("--tolerance", type=float)

    sweep_parser = commands.add_parser("sweep", help="median fidelity over t (and |D|)")
    _add_experiment_flags(sweep_parser, t_type=parse_int_list)
    sweep_parser.add_argument(
        "--d-values", type=parse_int_list, help="readout sizes to sweep"
    )

    stats = commands.add_parser("stats", help="randomizer statistics")
    _add_experiment_flags(stats)
    stats.add_argument(
        "--variance", action="store_true", help="also compare |C| with |C|+1"
    )

    verify = commands.add_parser("verify", help="formula and oracle cross-checks")
    verify.add_argument("--suite", choices=sorted(VERIFY_SUITES), default="all")
    verify.add_argument("--seed", type=int, required=True)
    verify.add_argument("--trials", type=int, default=5)
    verify.add_argument("--out", help="output directory")
    return parser


def _config(args: argparse.Namespace, **extra: Any) -> ExperimentConfig:
    overrides: Dict[str, Any] = {
        "n": args.n,
        "t": args.t,
        "a_size": args.a_size,
        "d_size": args.d_size,
        "trials": args.trials,
        "shots": args.shots,
        "seed": args.seed,
        "depth": args.depth,
        "ensemble": args.ensemble,
        "mode": args.mode,
        "oracle": args.oracle,
        "strategy": args.strategy,
        "budget": args.budget,
        "draws": args.draws,
        "out_dir": args.out,
    }
    overrides.update(extra)
    return load_config(args.config, **overrides)


def _out_dir(config: ExperimentConfig) -> Optional[Path]:
    return None if config.out_dir is None else Path(config.out_dir)


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _load_or_sample(args: argparse.Namespace, config: ExperimentConfig) -> DopedCircuit:
    if args.circuit:
        return DopedCircuit.load(args.circuit)
    rng = np.random.default_rng([config.seed, 0])
    readout = SubsystemMask.last(config.n, config.d_size)
    return sample_doped_circuit(
        config.n, config.t, config.ensemble, config.depth, rng, readout
    )


def _circuit_config(args: argparse.Namespace) -> ExperimentConfig:
    # A loaded circuit fixes n; the remaining sizes default to small valid values.
    if not args.circuit:
        return _config(args)
    circuit = DopedCircuit.load(args.circuit)
    if args.config is None:
        for key, value in {"a_size": 1, "d_size": 1, "seed": 0}.items():
            if getattr(args, key) is None:
                setattr(args, key, value)
    args.n, args.t = circuit.n, circuit.t
    return _config(args)


def cmd_learn(args: argparse.Namespace) -> int:
    config = _circuit_config(args)
    circuit = _load_or_sample(args, config)
    readout = SubsystemMask.last(circuit.n, config.d_size)
    rng = np.random.default_rng([config.seed, 0])
    groups = learn_for(config, circuit, readout, rng)
    out = _out_dir(config)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        groups.save_transcript(out / "transcript.json")
    _emit(groups.summary())
    return EXIT_TRIALS if groups.incomplete else EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    config = _config(args)
    records, summary = run_decoding_experiment(config)
    out = _out_dir(config)
    if out is not None:
        write_trials_csv(records, out / "trials.csv")
        payload = {"config": config.to_dict(), "summary": summary.to_dict()}
        write_json(payload, out / "summary.json")
    _emit(summary.to_dict())
    if summary.failures:
        return EXIT_TRIALS
    return EXIT_OK if summary.floor_consistent else EXIT_ACCEPTANCE


def cmd_otoc(args: argparse.Namespace) -> int:
    config = _circuit_config(args)
    circuit = _load_or_sample(args, config)
    X = SubsystemMask.from_qubits(circuit.n, args.X)
    Y = SubsystemMask.from_qubits(circuit.n, args.Y)
    tolerance = config.tolerance if args.tolerance is None else args.tolerance
    report = is_scrambler(circuit, X, Y, tolerance=tolerance, seed=config.seed)
    _emit(
        {
            "otoc": report.otoc,
            "stderr": report.stderr,
            "reference": report.reference,
            "deviation": report.deviation,
            "is_scrambler": report.is_scrambler,
            "mutual_information_bits": report.mutual_information_bits,
        }
    )
    return EXIT_OK


def _config_file_keys(args: argparse.Namespace) -> Set[str]:
    if args.config is None:
        return set()
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, ValueError):
        # load_config reports the error
        return set()
    return set(data) if isinstance(data, dict) else set()


def _sweep_defaults(args: argparse.Namespace) -> None:
    """Fill sweep settings that neither the flags nor the config file give.

    A T-count sweep runs on the generic ensemble with ``|A| = 1`` and
    ``|D| = n // 2`` unless told otherwise.
    """
    given = _config_file_keys(args)
    if args.ensemble is None and "ensemble" not in given:
        args.ensemble = "generic"
    if args.a_size is None and "a_size" not in given:
        args.a_size = 1
    if args.d_size is None and "d_size" not in given and args.n is not None:
        args.d_size = max(1, args.n // 2)


def cmd_sweep(args: argparse.Namespace) -> int:
    t_values = args.t
    if t_values is None:
        raise ConfigurationError("sweep needs --t, e.g. --t 0..6")
    _sweep_defaults(args)
    config = _config(args, t=t_values[0])
    odd = [t for t in t_values if t % 2]
    if config.ensemble == "simplified" and odd:
        raise ConfigurationError(
            f"The simplified ensemble needs even T counts, got {odd}"
        )
    points = sweep(config, t_values, args.d_values)
    out = _out_dir(config)
    if out is not None:
        write_sweep_csv(points, out / "sweep.csv")
        write_gnuplot(points, out / "fidelity_vs_t.dat", x="t")
        if args.d_values and len(args.d_values) > 1:
            write_gnuplot(points, out / "fidelity_vs_d.dat", x="d_size")
    _emit({"points": [p.to_dict() for p in points]})
    return EXIT_TRIALS if any(p.completed < p.trials for p in points) else EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    config = _config(args)
    if args.variance:
        scaling = variance_scaling(config)
        payload = {
            "base": scaling.base.summary(),
            "extended": scaling.extended.summary(),
            **scaling.summary(),
        }
    else:
        payload = randomizer_statistics(config).summary()
    out = _out_dir(config)
    if out is not None:
        write_json(payload, out / "stats.json")
    _emit(payload)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    checks = verification_checks(args.suite, args.seed, args.trials)
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    if args.out:
        payload = {"checks": [c._asdict() for c in checks]}
        write_json(payload, Path(args.out) / "verify.json")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_ACCEPTANCE


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "learn": cmd_learn,
    "decode": cmd_decode,
    "otoc": cmd_otoc,
    "sweep": cmd_sweep,
    "stats": cmd_stats,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or get_log_level()).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, ValidationError) as e:
        logger.error("Configuration error: %s", str(e))
        return EXIT_CONFIG
    except DecoderLabError as e:
        logger.error("%s: %s", type(e).__name__, str(e))
        return EXIT_TRIALS


if __name__ == "__main__":
    sys.exit(main())
