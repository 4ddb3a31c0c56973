"""Result persistence: trial CSV, JSON summaries and gnuplot data files."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from ..core.exceptions import ValidationError
from .experiments import SweepPoint, TrialRecord

logger = logging.getLogger(__name__)

CSV_SCHEMA = "decoderlab-trials/1"
SWEEP_SCHEMA = "decoderlab-sweep/1"

# Wall time is left out so equal configs give byte-identical files.
TRIAL_FIELDS = (
    "trial",
    "seed",
    "n",
    "t",
    "a_size",
    "d_size",
    "e_size",
    "rank",
    "fidelity_formula",
    "fidelity_oracle",
    "fidelity",
    "pi_v",
    "n1",
    "n2",
    "bound",
    "success",
    "query_count",
    "incomplete",
    "breakdown",
    "error",
)

SWEEP_FIELDS = (
    "t",
    "d_size",
    "trials",
    "completed",
    "median_fidelity",
    "mean_fidelity",
    "success_rate",
    "bound",
    "baseline",
    "breakdown",
)


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(
    path: Path, schema: str, fields: Sequence[str], rows: Iterable[Dict[str, Any]]
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(f"# schema: {schema}\n")
        writer = csv.DictWriter(
            handle, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format(row.get(key)) for key in fields})


def write_trials_csv(records: Sequence[TrialRecord], path: Union[str, Path]) -> Path:
    """Write one row per trial under a versioned schema comment."""
    path = Path(path)
    _write_rows(path, CSV_SCHEMA, TRIAL_FIELDS, (r.to_dict() for r in records))
    logger.info("Wrote %d trials to %s", len(records), path)
    return path


def read_trials_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a trial CSV back as string rows.

    Raises:
        ValidationError: If the schema line is missing or has another version
    """
    with Path(path).open(newline="") as handle:
        first = handle.readline().strip()
        if first != f"# schema: {CSV_SCHEMA}":
            raise ValidationError(f"Unsupported trial file schema: {first!r}")
        return list(csv.DictReader(handle))


def write_sweep_csv(points: Sequence[SweepPoint], path: Union[str, Path]) -> Path:
    path = Path(path)
    _write_rows(path, SWEEP_SCHEMA, SWEEP_FIELDS, (p.to_dict() for p in points))
    return path


def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a JSON document with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.info("Wrote %s", path)
    return path


def write_gnuplot(
    points: Sequence[SweepPoint], path: Union[str, Path], x: str = "t"
) -> Path:
    """Whitespace-separated columns ``x median mean success bound baseline``.

    A blank line separates blocks that share the other grid coordinate, so
    ``plot 'file' index k`` selects one curve.

    Raises:
        ValidationError: If ``x`` is neither ``t`` nor ``d_size``
    """
    if x not in ("t", "d_size"):
        raise ValidationError(f"Unsupported gnuplot axis: {x}")
    other = "d_size" if x == "t" else "t"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blocks: Dict[int, List[SweepPoint]] = {}
    for point in points:
        blocks.setdefault(getattr(point, other), []).append(point)
    lines = [f"# {x} median_fidelity mean_fidelity success_rate bound baseline"]
    for key in sorted(blocks):
        lines.append(f"# {other} = {key}")
        for point in sorted(blocks[key], key=lambda p: getattr(p, x)):
            columns = [str(getattr(point, x))]
            for value in (point.median_fidelity, point.mean_fidelity):
                columns.append("nan" if value is None else repr(value))
            for value in (point.success_rate, point.bound, point.baseline):
                columns.append(repr(value))
            lines.append(" ".join(columns))
        lines.extend(["", ""])
    path.write_text("\n".join(lines).rstrip("\n") + "\n")
    return path
