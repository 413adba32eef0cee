"""CSV and JSON serialisation of campaign results.

Every file is written with ``\\n`` line endings and a fixed column order so
the same result always produces the same bytes.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path
from typing import Any, Union

from .campaign import CampaignResult, StrategyOutcome, StrategySummary, TrialRecord

SUMMARY_COLUMNS = ("strategy", "trials", "success_pct", "mean_pairs", "mean_time_ms",
                   "mean_snr_gap_db", "success_ci_low", "success_ci_high")
TRIAL_COLUMNS = ("trial", "drop_seed", "attempts", "state", "range_m", "strategy", "chosen_tx",
                 "chosen_rx", "truth_tx", "truth_rx", "success", "pairs", "snr_gap_db", "fallback")
FORMATS = ("csv", "json")

PathLike = Union[str, Path]


class ResultsIOError(OSError):
    """Reading or writing a results file failed; the message names the file."""


def trials_path(path: PathLike) -> Path:
    """Companion per-trial file for a summary file: ``runs.csv`` -> ``runs_trials.csv``."""
    p = Path(path)
    return p.with_name(f"{p.stem}_trials{p.suffix}")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _summary_rows(result: CampaignResult):
    for s in result.summaries:
        yield [getattr(s, c) for c in SUMMARY_COLUMNS]


def _trial_rows(result: CampaignResult):
    for r in result.records:
        for o in r.outcomes:
            yield [r.trial, r.drop_seed, r.attempts, r.state, r.range_m, o.strategy,
                   o.chosen[0], o.chosen[1], o.truth[0], o.truth[1], o.success, o.pairs,
                   o.snr_gap_db, o.fallback]


def result_to_dict(result: CampaignResult) -> dict:
    return {
        "seed": result.seed,
        "summaries": [{c: getattr(s, c) for c in SUMMARY_COLUMNS} for s in result.summaries],
        "records": [dataclasses.asdict(r) for r in result.records],
    }


def result_from_dict(data: dict) -> CampaignResult:
    summaries = tuple(StrategySummary(**s) for s in data["summaries"])
    records = []
    for r in data["records"]:
        outcomes = tuple(StrategyOutcome(**{**o, "chosen": tuple(o["chosen"]),
                                            "truth": tuple(o["truth"])})
                         for o in r["outcomes"])
        records.append(TrialRecord(**{**r, "outcomes": outcomes}))
    return CampaignResult(data["seed"], summaries, tuple(records))


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ResultsIOError(exc.errno, f"cannot write results to {path}: {exc.strerror or exc}") from exc


def emit_results(result: CampaignResult, fmt: str, path: PathLike) -> tuple[Path, Path]:
    """Write the per-strategy summary to ``path`` and the per-trial table beside it.

    Returns the two paths written.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    summary_path, detail_path = Path(path), trials_path(path)
    if fmt == "csv":
        _write(summary_path, _csv_text(SUMMARY_COLUMNS, _summary_rows(result)))
        _write(detail_path, _csv_text(TRIAL_COLUMNS, _trial_rows(result)))
    else:
        full = result_to_dict(result)
        _write(summary_path, _json_text({"seed": full["seed"], "summaries": full["summaries"]}))
        _write(detail_path, _json_text({"seed": full["seed"], "records": full["records"]}))
    return summary_path, detail_path


def load_results(path: PathLike) -> CampaignResult:
    """Rebuild a result from a JSON summary and its companion trial file."""
    summary_path, detail_path = Path(path), trials_path(path)
    try:
        summary = json.loads(summary_path.read_text(encoding="utf-8"))
        detail = json.loads(detail_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ResultsIOError(exc.errno, f"cannot read results from {exc.filename}: {exc.strerror}") from exc
    return result_from_dict({"seed": summary["seed"], "summaries": summary["summaries"],
                             "records": detail["records"]})


def write_table(rows, columns, path: PathLike) -> Path:
    """CSV of dataclass rows, e.g. the overhead table."""
    path = Path(path)
    _write(path, _csv_text(columns, ([getattr(r, c) for c in columns] for r in rows)))
    return path
