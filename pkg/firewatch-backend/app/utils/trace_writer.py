"""
Trace and report writers.

trace.jsonl  one JSON record per episode step (canonical key order)
fronts.json  true front, MMSE front and agent position per step
report.csv   controller, step, mean_log10_rmse, std_log10_rmse, trials
"""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

from app.models.harness import EpisodeTrace, MonteCarloReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_COLUMNS = ["controller", "step", "mean_log10_rmse", "std_log10_rmse", "trials"]


def _canonical(record: Dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=True)


def trace_lines(trace: EpisodeTrace) -> Iterable[str]:
    for record in trace.records:
        payload = record.to_dict()
        payload.update({"controller": trace.controller, "seed": trace.seed, "scenario_hash": trace.scenario_hash})
        yield _canonical(payload)


def write_trace_jsonl(trace: EpisodeTrace, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for line in trace_lines(trace):
            handle.write(line + "\n")
    logger.info(f"Trace written: {path} ({len(trace)} steps)")
    return path


def write_fronts_json(traces: Iterable[EpisodeTrace], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {
        "episodes": [
            {
                "controller": trace.controller,
                "seed": trace.seed,
                "scenario_hash": trace.scenario_hash,
                "steps": [
                    {
                        "step": r.step,
                        "true_front": r.true_front,
                        "mmse_front": r.mmse_front,
                        "agent_position": r.agent_position,
                    }
                    for r in trace.records
                ],
            }
            for trace in traces
        ]
    }
    path.write_text(json.dumps(document, sort_keys=True), encoding="utf-8")
    logger.info(f"Fronts written: {path}")
    return path


def write_report_csv(report: MonteCarloReport, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        writer.writerows(report.rows())
    logger.info(f"Report written: {path} ({len(report.controllers)} controllers, {report.trials} trials)")
    return path


class PlannerDiagnosticsWriter:
    """Appends planner iterations as JSON lines; usable as the planner's diagnostics callback."""

    def __init__(self, path: Optional[PathLike]):
        self.path = Path(path) if path else None
        self._handle = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("w", encoding="utf-8", newline="\n")
            logger.info(f"🔍 Planner diagnostics streaming to {self.path}")

    def __call__(self, entry: Dict[str, Any]) -> None:
        if self._handle is not None:
            self._handle.write(_canonical(entry) + "\n")

    @property
    def enabled(self) -> bool:
        return self._handle is not None

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def __enter__(self) -> "PlannerDiagnosticsWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
