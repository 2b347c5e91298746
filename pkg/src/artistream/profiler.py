"""Per-batch latency decomposition: Model / Send / Animate / Overall.

Model is the inversion backend call, Send is publication to the transports,
Animate is the render time a viewer reports back over the stats channel
(None when no viewer is attached), and Overall is wall time from batch
arrival to publication; it includes stage glue, so it is always at least
Model + Send.
"""

from __future__ import annotations

import csv
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyInput

COLUMNS = ("model", "send", "animate", "overall")
CSV_HEADER = ("batch", "speech", "model_ms", "send_ms", "animate_ms", "overall_ms")


@dataclass(frozen=True)
class LatencyRecord:
    batch_index: int
    speech: bool
    model_ms: float
    send_ms: float
    animate_ms: float | None
    overall_ms: float

    def __post_init__(self) -> None:
        for name in ("model_ms", "send_ms", "overall_ms"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.animate_ms is not None and self.animate_ms < 0:
            raise ValueError("animate_ms must be >= 0")
        if self.overall_ms < self.model_ms + self.send_ms:
            raise ValueError("overall_ms must cover model_ms + send_ms")

    def column(self, name: str) -> float | None:
        return {
            "model": self.model_ms,
            "send": self.send_ms,
            "animate": self.animate_ms,
            "overall": self.overall_ms,
        }[name]


class BatchTimer:
    """Collects stage durations for one batch against the monotonic clock."""

    def __init__(self, batch_index: int):
        self.batch_index = batch_index
        self._t0 = time.perf_counter()
        self._stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self._stages[name] = self._stages.get(name, 0.0) + (
                time.perf_counter() - start
            )

    def stage_ms(self, name: str) -> float:
        return self._stages.get(name, 0.0) * 1e3

    def finish(self, speech: bool, animate_ms: float | None = None) -> LatencyRecord:
        overall = (time.perf_counter() - self._t0) * 1e3
        return LatencyRecord(
            batch_index=self.batch_index,
            speech=speech,
            model_ms=self.stage_ms("model"),
            send_ms=self.stage_ms("send"),
            animate_ms=animate_ms,
            overall_ms=overall,
        )


def write_profile_csv(records: list[LatencyRecord], path: str | Path) -> None:
    """One row per batch: batch,speech,model_ms,send_ms,animate_ms,overall_ms."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.batch_index,
                    int(r.speech),
                    repr(r.model_ms),
                    repr(r.send_ms),
                    "" if r.animate_ms is None else repr(r.animate_ms),
                    repr(r.overall_ms),
                ]
            )


def read_profile_csv(path: str | Path) -> list[LatencyRecord]:
    records = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_HEADER:
                raise ConfigError(f"{path}: bad profile header")
            for row in reader:
                if not row:
                    continue
                records.append(
                    LatencyRecord(
                        batch_index=int(row[0]),
                        speech=bool(int(row[1])),
                        model_ms=float(row[2]),
                        send_ms=float(row[3]),
                        animate_ms=None if row[4] == "" else float(row[4]),
                        overall_ms=float(row[5]),
                    )
                )
    except OSError as exc:
        raise ConfigError(f"cannot read profile {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed profile row: {exc}") from exc
    return records


def _column_stats(values: list[float]) -> dict | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "p50": float(np.percentile(arr, 50)),
        "p95": float(np.percentile(arr, 95)),
        "max": float(arr.max()),
    }


def summarize(records: list[LatencyRecord]) -> dict:
    """Mean/p50/p95/max per column, over all batches and speech-only."""
    if not records:
        raise EmptyInput("no latency records to summarize")

    def block(rows: list[LatencyRecord]) -> dict | None:
        if not rows:
            return None
        return {
            col: _column_stats([r.column(col) for r in rows if r.column(col) is not None])
            for col in COLUMNS
        }

    speech_rows = [r for r in records if r.speech]
    return {
        "n_batches": len(records),
        "n_speech": len(speech_rows),
        "all": block(records),
        "speech": block(speech_rows),
    }


def format_summary(summary: dict) -> str:
    """Plain-text table mirroring the per-portion latency breakdown."""
    lines = [
        f"batches: {summary['n_batches']}  (speech: {summary['n_speech']})",
        f"{'portion':<10}{'scope':<9}{'mean':>9}{'p50':>9}{'p95':>9}{'max':>9}  (ms)",
    ]
    for col in COLUMNS:
        for scope in ("all", "speech"):
            block = summary.get(scope)
            stats = block.get(col) if block else None
            if stats is None:
                lines.append(f"{col:<10}{scope:<9}{'-':>9}{'-':>9}{'-':>9}{'-':>9}")
            else:
                lines.append(
                    f"{col:<10}{scope:<9}"
                    f"{stats['mean']:>9.3f}{stats['p50']:>9.3f}"
                    f"{stats['p95']:>9.3f}{stats['max']:>9.3f}"
                )
    return "\n".join(lines)


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2)
