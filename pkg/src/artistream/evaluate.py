"""Pearson-correlation evaluation of streamed EMA against references, plus
the artificial-context comparison harness.

Alignment convention: predicted frame s is compared against reference frame
s - align_shift. The streaming engine publishes with an intentional
one-batch (10 frame) delay, so engine output against a same-timeline
reference aligns at --align-shift 10; two plain trajectory files align at 0.
skip_frames then drops the earliest aligned pairs, mirroring the observation
that streamed predictions settle after the first 50-100 frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ema import DIM_NAMES, NUM_DIMS, read_ema_csv
from .errors import DegenerateSeries, EmptyInput, LengthMismatch

ALIGNMENT_SLACK = 10  # frames of pred/ref length difference we tolerate


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Standard sample Pearson correlation coefficient.

    Degenerate inputs (constant series, fewer than two points) are an
    explicit error rather than a silent NaN.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs equal-length 1-D series, got {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise DegenerateSeries(f"need at least 2 points, got {len(x)}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeries("constant series has undefined correlation")
    r = float(np.sum(dx * dy) / (sx * sy))
    return max(-1.0, min(1.0, r))


@dataclass
class EvalReport:
    per_dim: dict[str, float | None]  # None marks a degenerate dimension
    mean_pcc: float
    frames: int
    skip: int
    align_shift: int
    degenerate: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "per_dim": self.per_dim,
            "mean_pcc": self.mean_pcc,
            "frames": self.frames,
            "skip": self.skip,
            "align_shift": self.align_shift,
            "degenerate": self.degenerate,
        }

    def format_table(self) -> str:
        lines = [f"{'dim':<6}{'pcc':>9}"]
        for name, value in self.per_dim.items():
            shown = "degen" if value is None else f"{value:9.4f}"
            lines.append(f"{name:<6}{shown:>9}")
        lines.append(f"{'mean':<6}{self.mean_pcc:>9.4f}")
        lines.append(f"frames compared: {self.frames}")
        if self.degenerate:
            lines.append(f"warning: degenerate dims excluded from mean: {self.degenerate}")
        return "\n".join(lines)


def align_series(
    pred: np.ndarray, ref: np.ndarray, skip: int = 0, align_shift: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Pair pred[s] with ref[s - align_shift], then drop the first `skip`
    pairs. Raises LengthMismatch when the trajectories differ by more than
    the alignment slack (that is an alignment bug, not jitter)."""
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if abs(len(pred) - len(ref)) > ALIGNMENT_SLACK:
        raise LengthMismatch(
            f"pred has {len(pred)} frames, ref {len(ref)}; "
            f"difference exceeds {ALIGNMENT_SLACK}"
        )
    length = min(len(pred) - align_shift, len(ref))
    if length <= skip:
        raise EmptyInput("no frames left to compare after alignment and skip")
    pred_a = pred[align_shift : align_shift + length]
    ref_a = ref[:length]
    return pred_a[skip:], ref_a[skip:]


def evaluate_arrays(
    pred: np.ndarray,
    ref: np.ndarray,
    skip: int = 0,
    align_shift: int = 0,
) -> EvalReport:
    """Per-dimension PCC over aligned (n, 12) trajectories plus the
    unweighted mean over non-degenerate dimensions."""
    pred_a, ref_a = align_series(pred, ref, skip=skip, align_shift=align_shift)
    per_dim: dict[str, float | None] = {}
    degenerate: list[str] = []
    collected: list[float] = []
    for d, name in enumerate(DIM_NAMES):
        try:
            value = pearson(pred_a[:, d], ref_a[:, d])
        except DegenerateSeries:
            per_dim[name] = None
            degenerate.append(name)
            continue
        per_dim[name] = value
        collected.append(value)
    if not collected:
        raise DegenerateSeries("every dimension is constant; mean PCC undefined")
    return EvalReport(
        per_dim=per_dim,
        mean_pcc=float(np.mean(collected)),
        frames=len(pred_a),
        skip=skip,
        align_shift=align_shift,
        degenerate=degenerate,
    )


def evaluate_stream(
    pred_csv: str | Path,
    ref_csv: str | Path,
    skip: int = 0,
    align_shift: int = 0,
) -> EvalReport:
    """evaluate_arrays over two trajectory CSV files (100 fps, seq-aligned)."""
    _, pred = read_ema_csv(pred_csv)
    _, ref = read_ema_csv(ref_csv)
    return evaluate_arrays(pred, ref, skip=skip, align_shift=align_shift)


@dataclass
class SweepRow:
    strategy: str
    mean_pcc: float
    frames: int
    values: np.ndarray  # published trajectory (mm), kept for confinement checks


@dataclass
class SweepReport:
    rows: list[SweepRow]
    skip: int
    align_shift: int

    def format_table(self) -> str:
        lines = [f"{'context':<12}{'mean pcc':>10}{'frames':>8}"]
        for row in self.rows:
            lines.append(f"{row.strategy:<12}{row.mean_pcc:>10.4f}{row.frames:>8}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "skip": self.skip,
            "align_shift": self.align_shift,
            "rows": [
                {"strategy": r.strategy, "mean_pcc": r.mean_pcc, "frames": r.frames}
                for r in self.rows
            ],
        }


def context_sweep(
    wav_path: str | Path,
    ref: np.ndarray | str | Path,
    strategies: list[str],
    backend,
    n_seconds: int = 1,
    context_file: str | Path | None = None,
    skip: int = 0,
    align_shift: int = ALIGNMENT_SLACK,
    vad_enabled: bool = True,
    smoothing: bool = True,
) -> SweepReport:
    """Run the full pipeline once per artificial-context strategy against a
    fixed backend and window length; one mean-PCC row per strategy."""
    from .engine import run_wav_pipeline  # local import: engine sits above eval

    from .window import ContextStrategy, WindowConfig

    if isinstance(ref, (str, Path)):
        _, ref_values = read_ema_csv(ref)
    else:
        ref_values = np.asarray(ref, dtype=np.float64)
    rows = []
    for name in strategies:
        strategy = ContextStrategy(name)
        config = WindowConfig(
            n_seconds=n_seconds,
            strategy=strategy,
            context_file=context_file if strategy in _file_strategies() else None,
        )
        result = run_wav_pipeline(
            wav_path,
            window=config,
            backend=backend,
            vad_enabled=vad_enabled,
            smoothing=smoothing,
        )
        report = evaluate_arrays(result.values, ref_values, skip=skip, align_shift=align_shift)
        rows.append(
            SweepRow(
                strategy=name,
                mean_pcc=report.mean_pcc,
                frames=report.frames,
                values=result.values,
            )
        )
    return SweepReport(rows=rows, skip=skip, align_shift=align_shift)


def _file_strategies():
    from .window import ContextStrategy

    return (ContextStrategy.VOWEL, ContextStrategy.UTTERANCE)
