"""Canonical EMA data model shared by every other module.

Six midsagittal articulators, two coordinates each, flattened in one fixed
order that every serialization (shared memory, wire protocol, CSV) relies on:

    [TTx, TTy, TBx, TBy, TDx, TDy, ULx, ULy, LLx, LLy, LIx, LIy]

Frames are either normalized (each value in [-1, 1]) or in millimeters; the
mapping between the two is an affine per-dimension transform described by a
NormSpec loaded from JSON.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValueOutOfRange

CHANNELS = ("TT", "TB", "TD", "UL", "LL", "LI")
DIM_NAMES = tuple(f"{ch}{ax}" for ch in CHANNELS for ax in ("x", "y"))
NUM_DIMS = len(DIM_NAMES)
FRAME_RATE = 100  # EMA frames per second
CSV_HEADER = ("seq",) + DIM_NAMES

# Values may stray this far outside their contractual range before we treat
# them as an error rather than rounding noise; within it they are clamped.
RANGE_TOL = 1e-6


class Space(Enum):
    NORMALIZED = "normalized"
    MILLIMETERS = "millimeters"


class Channel(Enum):
    """The six articulators, in canonical order."""

    TONGUE_TIP = "TT"
    TONGUE_BODY = "TB"
    TONGUE_DORSUM = "TD"
    UPPER_LIP = "UL"
    LOWER_LIP = "LL"
    LOWER_INCISOR = "LI"

    @property
    def index(self) -> int:
        return CHANNELS.index(self.value)

    @property
    def x(self) -> int:
        """Flattened index of this channel's x dimension."""
        return 2 * self.index

    @property
    def y(self) -> int:
        return 2 * self.index + 1


def dim_index(name: str) -> int:
    """Flattened index of a dimension name such as 'LIy'."""
    try:
        return DIM_NAMES.index(name)
    except ValueError:
        raise KeyError(f"unknown EMA dimension {name!r}") from None


@dataclass(frozen=True, eq=False)
class EmaFrame:
    """One 100 fps sample of the 12 articulator coordinates.

    ``speech`` is False when the frame is a silence hold (the previous pose
    republished while the voice activity gate is closed).
    """

    seq: int
    values: np.ndarray
    space: Space
    speech: bool = True

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (NUM_DIMS,):
            raise ValueError(f"EmaFrame needs {NUM_DIMS} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueOutOfRange(f"non-finite value in frame seq={self.seq}")
        if self.space is Space.NORMALIZED:
            if np.any(np.abs(vals) > 1.0 + RANGE_TOL):
                worst = float(np.max(np.abs(vals)))
                raise ValueOutOfRange(
                    f"normalized frame seq={self.seq} has |value| up to {worst}, limit 1"
                )
            vals = np.clip(vals, -1.0, 1.0)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmaFrame):
            return NotImplemented
        return (
            self.seq == other.seq
            and self.space is other.space
            and self.speech == other.speech
            and bool(np.array_equal(self.values, other.values))
        )

    def __getitem__(self, dim: int | str) -> float:
        if isinstance(dim, str):
            dim = dim_index(dim)
        return float(self.values[dim])

    def points(self) -> np.ndarray:
        """The values as six (x, y) rows in canonical channel order."""
        return self.values.reshape(len(CHANNELS), 2)


def flatten_points(points: np.ndarray) -> np.ndarray:
    """Inverse of EmaFrame.points(): (6, 2) -> (12,)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape != (len(CHANNELS), 2):
        raise ValueError(f"expected shape (6, 2), got {pts.shape}")
    return pts.reshape(NUM_DIMS)


@dataclass(frozen=True)
class NormSpec:
    """Per-dimension millimeter extremes mapping [-1, 1] to physical space.

    Real specs come from a speaker's recorded extremes (e.g. HPRC M02); this
    repository only ships a clearly-labeled synthetic placeholder.
    """

    speaker: str
    min_mm: np.ndarray
    max_mm: np.ndarray

    def __post_init__(self) -> None:
        lo = np.array(self.min_mm, dtype=np.float64)
        hi = np.array(self.max_mm, dtype=np.float64)
        if lo.shape != (NUM_DIMS,) or hi.shape != (NUM_DIMS,):
            raise ConfigError("NormSpec needs 12 min and 12 max values")
        if not np.all(lo < hi):
            bad = [DIM_NAMES[i] for i in np.nonzero(~(lo < hi))[0]]
            raise ConfigError(f"NormSpec min >= max for {', '.join(bad)}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "min_mm", lo)
        object.__setattr__(self, "max_mm", hi)

    @property
    def span_mm(self) -> np.ndarray:
        return self.max_mm - self.min_mm

    @classmethod
    def from_json(cls, path: str | Path) -> "NormSpec":
        """Load from the external JSON schema.

        Expected shape::

            {"speaker": str, "dims": [{"name": "TTx", "min": m, "max": M}, ...]}

        Files with a dim count other than 12 or names out of canonical order
        are rejected.
        """
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read NormSpec {path}: {exc}") from exc
        dims = raw.get("dims")
        if not isinstance(dims, list) or len(dims) != NUM_DIMS:
            raise ConfigError(f"NormSpec {path} must list exactly {NUM_DIMS} dims")
        names = [d.get("name") for d in dims]
        if names != list(DIM_NAMES):
            raise ConfigError(
                f"NormSpec {path} dims out of order: {names} != {list(DIM_NAMES)}"
            )
        try:
            lo = [float(d["min"]) for d in dims]
            hi = [float(d["max"]) for d in dims]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"NormSpec {path} has a malformed dim entry") from exc
        return cls(speaker=str(raw.get("speaker", "")), min_mm=np.array(lo), max_mm=np.array(hi))

    def to_json(self, path: str | Path) -> None:
        doc = {
            "speaker": self.speaker,
            "dims": [
                {"name": n, "min": float(lo), "max": float(hi)}
                for n, lo, hi in zip(DIM_NAMES, self.min_mm, self.max_mm)
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def denormalize(frame: EmaFrame, spec: NormSpec) -> EmaFrame:
    """Map a normalized frame into millimeters.

    out[d] = (v[d] + 1) / 2 * (max[d] - min[d]) + min[d]
    """
    if frame.space is not Space.NORMALIZED:
        raise ValueError("denormalize expects a normalized frame")
    vals = frame.values  # already range-checked and clamped on construction
    mm = (vals + 1.0) / 2.0 * spec.span_mm + spec.min_mm
    return EmaFrame(seq=frame.seq, values=mm, space=Space.MILLIMETERS, speech=frame.speech)


def normalize(frame: EmaFrame, spec: NormSpec) -> EmaFrame:
    """Exact inverse of denormalize; errors if a value falls outside
    [min, max] by more than the shared tolerance (wrong spec for this data)."""
    if frame.space is not Space.MILLIMETERS:
        raise ValueError("normalize expects a millimeter frame")
    vals = frame.values
    # Tolerance scales with the physical span, mirroring the normalized-side 1e-6.
    tol = RANGE_TOL * spec.span_mm / 2.0
    if np.any(vals < spec.min_mm - tol) or np.any(vals > spec.max_mm + tol):
        bad = np.nonzero((vals < spec.min_mm - tol) | (vals > spec.max_mm + tol))[0]
        names = ", ".join(DIM_NAMES[i] for i in bad)
        raise ValueOutOfRange(f"millimeter values outside NormSpec range for {names}")
    vals = np.clip(vals, spec.min_mm, spec.max_mm)
    norm = (vals - spec.min_mm) / spec.span_mm * 2.0 - 1.0
    return EmaFrame(seq=frame.seq, values=norm, space=Space.NORMALIZED, speech=frame.speech)


def write_ema_csv(path: str | Path, seqs: np.ndarray, values: np.ndarray) -> None:
    """Write a trajectory as `seq,TTx,...,LIy`, one row per 10 ms frame."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != NUM_DIMS:
        raise ValueError(f"values must be (n, {NUM_DIMS}), got {values.shape}")
    if len(seqs) != len(values):
        raise ValueError("seqs and values length mismatch")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for s, row in zip(seqs, values):
            writer.writerow([int(s)] + [repr(float(v)) for v in row])


def read_ema_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a trajectory CSV; returns (seqs, values) with values (n, 12)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise ConfigError(
                    f"{path}: bad trajectory header, expected {','.join(CSV_HEADER)}"
                )
            seqs: list[int] = []
            rows: list[list[float]] = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(CSV_HEADER):
                    raise ConfigError(f"{path}:{lineno}: expected {len(CSV_HEADER)} columns")
                seqs.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed trajectory value: {exc}") from exc
    if not rows:
        return np.zeros(0, dtype=np.int64), np.zeros((0, NUM_DIMS))
    return np.asarray(seqs, dtype=np.int64), np.asarray(rows, dtype=np.float64)
