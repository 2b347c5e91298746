"""Frame selection, silence holds, and cubic Bezier seam smoothing.

Each inversion response covers the whole context window; only the 10 frames
over the working batch are kept (window-local indices [100n-20, 100n-10)).
Because consecutive windows are inverted independently, the end of one
batch's trajectory need not meet the start of the next; the seam is smoothed
by replacing the first four frames of each batch with points on a cubic
Bezier from the previous batch's last frame.

Control points per dimension, with p the previous last value and delta the
previous last-step velocity:

    P0 = p            P1 = p + delta / 3
    P3 = current[3]   P2 = P3 - (current[4] - current[3]) / 3

sampled at t in {0.25, 0.5, 0.75, 1.0} so frame 3 lands exactly back on the
original trajectory and frames 4..9 pass through untouched. Smoothing runs
in normalized space, before denormalization, so the seam geometry does not
depend on the normalization spec.
"""

from __future__ import annotations

import numpy as np

from .ema import NUM_DIMS
from .errors import FrameCountMismatch

WORKING_FRAMES = 10
SEAM_FRAMES = 4
BEZIER_TS = (0.25, 0.5, 0.75, 1.0)


def select_working_frames(values: np.ndarray, n_seconds: int) -> np.ndarray:
    """Keep the 10 frames covering the working batch: rows
    [100n - 20, 100n - 10) of a (100n, 12) response."""
    values = np.asarray(values, dtype=np.float64)
    expected = 100 * n_seconds
    if values.shape != (expected, NUM_DIMS):
        raise FrameCountMismatch(
            f"expected ({expected}, {NUM_DIMS}) frames for n={n_seconds}, got {values.shape}"
        )
    start = expected - 2 * WORKING_FRAMES
    return values[start : start + WORKING_FRAMES].copy()


def cubic_bezier(p0, p1, p2, p3, t: float):
    u = 1.0 - t
    return u**3 * p0 + 3.0 * t * u**2 * p1 + 3.0 * t**2 * u * p2 + t**3 * p3


def smooth_seam(
    prev_tail: tuple[np.ndarray | None, np.ndarray] | None,
    current: np.ndarray,
) -> np.ndarray:
    """Replace current[0..3] with Bezier samples easing from the previous
    batch's last frame; current[4..9] are returned bit-unchanged.

    prev_tail is (second_last, last); second_last may be None (zero initial
    velocity). A None prev_tail (nothing emitted yet) returns current as-is.
    """
    current = np.asarray(current, dtype=np.float64)
    if current.shape != (WORKING_FRAMES, NUM_DIMS):
        raise FrameCountMismatch(
            f"smoothing expects ({WORKING_FRAMES}, {NUM_DIMS}) frames, got {current.shape}"
        )
    if prev_tail is None:
        return current.copy()
    second_last, last = prev_tail
    p0 = np.asarray(last, dtype=np.float64)
    delta = p0 - second_last if second_last is not None else np.zeros(NUM_DIMS)
    p1 = p0 + delta / 3.0
    p3 = current[3]
    p2 = p3 - (current[4] - current[3]) / 3.0
    out = current.copy()
    for i, t in enumerate(BEZIER_TS):
        out[i] = cubic_bezier(p0, p1, p2, p3, t)
    return out


class PostProcessor:
    """Sequential stage state: the last two emitted frames plus the rest pose.

    hold() serves silence batches (and the stream head before the first
    window) with exact copies of the last emitted frame; holds still update
    the seam state so resuming speech eases away from the held pose instead
    of jumping.
    """

    def __init__(self, rest_pose: np.ndarray | None = None, smoothing: bool = True):
        self.rest_pose = (
            np.zeros(NUM_DIMS) if rest_pose is None else np.asarray(rest_pose, dtype=np.float64)
        )
        if self.rest_pose.shape != (NUM_DIMS,):
            raise ValueError(f"rest pose needs {NUM_DIMS} values")
        if np.any(np.abs(self.rest_pose) > 1.0):
            raise ValueError("rest pose must be normalized, within [-1, 1]")
        self.smoothing = smoothing
        self._second_last: np.ndarray | None = None
        self._last: np.ndarray | None = None

    def hold(self) -> np.ndarray:
        """10 copies of the last emitted frame (rest pose at stream start)."""
        pose = self._last if self._last is not None else self.rest_pose
        out = np.tile(pose, (WORKING_FRAMES, 1))
        self._note_emitted(out)
        return out

    def speech(self, kept: np.ndarray) -> np.ndarray:
        """Pass one batch of kept frames through seam smoothing (if enabled)."""
        kept = np.asarray(kept, dtype=np.float64)
        if self.smoothing:
            tail = None if self._last is None else (self._second_last, self._last)
            out = smooth_seam(tail, kept)
            # The velocity-extrapolating control point can push B(t) past the
            # normalized range near extremes; published frames must stay in
            # [-1, 1]. In-range values pass through clip untouched, so the
            # exact-endpoint guarantees survive.
            np.clip(out, -1.0, 1.0, out=out)
        else:
            out = kept.copy()
        self._note_emitted(out)
        return out

    def _note_emitted(self, frames: np.ndarray) -> None:
        self._second_last = frames[-2].copy()
        self._last = frames[-1].copy()
