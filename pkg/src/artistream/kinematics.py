"""Millimeter EMA frames -> avatar pose.

The avatar's jaw is a hinge: vertical displacement of the lower incisor
drives a rotation angle theta about a fixed pivot (linear gain, clamped).
The displayed incisor is rig geometry rotated by theta, and the lower lip
rides the rotating jaw: its base position is the rest radius r swung by
theta, then translated by the streamed lip offsets. Tongue points and the
upper lip pass straight through from the frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ema import CHANNELS, Channel, EmaFrame, Space
from .errors import ConfigError

DEFAULT_JAW_GAIN = 0.02  # radians per mm of lower-incisor y displacement
DEFAULT_THETA_MAX = 0.45  # ~26 degrees


@dataclass(frozen=True)
class RigConfig:
    pivot: np.ndarray  # (2,) mm, lower incisor joint rotation center
    rest: np.ndarray  # (6, 2) mm, per-channel rest positions
    jaw_gain: float = DEFAULT_JAW_GAIN
    theta_max: float = DEFAULT_THETA_MAX
    # Rest angle of the lower-lip joint about the pivot; None derives it from
    # the rest geometry, which is what makes the rest pose map to itself.
    theta_rest_ll: float | None = None

    def __post_init__(self) -> None:
        pivot = np.array(self.pivot, dtype=np.float64)
        rest = np.array(self.rest, dtype=np.float64)
        if pivot.shape != (2,) or rest.shape != (len(CHANNELS), 2):
            raise ConfigError("rig needs pivot (2,) and rest (6, 2)")
        if not (np.all(np.isfinite(pivot)) and np.all(np.isfinite(rest))):
            raise ConfigError("rig geometry must be finite")
        if not math.isfinite(self.jaw_gain):
            raise ConfigError("jaw_gain must be finite")
        pivot.setflags(write=False)
        rest.setflags(write=False)
        object.__setattr__(self, "pivot", pivot)
        object.__setattr__(self, "rest", rest)
        if self.r <= 0:
            raise ConfigError("lower lip rest position must not coincide with the pivot")

    @property
    def r(self) -> float:
        """Distance from the pivot to the lower-lip rest position; always
        recomputed from the rest pose, never stored."""
        return float(np.linalg.norm(self.rest[Channel.LOWER_LIP.index] - self.pivot))

    @property
    def ll_rest_angle(self) -> float:
        if self.theta_rest_ll is not None:
            return self.theta_rest_ll
        dx, dy = self.rest[Channel.LOWER_LIP.index] - self.pivot
        return math.atan2(dy, dx)

    def rest_channel(self, channel: Channel) -> np.ndarray:
        return self.rest[channel.index]

    @classmethod
    def from_json(cls, path: str | Path) -> "RigConfig":
        """Schema: {"pivot":[x,y], "jaw_gain":g, "theta_max":t,
        "theta_rest_ll":a|null, "rest":{"TT":[x,y], ...}}."""
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read rig config {path}: {exc}") from exc
        try:
            rest = np.array([raw["rest"][ch] for ch in CHANNELS], dtype=np.float64)
            theta_rest = raw.get("theta_rest_ll")
            return cls(
                pivot=np.array(raw["pivot"], dtype=np.float64),
                rest=rest,
                jaw_gain=float(raw.get("jaw_gain", DEFAULT_JAW_GAIN)),
                theta_max=float(raw.get("theta_max", DEFAULT_THETA_MAX)),
                theta_rest_ll=None if theta_rest is None else float(theta_rest),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"rig config {path} is malformed: {exc}") from exc

    def to_json_dict(self) -> dict:
        return {
            "pivot": [float(v) for v in self.pivot],
            "jaw_gain": self.jaw_gain,
            "theta_max": self.theta_max,
            "theta_rest_ll": self.theta_rest_ll,
            "rest": {ch: [float(v) for v in self.rest[i]] for i, ch in enumerate(CHANNELS)},
        }


@dataclass(frozen=True)
class AvatarPose:
    """Render state: six 2D points (mm, canonical channel order) plus the
    jaw hinge angle."""

    points: np.ndarray  # (6, 2)
    theta: float
    seq: int
    speech: bool

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.shape != (len(CHANNELS), 2):
            raise ValueError(f"pose needs (6, 2) points, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("pose coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


def _require_mm(frame: EmaFrame) -> None:
    if frame.space is not Space.MILLIMETERS:
        raise ValueError("kinematics operates on millimeter frames")


def jaw_theta(frame: EmaFrame, rig: RigConfig) -> float:
    """theta = jaw_gain * (LIy - rest LIy), clamped to [-theta_max, theta_max]."""
    _require_mm(frame)
    rest_liy = rig.rest_channel(Channel.LOWER_INCISOR)[1]
    theta = rig.jaw_gain * (frame[Channel.LOWER_INCISOR.y] - rest_liy)
    return float(np.clip(theta, -rig.theta_max, rig.theta_max))


def rotate_about(point: np.ndarray, pivot: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    dx, dy = np.asarray(point, dtype=np.float64) - pivot
    return np.asarray(pivot, dtype=np.float64) + np.array([c * dx - s * dy, s * dx + c * dy])


def lower_lip_base(rig: RigConfig, theta: float) -> np.ndarray:
    """Global lower-lip joint position for a jaw angle: the rest radius r
    swung to angle (rest angle + theta) about the pivot.

    With a derived rest angle this is computed as a rotation of the rest
    point, which is the same arc but keeps theta=0 an exact identity
    (pivot + r*(cos, sin)(atan2(...)) would reintroduce rounding).
    """
    if rig.theta_rest_ll is None:
        return rotate_about(rig.rest_channel(Channel.LOWER_LIP), rig.pivot, theta)
    angle = rig.ll_rest_angle + theta
    return rig.pivot + rig.r * np.array([math.cos(angle), math.sin(angle)])


def lower_lip_position(frame: EmaFrame, rig: RigConfig) -> np.ndarray:
    """Jaw-rotated lip base plus the streamed lip offset from rest."""
    _require_mm(frame)
    theta = jaw_theta(frame, rig)
    offset = frame.points()[Channel.LOWER_LIP.index] - rig.rest_channel(Channel.LOWER_LIP)
    return lower_lip_base(rig, theta) + offset


def pose_from_frame(frame: EmaFrame, rig: RigConfig) -> AvatarPose:
    """TT/TB/TD/UL pass through; LI is rig rest rotated by theta; LL is
    realigned via lower_lip_position."""
    _require_mm(frame)
    theta = jaw_theta(frame, rig)
    points = frame.points().copy()
    points[Channel.LOWER_INCISOR.index] = rotate_about(
        rig.rest_channel(Channel.LOWER_INCISOR), rig.pivot, theta
    )
    points[Channel.LOWER_LIP.index] = lower_lip_position(frame, rig)
    return AvatarPose(points=points, theta=theta, seq=frame.seq, speech=frame.speech)
