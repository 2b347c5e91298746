"""Bundled placeholder calibration data.

The normalization spec and rig here are synthetic: plausible midsagittal
millimeter ranges chosen so that the all-zero normalized rest pose lands on
the rig's rest geometry. Replace both with speaker-specific files (see
README) before interpreting positions as physiology.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .ema import NormSpec
from .kinematics import RigConfig


def _data_path(name: str):
    return resources.files("artistream.data").joinpath(name)


@lru_cache(maxsize=1)
def default_norm_spec() -> NormSpec:
    with resources.as_file(_data_path("normspec_synthetic.json")) as path:
        return NormSpec.from_json(path)


@lru_cache(maxsize=1)
def default_rig() -> RigConfig:
    with resources.as_file(_data_path("rig_default.json")) as path:
        return RigConfig.from_json(path)
