"""DN to top-of-atmosphere reflectance conversion.

Each reflective channel is rescaled with the per-band affine coefficients
from the scene metadata, rho = M * DN + A, optionally divided by the sine of
the scene solar elevation. Values are never clamped: the detector conditions
compare raw reflectance, and clamping would silently move pixels across
thresholds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import FirescanError
from .raster import REFLECTIVE_CHANNELS, Scene, nodata_mask


@dataclass
class ReflectanceStack:
    """Per-channel float64 reflectance grids plus a shared validity mask.

    solar_corrected records whether every value was divided by
    sin(sun_elevation). Detectors check the flag against their own policy.
    Values at invalid pixels are unspecified; consumers must gate on `valid`.
    """

    channels: dict[int, np.ndarray]
    valid: np.ndarray
    solar_corrected: bool

    def __post_init__(self) -> None:
        if not self.channels:
            raise FirescanError("reflectance stack has no channels")
        for ch, grid in self.channels.items():
            if grid.shape != self.valid.shape:
                raise FirescanError(f"channel {ch} grid does not match validity mask shape")
            if grid.dtype != np.float64:
                raise FirescanError(f"channel {ch} grid is {grid.dtype}, expected float64")
        if self.valid.dtype != bool:
            raise FirescanError("validity mask must be boolean")

    @property
    def shape(self) -> tuple[int, int]:
        return self.valid.shape

    def band(self, channel: int) -> np.ndarray:
        try:
            return self.channels[channel]
        except KeyError:
            raise FirescanError(f"channel {channel} not present in reflectance stack") from None


def to_reflectance(
    scene: Scene,
    correct_solar: bool,
    channels: Iterable[int] | None = None,
) -> ReflectanceStack:
    """Convert a scene's reflective channels to TOA reflectance.

    Args:
        scene: source scene.
        correct_solar: divide by sin(sun_elevation_deg) when True. Requires a
            positive sun elevation.
        channels: subset of reflective channels to convert; defaults to every
            reflective channel present in the scene.

    Returns:
        ReflectanceStack with float64 grids. The validity mask is the
        complement of the scene nodata mask regardless of the channel subset.
    """
    if channels is None:
        selected = scene.reflective_channels
    else:
        selected = tuple(channels)
    if not selected:
        raise ValueError("no channels selected for reflectance conversion")
    for ch in selected:
        if ch not in REFLECTIVE_CHANNELS:
            raise ValueError(f"channel {ch} is not reflective; rescale undefined")

    scale = 1.0
    if correct_solar:
        if scene.sun_elevation_deg <= 0:
            raise ValueError(
                f"solar correction requires positive sun elevation, got {scene.sun_elevation_deg}"
            )
        scale = math.sin(math.radians(scene.sun_elevation_deg))

    grids: dict[int, np.ndarray] = {}
    for ch in selected:
        dn = scene.band(ch).astype(np.float64)
        rho = scene.refl_mult[ch] * dn + scene.refl_add[ch]
        if correct_solar:
            rho = rho / scale
        grids[ch] = rho

    return ReflectanceStack(channels=grids, valid=~nodata_mask(scene), solar_corrected=correct_solar)
