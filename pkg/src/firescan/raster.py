"""Scene loading and raster primitives.

A scene is a directory holding one 16-bit single-band TIFF per channel plus a
flat ``KEY = VALUE`` metadata text file carrying the radiometric rescale
coefficients and acquisition info. Channels follow the Landsat-8 layout:
reflective channels 1-7 and 9, thermal channels 10 and 11. The panchromatic
channel 8 is never used.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tifffile

from .errors import SceneFormatError

REFLECTIVE_CHANNELS = (1, 2, 3, 4, 5, 6, 7, 9)
THERMAL_CHANNELS = (10, 11)
BAND_ORDER = (1, 2, 3, 4, 5, 6, 7, 9, 10, 11)

# 16-bit ceiling used as the radiometric saturation sentinel.
SATURATION_DN = 65535

_BAND_FILE_RE = re.compile(r".*_B(\d{1,2})\.TIFF?$", re.IGNORECASE)
_META_LINE_RE = re.compile(r"^\s*([A-Z0-9_]+)\s*=\s*(.+?)\s*$")

_SCALAR_KEYS = ("LANDSAT_SCENE_ID", "WRS_PATH", "WRS_ROW", "DATE_ACQUIRED", "SUN_ELEVATION")


@dataclass
class Scene:
    """One acquisition: per-channel DN grids plus radiometric metadata.

    Attributes:
        scene_id: acquisition identifier, used as the stem for output files.
        wrs_path: worldwide-reference-system path of the footprint.
        wrs_row: worldwide-reference-system row of the footprint.
        acquisition_date: ISO-8601 date string.
        sun_elevation_deg: scene-level solar elevation in degrees.
        bands: channel index -> 2-D uint16 DN grid. All grids share one shape.
        refl_mult: channel -> multiplicative reflectance rescale coefficient.
        refl_add: channel -> additive reflectance rescale coefficient.
    """

    scene_id: str
    wrs_path: int
    wrs_row: int
    acquisition_date: str
    sun_elevation_deg: float
    bands: dict[int, np.ndarray]
    refl_mult: dict[int, float] = field(default_factory=dict)
    refl_add: dict[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.bands:
            raise SceneFormatError("scene has no bands")
        shape = None
        for ch, grid in self.bands.items():
            if ch == 8:
                raise SceneFormatError("channel 8 is not supported")
            if grid.ndim != 2:
                raise SceneFormatError(f"band for channel {ch} is not a 2-D grid")
            if grid.dtype != np.uint16:
                raise SceneFormatError(f"band for channel {ch} is not uint16")
            if shape is None:
                shape = grid.shape
            elif grid.shape != shape:
                raise SceneFormatError(
                    f"band for channel {ch} has shape {grid.shape[1]}x{grid.shape[0]}, "
                    f"expected {shape[1]}x{shape[0]}"
                )
        for ch in self.reflective_channels:
            if ch not in self.refl_mult:
                raise SceneFormatError(f"missing refl_mult entry for channel {ch}")
            if ch not in self.refl_add:
                raise SceneFormatError(f"missing refl_add entry for channel {ch}")

    @property
    def height(self) -> int:
        return next(iter(self.bands.values())).shape[0]

    @property
    def width(self) -> int:
        return next(iter(self.bands.values())).shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def reflective_channels(self) -> tuple[int, ...]:
        return tuple(ch for ch in REFLECTIVE_CHANNELS if ch in self.bands)

    def band(self, channel: int) -> np.ndarray:
        try:
            return self.bands[channel]
        except KeyError:
            raise SceneFormatError(f"channel {channel} not present in scene") from None


def _parse_metadata(path: Path) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for line in path.read_text().splitlines():
        m = _META_LINE_RE.match(line)
        if m is None:
            continue
        key, value = m.group(1), m.group(2)
        if key in ("GROUP", "END_GROUP"):
            continue
        pairs[key] = value.strip().strip('"')
    return pairs


def _meta_float(pairs: dict[str, str], key: str) -> float:
    if key not in pairs:
        raise SceneFormatError(f"metadata key {key} missing")
    try:
        return float(pairs[key])
    except ValueError:
        raise SceneFormatError(f"metadata key {key} is not numeric: {pairs[key]!r}") from None


def _meta_int(pairs: dict[str, str], key: str) -> int:
    return int(_meta_float(pairs, key))


def _find_metadata_file(scene_dir: Path) -> Path:
    txts = sorted(p for p in scene_dir.iterdir() if p.suffix.lower() == ".txt")
    mtl = [p for p in txts if "MTL" in p.name.upper()]
    if len(mtl) == 1:
        return mtl[0]
    if not mtl and len(txts) == 1:
        return txts[0]
    if not txts:
        raise SceneFormatError(f"no metadata text file in {scene_dir}")
    raise SceneFormatError(f"ambiguous metadata candidates in {scene_dir}: {[p.name for p in txts]}")


def _find_band_files(scene_dir: Path) -> dict[int, Path]:
    found: dict[int, Path] = {}
    for p in sorted(scene_dir.iterdir()):
        m = _BAND_FILE_RE.match(p.name)
        if m is None:
            continue
        ch = int(m.group(1))
        if ch in found:
            raise SceneFormatError(f"multiple band files for channel {ch} in {scene_dir}")
        found[ch] = p
    return found


def _read_band(path: Path, channel: int) -> np.ndarray:
    try:
        grid = tifffile.imread(path)
    except Exception as exc:
        raise SceneFormatError(f"unreadable TIFF for channel {channel}: {path.name} ({exc})") from exc
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise SceneFormatError(f"band file for channel {channel} is not single-band: {path.name}")
    if grid.dtype != np.uint16:
        raise SceneFormatError(
            f"band file for channel {channel} is {grid.dtype}, expected uint16: {path.name}"
        )
    return grid


def load_scene(scene_directory: str | Path) -> Scene:
    """Load a scene directory into memory.

    Expects one TIFF named ``*_B<n>.TIF`` per channel in 1-7 and 9-11 plus a
    metadata file providing REFLECTANCE_MULT_BAND_n / REFLECTANCE_ADD_BAND_n
    for every reflective channel along with SUN_ELEVATION, LANDSAT_SCENE_ID,
    WRS_PATH, WRS_ROW, and DATE_ACQUIRED. Band grids are loaded losslessly.

    Raises:
        SceneFormatError: missing band file or metadata key, inconsistent band
            dimensions, or an unreadable band TIFF. The message names the
            offending channel or key.
    """
    scene_dir = Path(scene_directory)
    if not scene_dir.is_dir():
        raise SceneFormatError(f"scene directory not found: {scene_dir}")

    band_paths = _find_band_files(scene_dir)
    bands: dict[int, np.ndarray] = {}
    for ch in BAND_ORDER:
        if ch not in band_paths:
            raise SceneFormatError(f"band file for channel {ch} not found in {scene_dir}")
        bands[ch] = _read_band(band_paths[ch], ch)

    pairs = _parse_metadata(_find_metadata_file(scene_dir))
    for key in _SCALAR_KEYS:
        if key not in pairs:
            raise SceneFormatError(f"metadata key {key} missing")

    refl_mult = {ch: _meta_float(pairs, f"REFLECTANCE_MULT_BAND_{ch}") for ch in REFLECTIVE_CHANNELS}
    refl_add = {ch: _meta_float(pairs, f"REFLECTANCE_ADD_BAND_{ch}") for ch in REFLECTIVE_CHANNELS}

    return Scene(
        scene_id=pairs["LANDSAT_SCENE_ID"],
        wrs_path=_meta_int(pairs, "WRS_PATH"),
        wrs_row=_meta_int(pairs, "WRS_ROW"),
        acquisition_date=pairs["DATE_ACQUIRED"],
        sun_elevation_deg=_meta_float(pairs, "SUN_ELEVATION"),
        bands=bands,
        refl_mult=refl_mult,
        refl_add=refl_add,
    )


def write_scene(scene: Scene, directory: str | Path) -> Path:
    """Write a scene back to disk in the layout load_scene expects.

    Returns the directory path. Round-tripping through write_scene and
    load_scene reproduces DN grids bit-exactly.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for ch, grid in scene.bands.items():
        tifffile.imwrite(out / f"{scene.scene_id}_B{ch}.TIF", grid)
    lines = [f'LANDSAT_SCENE_ID = "{scene.scene_id}"']
    lines.append(f"WRS_PATH = {scene.wrs_path}")
    lines.append(f"WRS_ROW = {scene.wrs_row}")
    lines.append(f"DATE_ACQUIRED = {scene.acquisition_date}")
    lines.append(f"SUN_ELEVATION = {scene.sun_elevation_deg!r}")
    for ch in scene.reflective_channels:
        lines.append(f"REFLECTANCE_MULT_BAND_{ch} = {scene.refl_mult[ch]!r}")
        lines.append(f"REFLECTANCE_ADD_BAND_{ch} = {scene.refl_add[ch]!r}")
    (out / f"{scene.scene_id}_MTL.txt").write_text("\n".join(lines) + "\n")
    return out


def nodata_mask(scene: Scene) -> np.ndarray:
    """Boolean grid, True where the pixel carries no data.

    A pixel is nodata iff its DN is 0 in every reflective channel present.
    Footprint borders of rotated acquisitions are filled this way; they must
    not enter window statistics.
    """
    nonzero = np.zeros(scene.shape, dtype=bool)
    for ch in scene.reflective_channels:
        nonzero |= scene.bands[ch] != 0
    return ~nonzero


def saturation_mask(scene: Scene, channel: int) -> np.ndarray:
    """Boolean grid, True where the channel's DN sits at the 16-bit ceiling."""
    return scene.band(channel) == SATURATION_DN


def write_mask(path: str | Path, mask: np.ndarray) -> Path:
    """Write a boolean mask as a single-band 8-bit TIFF with values 0/1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tifffile.imwrite(path, mask.astype(np.uint8))
    return path


def read_mask(path: str | Path) -> np.ndarray:
    """Read a 0/1 mask TIFF back to a boolean grid."""
    try:
        grid = tifffile.imread(Path(path))
    except Exception as exc:
        raise SceneFormatError(f"unreadable mask TIFF: {path} ({exc})") from exc
    if grid.ndim != 2:
        raise SceneFormatError(f"mask TIFF is not single-band: {path}")
    return np.asarray(grid) != 0


def write_patch(path: str | Path, cube: np.ndarray) -> Path:
    """Write a (channels, height, width) uint16 cube as a multi-page TIFF."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tifffile.imwrite(path, np.ascontiguousarray(cube), photometric="minisblack")
    return path


def read_patch(path: str | Path) -> np.ndarray:
    """Read a multi-page patch TIFF back to a (channels, height, width) cube."""
    try:
        cube = tifffile.imread(Path(path))
    except Exception as exc:
        raise SceneFormatError(f"unreadable patch TIFF: {path} ({exc})") from exc
    cube = np.asarray(cube)
    if cube.ndim == 2:
        cube = cube[np.newaxis, :, :]
    return cube
