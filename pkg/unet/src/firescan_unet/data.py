"""Readers for the patch dataset produced by the tiling pipeline.

The only coupling to the producer is the file contract: a manifest CSV with
a fixed column prefix plus one ``fire_<label>`` count column per mask, named
patches as multi-page uint16 TIFFs, and 0/1 uint8 mask TIFFs alongside.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tifffile

from .config import NORMALIZATION_DIVISOR, PATCH_BAND_ORDER

MANIFEST_FIXED_COLUMNS = (
    "patch_id",
    "scene_id",
    "tile_row",
    "tile_col",
    "pixel_x",
    "pixel_y",
    "valid_fraction",
)


@dataclass(frozen=True)
class ManifestIndex:
    """Patch ids and the mask labels a manifest provides."""

    patch_ids: tuple[str, ...]
    labels: tuple[str, ...]


def read_manifest(path: str | Path) -> ManifestIndex:
    """Read patch ids and mask labels from a manifest CSV.

    Raises:
        ValueError: header or row shape does not match the manifest contract.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"manifest is empty: {path}")
    header = rows[0]
    fixed = list(MANIFEST_FIXED_COLUMNS)
    if header[: len(fixed)] != fixed:
        raise ValueError(f"manifest header does not start with {fixed}: {path}")
    extra = header[len(fixed) :]
    bad = [col for col in extra if not col.startswith("fire_")]
    if bad:
        raise ValueError(f"unexpected manifest columns {bad}: {path}")
    labels = tuple(col[len("fire_") :] for col in extra)

    ids = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"manifest row {k} has {len(row)} fields, expected {len(header)}")
        ids.append(row[0])
    return ManifestIndex(patch_ids=tuple(ids), labels=labels)


def band_indices(band_subset: tuple[int, ...]) -> tuple[int, ...]:
    """Positions of the requested channels inside a patch cube."""
    missing = [b for b in band_subset if b not in PATCH_BAND_ORDER]
    if missing:
        raise ValueError(f"channels not present in patches: {missing}")
    return tuple(PATCH_BAND_ORDER.index(b) for b in band_subset)


def load_patch(path: str | Path, band_subset: tuple[int, ...]) -> np.ndarray:
    """Read one patch as float32 (height, width, channels) scaled into [0, 1]."""
    cube = np.asarray(tifffile.imread(Path(path)))
    if cube.ndim == 2:
        cube = cube[np.newaxis]
    if cube.ndim != 3 or cube.shape[0] != len(PATCH_BAND_ORDER):
        raise ValueError(
            f"expected a {len(PATCH_BAND_ORDER)}-band patch cube, got shape {cube.shape}: {path}"
        )
    selected = cube[list(band_indices(band_subset))]
    hwc = np.transpose(selected, (1, 2, 0)).astype(np.float32)
    return hwc / np.float32(NORMALIZATION_DIVISOR)


def load_mask(path: str | Path) -> np.ndarray:
    """Read one mask as float32 (height, width, 1) of zeros and ones."""
    grid = np.asarray(tifffile.imread(Path(path)))
    if grid.ndim != 2:
        raise ValueError(f"mask TIFF is not single-band: {path}")
    return (grid != 0).astype(np.float32)[:, :, np.newaxis]


def load_dataset(
    patches_dir: str | Path,
    manifest: str | Path | ManifestIndex,
    label: str,
    band_subset: tuple[int, ...],
) -> tuple[np.ndarray, np.ndarray]:
    """Load every patch and its mask for one label into memory.

    Returns:
        (x, y): float32 arrays shaped (n, height, width, channels) and
        (n, height, width, 1).

    Raises:
        ValueError: unknown label or an empty manifest.
        FileNotFoundError: a listed patch or mask file is missing.
    """
    patches_dir = Path(patches_dir)
    if not isinstance(manifest, ManifestIndex):
        manifest = read_manifest(manifest)
    if label not in manifest.labels:
        raise ValueError(f"label {label!r} not in manifest (has {list(manifest.labels)})")
    if not manifest.patch_ids:
        raise ValueError("manifest lists no patches")

    xs, ys = [], []
    for pid in manifest.patch_ids:
        patch_path = patches_dir / f"{pid}.tif"
        mask_path = patches_dir / f"{pid}_{label}.tif"
        for p in (patch_path, mask_path):
            if not p.exists():
                raise FileNotFoundError(f"manifest references a missing file: {p}")
        xs.append(load_patch(patch_path, band_subset))
        ys.append(load_mask(mask_path))
    return np.stack(xs), np.stack(ys)
