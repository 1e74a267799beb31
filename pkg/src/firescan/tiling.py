"""Scene tiling into 256x256 training patches plus manifest utilities.

Tiles are laid out on a non-overlapping grid anchored at the scene origin.
Edge tiles are zero-padded to the full patch size; zero DN in every
reflective channel is the nodata convention, so padding never counts as
valid data and never contributes fire pixels.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .combine import MaskSet
from .errors import ManifestFormatError
from .raster import BAND_ORDER, Scene, nodata_mask, write_mask, write_patch

PATCH_SIZE = 256

MANIFEST_FIXED_COLUMNS = (
    "patch_id",
    "scene_id",
    "tile_row",
    "tile_col",
    "pixel_x",
    "pixel_y",
    "valid_fraction",
)


@dataclass
class PatchRecord:
    """One tile's identity, placement, validity, and per-label fire counts."""

    patch_id: str
    scene_id: str
    tile_row: int
    tile_col: int
    pixel_x: int
    pixel_y: int
    valid_fraction: float
    fire_counts: dict[str, int] = field(default_factory=dict)


@dataclass
class Manifest:
    """Index of generated patches. Label order fixes the CSV column order."""

    records: list[PatchRecord]
    labels: list[str]
    patch_size: int = PATCH_SIZE
    band_order: tuple[int, ...] = BAND_ORDER


def tile_scene(
    scene: Scene,
    masks: MaskSet,
    out_dir: str | Path,
    skip_empty: bool = True,
) -> Manifest:
    """Cut a scene and its masks into non-overlapping 256x256 patches.

    Writes one 10-band 16-bit multi-page TIFF per tile, named
    ``<scene_id>_r<row>_c<col>.tif``, plus one 8-bit 0/1 mask TIFF per mask
    label, named ``<patch_id>_<label>.tif``. When skip_empty is true, tiles
    whose valid fraction is exactly 0 are not written or recorded.

    Raises:
        ValueError: mask dimensions do not match the scene.
        SceneFormatError: a channel required by the band order is missing.
    """
    if masks.shape != scene.shape:
        raise ValueError(f"mask shape {masks.shape} does not match scene {scene.shape}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    bands = [scene.band(ch) for ch in BAND_ORDER]
    valid = ~nodata_mask(scene)
    height, width = scene.shape
    n_rows = math.ceil(height / PATCH_SIZE)
    n_cols = math.ceil(width / PATCH_SIZE)
    area = PATCH_SIZE * PATCH_SIZE

    records: list[PatchRecord] = []
    for tile_row in range(n_rows):
        y0 = tile_row * PATCH_SIZE
        y1 = min(y0 + PATCH_SIZE, height)
        for tile_col in range(n_cols):
            x0 = tile_col * PATCH_SIZE
            x1 = min(x0 + PATCH_SIZE, width)

            valid_count = int(np.count_nonzero(valid[y0:y1, x0:x1]))
            valid_fraction = valid_count / area
            if skip_empty and valid_count == 0:
                continue

            cube = np.zeros((len(BAND_ORDER), PATCH_SIZE, PATCH_SIZE), dtype=np.uint16)
            for k, band in enumerate(bands):
                cube[k, : y1 - y0, : x1 - x0] = band[y0:y1, x0:x1]

            patch_id = f"{scene.scene_id}_r{tile_row}_c{tile_col}"
            write_patch(out / f"{patch_id}.tif", cube)

            fire_counts: dict[str, int] = {}
            for label, mask in zip(masks.labels, masks.masks):
                tile_mask = np.zeros((PATCH_SIZE, PATCH_SIZE), dtype=bool)
                tile_mask[: y1 - y0, : x1 - x0] = mask[y0:y1, x0:x1]
                fire_counts[label] = int(np.count_nonzero(tile_mask))
                write_mask(out / f"{patch_id}_{label}.tif", tile_mask)

            records.append(
                PatchRecord(
                    patch_id=patch_id,
                    scene_id=scene.scene_id,
                    tile_row=tile_row,
                    tile_col=tile_col,
                    pixel_x=x0,
                    pixel_y=y0,
                    valid_fraction=valid_fraction,
                    fire_counts=fire_counts,
                )
            )

    return Manifest(records=records, labels=list(masks.labels))


def manifest_to_csv(manifest: Manifest) -> str:
    """Serialize a manifest with the fixed header plus one fire column per label."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(MANIFEST_FIXED_COLUMNS) + [f"fire_{label}" for label in manifest.labels])
    for rec in manifest.records:
        writer.writerow(
            [
                rec.patch_id,
                rec.scene_id,
                rec.tile_row,
                rec.tile_col,
                rec.pixel_x,
                rec.pixel_y,
                repr(rec.valid_fraction),
            ]
            + [rec.fire_counts[label] for label in manifest.labels]
        )
    return buf.getvalue()


def write_manifest(manifest: Manifest, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest_to_csv(manifest))
    return path


def read_manifest(path: str | Path) -> Manifest:
    """Parse a manifest CSV written by write_manifest."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestFormatError(f"manifest is empty: {path}") from None
        if tuple(header[: len(MANIFEST_FIXED_COLUMNS)]) != MANIFEST_FIXED_COLUMNS:
            raise ManifestFormatError(f"unexpected manifest header in {path}: {header}")
        labels = []
        for col in header[len(MANIFEST_FIXED_COLUMNS) :]:
            if not col.startswith("fire_"):
                raise ManifestFormatError(f"unexpected manifest column {col!r} in {path}")
            labels.append(col[len("fire_") :])
        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ManifestFormatError(f"malformed manifest row {line_no} in {path}")
            try:
                records.append(
                    PatchRecord(
                        patch_id=row[0],
                        scene_id=row[1],
                        tile_row=int(row[2]),
                        tile_col=int(row[3]),
                        pixel_x=int(row[4]),
                        pixel_y=int(row[5]),
                        valid_fraction=float(row[6]),
                        fire_counts={
                            label: int(value) for label, value in zip(labels, row[7:])
                        },
                    )
                )
            except ValueError as exc:
                raise ManifestFormatError(
                    f"malformed manifest row {line_no} in {path}: {exc}"
                ) from None
    return Manifest(records=records, labels=labels)


@dataclass
class HistogramBucket:
    """Half-open count interval [lo, hi); hi None means unbounded above."""

    label: str
    lo: int
    hi: int | None
    count: int


@dataclass
class Histogram:
    mask_label: str
    buckets: list[HistogramBucket]


DEFAULT_BUCKET_EDGES = (1, 10, 100, 1000)


def fire_histogram(
    manifest: Manifest,
    label: str,
    bucket_edges: tuple[int, ...] = DEFAULT_BUCKET_EDGES,
) -> Histogram:
    """Histogram of patches per fire-pixel count for one mask label.

    Zero-fire patches always land in an explicit "0" bucket. Remaining
    buckets are the half-open intervals between consecutive edges plus an
    unbounded top bucket, so every record lands in exactly one bucket.

    Raises:
        ManifestFormatError: label not present in the manifest.
        ValueError: edges not strictly increasing positive integers.
    """
    if label not in manifest.labels:
        raise ManifestFormatError(
            f"label {label!r} not in manifest (has {manifest.labels})"
        )
    edges = tuple(int(e) for e in bucket_edges)
    if not edges or any(b <= a for a, b in zip(edges, edges[1:])) or edges[0] < 1:
        raise ValueError(f"bucket edges must be strictly increasing and >= 1: {bucket_edges}")

    bounds: list[tuple[int, int | None]] = [(0, 1)]
    if edges[0] > 1:
        bounds.append((1, edges[0]))
    bounds.extend((edges[k], edges[k + 1]) for k in range(len(edges) - 1))
    bounds.append((edges[-1], None))

    counts = [0] * len(bounds)
    for rec in manifest.records:
        n = rec.fire_counts[label]
        for k, (lo, hi) in enumerate(bounds):
            if n >= lo and (hi is None or n < hi):
                counts[k] += 1
                break

    buckets = []
    for (lo, hi), count in zip(bounds, counts):
        if lo == 0:
            name = "0"
        elif hi is None:
            name = f">={lo}"
        else:
            name = f"[{lo},{hi})"
        buckets.append(HistogramBucket(label=name, lo=lo, hi=hi, count=count))
    return Histogram(mask_label=label, buckets=buckets)


def histogram_to_csv(hist: Histogram) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("bucket", "count"))
    for b in hist.buckets:
        # Range labels contain commas and need CSV quoting.
        writer.writerow((b.label, b.count))
    return buf.getvalue()


def split_manifest(
    manifest: Manifest,
    fractions: tuple[float, float, float],
    seed: int,
) -> tuple[Manifest, Manifest, Manifest]:
    """Seeded shuffle followed by a contiguous train/val/test split.

    Train and val sizes are floor(n * fraction); the remainder goes to test,
    so the three parts always partition the records exactly.

    Raises:
        ValueError: fractions negative or not summing to 1 within 1e-9.
    """
    if len(fractions) != 3:
        raise ValueError(f"expected three fractions, got {fractions}")
    if any(f < 0 for f in fractions):
        raise ValueError(f"fractions must be non-negative: {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1: {fractions}")

    n = len(manifest.records)
    order = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(n * fractions[0])
    n_val = math.floor(n * fractions[1])

    def _take(indices) -> Manifest:
        return Manifest(
            records=[manifest.records[i] for i in indices],
            labels=list(manifest.labels),
            patch_size=manifest.patch_size,
            band_order=manifest.band_order,
        )

    return (
        _take(order[:n_train]),
        _take(order[n_train : n_train + n_val]),
        _take(order[n_train + n_val :]),
    )
