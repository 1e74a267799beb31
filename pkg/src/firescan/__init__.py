"""firescan: active-fire detection for multispectral satellite scenes.

Pipeline: load 16-bit band rasters, convert to TOA reflectance, run the
Schroeder / Murphy / Kumar-Roy condition sets, fuse masks, tile scenes into
256x256 training patches, and evaluate predicted masks with global per-pixel
precision/recall/IoU/F.
"""

__version__ = "0.1.0"

from .combine import MaskSet, intersect, vote
from .context import (
    ExclusionSAT,
    WindowStats,
    adaptive_window_stats,
    build_exclusion_sat,
    window_stats,
)
from .detectors import (
    DetectorReport,
    kumarroy_detect,
    kumarroy_water,
    murphy_detect,
    ratio,
    schroeder_detect,
    schroeder_water,
)
from .errors import FirescanError, ManifestFormatError, SceneFormatError
from .metrics import EvalAccumulator, MetricsReport, accumulate, finalize, merge
from .pipeline import detect_scene
from .raster import (
    BAND_ORDER,
    REFLECTIVE_CHANNELS,
    SATURATION_DN,
    Scene,
    load_scene,
    nodata_mask,
    read_mask,
    read_patch,
    saturation_mask,
    write_mask,
    write_patch,
    write_scene,
)
from .reflectance import ReflectanceStack, to_reflectance
from .tiling import (
    Histogram,
    Manifest,
    PatchRecord,
    fire_histogram,
    read_manifest,
    split_manifest,
    tile_scene,
    write_manifest,
)

__all__ = [
    "BAND_ORDER",
    "DetectorReport",
    "EvalAccumulator",
    "ExclusionSAT",
    "FirescanError",
    "Histogram",
    "Manifest",
    "ManifestFormatError",
    "MaskSet",
    "MetricsReport",
    "PatchRecord",
    "REFLECTIVE_CHANNELS",
    "ReflectanceStack",
    "SATURATION_DN",
    "Scene",
    "SceneFormatError",
    "WindowStats",
    "accumulate",
    "adaptive_window_stats",
    "build_exclusion_sat",
    "detect_scene",
    "finalize",
    "fire_histogram",
    "intersect",
    "kumarroy_detect",
    "kumarroy_water",
    "load_scene",
    "merge",
    "murphy_detect",
    "nodata_mask",
    "ratio",
    "read_manifest",
    "read_mask",
    "read_patch",
    "saturation_mask",
    "schroeder_detect",
    "schroeder_water",
    "split_manifest",
    "tile_scene",
    "to_reflectance",
    "vote",
    "window_stats",
    "write_manifest",
    "write_mask",
    "write_patch",
    "write_scene",
]
