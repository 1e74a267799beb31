"""Whole-scene detection driver.

Scenes at full acquisition size (7k x 8k pixels) do not fit in memory once
several float64 working grids exist side by side, so detection streams the
scene in horizontal chunks. Each chunk carries a halo wide enough to cover
every spatial dependency of the detectors (window statistics reach 30 pixels,
neighbor promotion 1), which makes the stitched result equal to a
whole-scene pass. Chunk geometry is fixed by the scene dimensions alone, so
the output is independent of the worker-thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from . import detectors
from .detectors import DETECTOR_NAMES, DetectorReport
from .raster import Scene, saturation_mask
from .reflectance import to_reflectance

# Widest spatial dependency: 61x61 window statistics (30 px) chained with one
# 3x3 dilation (1 px). 32 keeps a margin.
HALO = 32

DEFAULT_CHUNK_ROWS = 512

# detector -> (needs solar correction, channels consumed)
_STACK_POLICY: dict[str, tuple[bool, tuple[int, ...]]] = {
    "schroeder": (False, (1, 2, 3, 4, 5, 6, 7)),
    "murphy": (True, (5, 6, 7)),
    "kumarroy": (True, (2, 3, 4, 5, 6, 7)),
}


def _slice_scene(scene: Scene, row0: int, row1: int) -> Scene:
    """View of a horizontal slab of a scene. Band grids are numpy views."""
    return Scene(
        scene_id=scene.scene_id,
        wrs_path=scene.wrs_path,
        wrs_row=scene.wrs_row,
        acquisition_date=scene.acquisition_date,
        sun_elevation_deg=scene.sun_elevation_deg,
        bands={ch: grid[row0:row1] for ch, grid in scene.bands.items()},
        refl_mult=scene.refl_mult,
        refl_add=scene.refl_add,
    )


def run_stages(scene: Scene, algo: str) -> dict[str, np.ndarray]:
    """Run one detector over one in-memory scene, returning its stage masks."""
    try:
        corrected, channels = _STACK_POLICY[algo]
    except KeyError:
        raise ValueError(f"unknown detector {algo!r}; expected one of {DETECTOR_NAMES}") from None
    stack = to_reflectance(scene, correct_solar=corrected, channels=channels)
    if algo == "schroeder":
        return detectors.schroeder_stages(stack)
    if algo == "murphy":
        return detectors.murphy_stages(stack, saturation_mask(scene, 6), saturation_mask(scene, 7))
    return detectors.kumarroy_stages(stack)


def _chunk_bounds(height: int, chunk_rows: int) -> list[tuple[int, int]]:
    return [(r0, min(r0 + chunk_rows, height)) for r0 in range(0, height, chunk_rows)]


def detect_scene(
    scene: Scene,
    algos: Sequence[str] | Iterable[str],
    threads: int = 1,
    chunk_rows: int = DEFAULT_CHUNK_ROWS,
) -> dict[str, tuple[np.ndarray, DetectorReport]]:
    """Run the selected detectors over a scene.

    Returns {algo: (fire mask, stage report)} in the order requested. Results
    are bit-identical for any thread count; threads only spread independent
    chunks over workers.
    """
    algos = list(algos)
    if not algos:
        raise ValueError("no detectors selected")
    for algo in algos:
        if algo not in _STACK_POLICY:
            raise ValueError(f"unknown detector {algo!r}; expected one of {DETECTOR_NAMES}")
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")

    height, width = scene.shape
    if height <= chunk_rows + HALO:
        out: dict[str, tuple[np.ndarray, DetectorReport]] = {}
        for algo in algos:
            stages = run_stages(scene, algo)
            out[algo] = detectors.finish_stages(algo, stages)
        return out

    bounds = _chunk_bounds(height, chunk_rows)
    fire = {algo: np.zeros((height, width), dtype=bool) for algo in algos}
    counts: dict[str, dict[str, int]] = {algo: {} for algo in algos}

    def _run_chunk(task: tuple[str, int]) -> tuple[str, int, dict[str, int], np.ndarray]:
        algo, idx = task
        core0, core1 = bounds[idx]
        lo = max(0, core0 - HALO)
        hi = min(height, core1 + HALO)
        stages = run_stages(_slice_scene(scene, lo, hi), algo)
        local = slice(core0 - lo, core1 - lo)
        chunk_counts = {
            stage: int(np.count_nonzero(mask[local]))
            for stage, mask in stages.items()
            if stage != "fire"
        }
        return algo, idx, chunk_counts, stages["fire"][local].copy()

    tasks = [(algo, idx) for algo in algos for idx in range(len(bounds))]
    if threads == 1:
        results = [_run_chunk(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_chunk, tasks))

    # Stitch in task order so stage-count dict ordering is reproducible.
    for algo, idx, chunk_counts, fire_core in results:
        core0, core1 = bounds[idx]
        fire[algo][core0:core1] = fire_core
        acc = counts[algo]
        for stage, value in chunk_counts.items():
            acc[stage] = acc.get(stage, 0) + value

    return {
        algo: (
            fire[algo],
            DetectorReport(
                detector=algo,
                stage_counts=counts[algo],
                fire_count=int(np.count_nonzero(fire[algo])),
            ),
        )
        for algo in algos
    }
