"""Inference over raw 10-band patches, down to mask files.

Predicted masks use the same single-band uint8 0/1 TIFF encoding as the
masks the tiling pipeline writes, so they feed the producer's evaluation
tooling unchanged.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import tifffile

from .config import NORMALIZATION_DIVISOR, PATCH_BAND_ORDER, UNetConfig
from .data import band_indices


def probabilities(model, config: UNetConfig, cube: np.ndarray) -> np.ndarray:
    """Per-pixel fire probability for one raw patch cube.

    Args:
        model: a built network matching ``config``.
        config: variant description; its band_subset picks channels out of
            the 10-band cube.
        cube: (10, height, width) DN array as stored in patch TIFFs.

    Returns:
        float32 (height, width) probabilities in [0, 1].

    Raises:
        ValueError: cube is not a 10-band stack, or the model input width
            does not match the config.
    """
    cube = np.asarray(cube)
    if cube.ndim != 3 or cube.shape[0] != len(PATCH_BAND_ORDER):
        raise ValueError(f"expected a {len(PATCH_BAND_ORDER)}-band patch cube, got shape {cube.shape}")
    model_channels = int(model.input.shape[-1])
    if model_channels != config.input_channels:
        raise ValueError(
            f"model takes {model_channels} channels but config says {config.input_channels}"
        )
    selected = cube[list(band_indices(config.band_subset))]
    hwc = np.transpose(selected, (1, 2, 0)).astype(np.float32) / np.float32(NORMALIZATION_DIVISOR)
    probs = model.predict(hwc[np.newaxis], verbose=0)[0, :, :, 0]
    return np.asarray(probs, dtype=np.float32)


def binarize(probs: np.ndarray, threshold: float) -> np.ndarray:
    """Strictly-greater-than cut: a pixel exactly at the threshold stays 0."""
    return np.asarray(probs) > threshold


def predict_mask(
    model, config: UNetConfig, cube: np.ndarray, threshold: float | None = None
) -> np.ndarray:
    """Binary fire mask for one raw patch cube.

    The cut defaults to the config's threshold and is strict: probability
    exactly equal to it yields 0.
    """
    cut = config.threshold if threshold is None else threshold
    return binarize(probabilities(model, config, cube), cut)


def write_mask(path: str | Path, mask: np.ndarray) -> Path:
    """Write a boolean mask as a single-band 8-bit TIFF with values 0/1."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tifffile.imwrite(path, np.asarray(mask).astype(np.uint8))
    return path
