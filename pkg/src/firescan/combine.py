"""Fusion of fire masks by intersection and k-of-n voting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MaskSet:
    """An ordered collection of aligned fire masks with unique labels."""

    masks: list[np.ndarray]
    labels: list[str]

    def __post_init__(self) -> None:
        if not self.masks:
            raise ValueError("mask set must contain at least one mask")
        if len(self.masks) != len(self.labels):
            raise ValueError(f"{len(self.masks)} masks but {len(self.labels)} labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate mask labels: {self.labels}")
        shape = self.masks[0].shape
        for label, mask in zip(self.labels, self.masks):
            if mask.shape != shape:
                raise ValueError(
                    f"mask {label!r} shape {mask.shape} does not match {shape}"
                )
            if mask.dtype != bool:
                raise ValueError(f"mask {label!r} must be boolean, got {mask.dtype}")

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.masks[0].shape


def intersect(mask_set: MaskSet) -> np.ndarray:
    """Fire where every mask marks fire."""
    out = mask_set.masks[0].copy()
    for mask in mask_set.masks[1:]:
        out &= mask
    return out


def vote(mask_set: MaskSet, threshold_k: int = 2) -> np.ndarray:
    """Fire where at least threshold_k masks mark fire.

    k=1 is the union, k=len(mask_set) the intersection.

    Raises:
        ValueError: threshold_k outside [1, number of masks].
    """
    n = len(mask_set)
    if not 1 <= threshold_k <= n:
        raise ValueError(f"threshold_k={threshold_k} out of range for {n} masks")
    votes = np.zeros(mask_set.shape, dtype=np.int32)
    for mask in mask_set.masks:
        votes += mask
    return votes >= threshold_k
