"""The three active-fire condition sets.

Each detector maps a ReflectanceStack to a boolean fire mask plus a stage
report. They share conventions:

  - rho_i is the TOA reflectance of channel i; R_ij = rho_i / rho_j.
  - A ratio with a non-positive denominator is undefined, and any clause
    consuming it evaluates false. Negative reflectance is sensor noise, and
    failing the clause is conservative against false alarms.
  - Fire is never reported at an invalid (nodata) pixel.
  - Background statistics exclude water, fire, and prospective-fire pixels;
    for ratio fields they also exclude pixels where the ratio is undefined.

The Schroeder set runs on uncorrected reflectance; the Murphy and Kumar-Roy
sets require the solar-elevation-corrected stack.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .context import adaptive_sides, build_exclusion_sat, window_stats_batch
from .errors import FirescanError
from .reflectance import ReflectanceStack

DETECTOR_NAMES = ("schroeder", "murphy", "kumarroy")

_NEIGHBORHOOD_8 = np.ones((3, 3), dtype=bool)


@dataclass
class DetectorReport:
    """Per-stage pixel totals emitted alongside a fire mask for observability."""

    detector: str
    stage_counts: dict[str, int] = field(default_factory=dict)
    fire_count: int = 0

    def lines(self) -> list[str]:
        out = [f"detector {self.detector}"]
        for stage, count in self.stage_counts.items():
            out.append(f"  {stage}: {count}")
        out.append(f"  fire: {self.fire_count}")
        return out


def ratio(stack: ReflectanceStack, i: int, j: int, pixel: tuple[int, int]) -> float | None:
    """R_ij = rho_i / rho_j at one pixel, or None when rho_j <= 0."""
    row, col = pixel
    denom = stack.band(j)[row, col]
    if denom <= 0:
        return None
    return float(stack.band(i)[row, col] / denom)


def ratio_field(stack: ReflectanceStack, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized R_ij plus its definedness mask.

    Returns (values, defined); values are 0 where undefined so they stay
    finite, and defined = valid AND rho_j > 0.
    """
    num = stack.band(i)
    den = stack.band(j)
    defined = stack.valid & (den > 0)
    values = np.zeros_like(num)
    np.divide(num, den, out=values, where=defined)
    return values, defined


def _require_channels(stack: ReflectanceStack, channels: tuple[int, ...], op: str) -> None:
    for ch in channels:
        if ch not in stack.channels:
            raise FirescanError(f"{op} requires channel {ch}, not present in stack")


def _require_correction(stack: ReflectanceStack, corrected: bool, op: str) -> None:
    if stack.solar_corrected != corrected:
        want = "solar-corrected" if corrected else "uncorrected"
        have = "solar-corrected" if stack.solar_corrected else "uncorrected"
        raise ValueError(f"{op} requires a {want} stack, got {have}")


def _dilate8(mask: np.ndarray) -> np.ndarray:
    """True within the 3x3 neighborhood of any true pixel (center included)."""
    return ndimage.binary_dilation(mask, structure=_NEIGHBORHOOD_8)


def _popcount(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask))


def schroeder_water(stack: ReflectanceStack) -> np.ndarray:
    """Water test used by the Schroeder conditions.

    (rho4 > rho5 > rho6 > rho7) and (rho1 - rho7 < 0.2) and
    ((rho3 > rho2) or (rho1 > rho2 > rho3 > rho4)), on uncorrected
    reflectance. False at invalid pixels.
    """
    _require_correction(stack, corrected=False, op="schroeder_water")
    _require_channels(stack, (1, 2, 3, 4, 5, 6, 7), "schroeder_water")
    p1 = stack.band(1)
    p2 = stack.band(2)
    p3 = stack.band(3)
    p4 = stack.band(4)
    p5 = stack.band(5)
    p6 = stack.band(6)
    p7 = stack.band(7)
    chain = (p4 > p5) & (p5 > p6) & (p6 > p7) & ((p1 - p7) < 0.2)
    branch = (p3 > p2) | ((p1 > p2) & (p2 > p3) & (p3 > p4))
    return stack.valid & chain & branch


def schroeder_stages(stack: ReflectanceStack) -> dict[str, np.ndarray]:
    """Stage masks of the Schroeder pipeline; "fire" is the final mask.

    Unambiguous fires pass fixed thresholds. Remaining pixels passing the
    relaxed clauses become candidates, each confirmed against 61x61 background
    statistics of the R75 and rho7 fields. The background excludes water,
    unambiguous, and candidate pixels; a window with no background pixels
    rejects its candidate.
    """
    _require_correction(stack, corrected=False, op="schroeder_detect")
    _require_channels(stack, (1, 2, 3, 4, 5, 6, 7), "schroeder_detect")
    valid = stack.valid
    p1 = stack.band(1)
    p5 = stack.band(5)
    p6 = stack.band(6)
    p7 = stack.band(7)
    r75, d75 = ratio_field(stack, 7, 5)
    r76, d76 = ratio_field(stack, 7, 6)

    water = schroeder_water(stack)
    unambiguous = valid & (
        (d75 & (r75 > 2.5) & ((p7 - p5) > 0.3) & (p7 > 0.5))
        | ((p6 > 0.8) & (p1 < 0.2) & ((p5 > 0.4) | (p7 < 0.1)))
    )
    candidate = (
        valid
        & ~unambiguous
        & d75
        & (r75 > 1.8)
        & ((p7 - p5) > 0.17)
        & d76
        & (r76 > 1.6)
    )

    include = valid & ~water & ~unambiguous & ~candidate
    confirmed = np.zeros_like(valid)
    rows, cols = np.nonzero(candidate)
    if rows.size:
        sat_r75 = build_exclusion_sat(r75, include & d75)
        sat_p7 = build_exclusion_sat(p7, include)
        m_r, s_r, n_r = window_stats_batch(sat_r75, rows, cols, 30)
        m_p, s_p, n_p = window_stats_batch(sat_p7, rows, cols, 30)
        rv = r75[rows, cols]
        pv = p7[rows, cols]
        ok = (
            (n_r > 0)
            & (n_p > 0)
            & (rv > m_r + np.maximum(3.0 * s_r, 0.8))
            & (pv > m_p + np.maximum(3.0 * s_p, 0.08))
        )
        confirmed[rows[ok], cols[ok]] = True

    return {
        "water": water,
        "unambiguous": unambiguous,
        "candidate": candidate,
        "confirmed": confirmed,
        "fire": unambiguous | confirmed,
    }


def schroeder_detect(stack: ReflectanceStack) -> tuple[np.ndarray, DetectorReport]:
    """Run the Schroeder conditions; returns (fire mask, stage report)."""
    stages = schroeder_stages(stack)
    return finish_stages("schroeder", stages)


def murphy_stages(
    stack: ReflectanceStack, sat6: np.ndarray, sat7: np.ndarray
) -> dict[str, np.ndarray]:
    """Stage masks of the Murphy pipeline; "fire" is the final mask.

    Unambiguous fires pass (R76 >= 1.4) and (R75 >= 1.4) and (rho7 >= 0.15).
    Potential fires pass (R65 >= 2 and rho6 >= 0.5) or carry saturation in
    channel 6 or 7. A potential pixel becomes fire only when an unambiguous
    fire sits in its 3x3 neighborhood; promotion is a single pass, so promoted
    pixels do not recruit further potentials.
    """
    _require_correction(stack, corrected=True, op="murphy_detect")
    _require_channels(stack, (5, 6, 7), "murphy_detect")
    for name, sat in (("sat6", sat6), ("sat7", sat7)):
        if sat.shape != stack.shape:
            raise ValueError(f"{name} shape {sat.shape} does not match stack {stack.shape}")
    valid = stack.valid
    p6 = stack.band(6)
    p7 = stack.band(7)
    r76, d76 = ratio_field(stack, 7, 6)
    r75, d75 = ratio_field(stack, 7, 5)
    r65, d65 = ratio_field(stack, 6, 5)

    unambiguous = valid & d76 & (r76 >= 1.4) & d75 & (r75 >= 1.4) & (p7 >= 0.15)
    potential = valid & ((d65 & (r65 >= 2.0) & (p6 >= 0.5)) | sat7 | sat6)
    promoted = potential & ~unambiguous & _dilate8(unambiguous)

    return {
        "unambiguous": unambiguous,
        "potential": potential & ~unambiguous,
        "promoted": promoted,
        "fire": unambiguous | promoted,
    }


def murphy_detect(
    stack: ReflectanceStack, sat6: np.ndarray, sat7: np.ndarray
) -> tuple[np.ndarray, DetectorReport]:
    """Run the Murphy conditions; returns (fire mask, stage report)."""
    stages = murphy_stages(stack, sat6, sat7)
    return finish_stages("murphy", stages)


def kumarroy_water(stack: ReflectanceStack) -> np.ndarray:
    """Water test used by the Kumar-Roy conditions: rho2 >= rho3 >= rho4 >= rho5.

    Non-strict chain on corrected reflectance; false at invalid pixels.
    """
    _require_correction(stack, corrected=True, op="kumarroy_water")
    _require_channels(stack, (2, 3, 4, 5), "kumarroy_water")
    p2 = stack.band(2)
    p3 = stack.band(3)
    p4 = stack.band(4)
    p5 = stack.band(5)
    return stack.valid & (p2 >= p3) & (p3 >= p4) & (p4 >= p5)


def kumarroy_stages(stack: ReflectanceStack) -> dict[str, np.ndarray]:
    """Stage masks of the Kumar-Roy pipeline; "fire" is the final mask.

    Stage 1 fires pass rho4 <= 0.53*rho7 - 0.214. Stage 2 adds 8-neighbors of
    stage-1 pixels passing rho4 <= 0.35*rho6 - 0.044 (single pass, no
    chaining). Potential fires pass the relaxed disjunction and are confirmed
    against background statistics over a growing window (side 5 to 61,
    stopping once the window holds at least 25% unclassified pixels). The
    background excludes water, fire, and potential pixels. A potential pixel
    with no qualifying window, an undefined R75, or an empty ratio background
    stays non-fire.
    """
    _require_correction(stack, corrected=True, op="kumarroy_detect")
    _require_channels(stack, (2, 3, 4, 5, 6, 7), "kumarroy_detect")
    valid = stack.valid
    p4 = stack.band(4)
    p6 = stack.band(6)
    p7 = stack.band(7)

    stage1 = valid & (p4 <= 0.53 * p7 - 0.214)
    stage2 = valid & ~stage1 & _dilate8(stage1) & (p4 <= 0.35 * p6 - 0.044)
    fire = stage1 | stage2

    potential = valid & ~fire & ((p4 <= 0.53 * p7 - 0.125) | (p6 <= 1.08 * p7 - 0.048))
    water = kumarroy_water(stack)

    include = valid & ~water & ~fire & ~potential
    r75, d75 = ratio_field(stack, 7, 5)
    confirmed = np.zeros_like(valid)
    rows, cols = np.nonzero(potential)
    if rows.size:
        sat_p7 = build_exclusion_sat(p7, include)
        sat_r75 = build_exclusion_sat(r75, include & d75)
        sides = adaptive_sides(sat_p7, rows, cols, min_side=5, max_side=61, min_valid_fraction=0.25)
        found = sides > 0
        if np.any(found):
            r = rows[found]
            c = cols[found]
            half = sides[found] // 2
            m_p, s_p, n_p = window_stats_batch(sat_p7, r, c, half)
            m_r, s_r, n_r = window_stats_batch(sat_r75, r, c, half)
            rv = r75[r, c]
            dv = d75[r, c]
            pv = p7[r, c]
            ok = (
                dv
                & (n_p > 0)
                & (n_r > 0)
                & (rv > m_r + np.maximum(3.0 * s_r, 0.8))
                & (pv > m_p + np.maximum(3.0 * s_p, 0.08))
            )
            confirmed[r[ok], c[ok]] = True

    return {
        "unambiguous": stage1,
        "vicinity": stage2,
        "potential": potential,
        "water": water,
        "confirmed": confirmed,
        "fire": fire | confirmed,
    }


def kumarroy_detect(stack: ReflectanceStack) -> tuple[np.ndarray, DetectorReport]:
    """Run the Kumar-Roy conditions; returns (fire mask, stage report)."""
    stages = kumarroy_stages(stack)
    return finish_stages("kumarroy", stages)


def finish_stages(name: str, stages: dict[str, np.ndarray]) -> tuple[np.ndarray, DetectorReport]:
    """Collapse stage masks into (fire mask, DetectorReport) with popcounts."""
    fire = stages["fire"]
    counts = {stage: _popcount(mask) for stage, mask in stages.items() if stage != "fire"}
    return fire, DetectorReport(detector=name, stage_counts=counts, fire_count=_popcount(fire))
