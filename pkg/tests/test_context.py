"""Summed-area tables and contextual window statistics."""
import math

import numpy as np
import pytest

from firescan.context import (
    ExclusionSAT,
    adaptive_sides,
    adaptive_window_stats,
    build_exclusion_sat,
    window_stats,
    window_stats_batch,
)
from oracle import adaptive_window_reduce, window_reduce


def brute_rect(values, include, r0, c0, r1, c1):
    """Double-loop rectangle reduction, the slowest possible reference."""
    total = 0.0
    total_sq = 0.0
    n = 0
    for r in range(r0, r1):
        for c in range(c0, c1):
            if include[r, c]:
                v = float(values[r, c])
                total += v
                total_sq += v * v
                n += 1
    return total, total_sq, n


def test_rect_query_matches_double_loop_exhaustively():
    rng = np.random.default_rng(21)
    values = rng.normal(size=(7, 6))
    include = rng.random((7, 6)) < 0.6
    sat = build_exclusion_sat(values, include)
    for r0 in range(7):
        for r1 in range(r0, 8):
            for c0 in range(6):
                for c1 in range(c0, 7):
                    s, s2, n = sat.rect_query(r0, c0, r1, c1)
                    bs, bs2, bn = brute_rect(values, include, r0, c0, r1, c1)
                    assert n == bn
                    assert s == pytest.approx(bs, rel=1e-12, abs=1e-12)
                    assert s2 == pytest.approx(bs2, rel=1e-12, abs=1e-12)


def test_all_ones_window_is_exact():
    values = np.ones((130, 130))
    include = np.ones((130, 130), dtype=bool)
    sat = build_exclusion_sat(values, include)
    stats = window_stats(sat, (65, 65), half_width=30)
    assert stats is not None
    assert stats.valid_count == 61 * 61 == 3721
    assert stats.mean == pytest.approx(1.0, abs=1e-12)
    assert stats.std == pytest.approx(0.0, abs=1e-9)
    assert stats.window_side == 61


def test_fully_excluded_window_returns_none():
    values = np.ones((40, 40))
    include = np.zeros((40, 40), dtype=bool)
    sat = build_exclusion_sat(values, include)
    assert window_stats(sat, (20, 20), half_width=5) is None


def test_out_of_bounds_center_rejected():
    sat = build_exclusion_sat(np.ones((10, 10)), np.ones((10, 10), dtype=bool))
    with pytest.raises(ValueError):
        window_stats(sat, (10, 0), half_width=2)
    with pytest.raises(ValueError):
        window_stats(sat, (0, -1), half_width=2)


def test_window_stats_match_masked_slice_reference():
    rng = np.random.default_rng(22)
    for _ in range(20):
        h = int(rng.integers(15, 90))
        w = int(rng.integers(15, 90))
        values = rng.normal(loc=0.2, scale=0.4, size=(h, w))
        include = rng.random((h, w)) < rng.uniform(0.1, 0.95)
        sat = build_exclusion_sat(values, include)
        for _ in range(30):
            r = int(rng.integers(0, h))
            c = int(rng.integers(0, w))
            half = int(rng.integers(1, 31))
            got = window_stats(sat, (r, c), half_width=half)
            want = window_reduce(values, include, r, c, half)
            if want is None:
                assert got is None
                continue
            mean, std, n = want
            assert got.valid_count == n
            assert got.mean == pytest.approx(mean, rel=1e-9, abs=1e-12)
            assert got.std == pytest.approx(std, rel=1e-9, abs=1e-9)


def test_window_std_matches_double_loop_population_formula():
    rng = np.random.default_rng(23)
    values = rng.normal(size=(21, 17))
    include = rng.random((21, 17)) < 0.7
    sat = build_exclusion_sat(values, include)
    for (r, c) in [(0, 0), (10, 8), (20, 16), (3, 15)]:
        got = window_stats(sat, (r, c), half_width=4)
        s, s2, n = brute_rect(
            values, include, max(0, r - 4), max(0, c - 4), min(21, r + 5), min(17, c + 5)
        )
        if n == 0:
            assert got is None
            continue
        mean = s / n
        var = max(0.0, s2 / n - mean * mean)
        assert got.valid_count == n
        assert got.mean == pytest.approx(mean, rel=1e-12)
        assert got.std == pytest.approx(math.sqrt(var), rel=1e-9, abs=1e-12)


def test_adaptive_growth_stops_at_first_qualifying_side():
    rng = np.random.default_rng(24)
    for _ in range(10):
        h = int(rng.integers(20, 80))
        w = int(rng.integers(20, 80))
        values = rng.normal(size=(h, w))
        include = rng.random((h, w)) < rng.uniform(0.05, 0.6)
        sat = build_exclusion_sat(values, include)
        for _ in range(25):
            r = int(rng.integers(0, h))
            c = int(rng.integers(0, w))
            got = adaptive_window_stats(sat, (r, c))
            want = adaptive_window_reduce(values, include, r, c)
            if want is None:
                assert got is None
                continue
            side, mean, std, n = want
            assert got.window_side == side
            assert got.valid_count == n
            assert got.mean == pytest.approx(mean, rel=1e-9, abs=1e-12)
            assert got.std == pytest.approx(std, rel=1e-9, abs=1e-9)
            # Minimality: every smaller odd side must fail the coverage rule.
            for smaller in range(5, side, 2):
                half = smaller // 2
                r0, r1 = max(0, r - half), min(h, r + half + 1)
                c0, c1 = max(0, c - half), min(w, c + half + 1)
                area = (r1 - r0) * (c1 - c0)
                count = int(include[r0:r1, c0:c1].sum())
                assert count < 0.25 * area


def test_adaptive_coverage_uses_clipped_area_at_corners():
    # 3 of the 9 clipped cells are included: passes 0.25 * 9 but would fail
    # 0.25 * 25 if the nominal area were used.
    include = np.zeros((30, 30), dtype=bool)
    include[0, 1] = include[1, 0] = include[1, 1] = True
    sat = build_exclusion_sat(np.ones((30, 30)), include)
    stats = adaptive_window_stats(sat, (0, 0))
    assert stats is not None
    assert stats.window_side == 5
    assert stats.valid_count == 3


def test_adaptive_exhaustion_returns_none():
    include = np.zeros((70, 70), dtype=bool)
    include[0:2, 60:70] = True  # far from the query point, below any coverage
    sat = build_exclusion_sat(np.ones((70, 70)), include)
    assert adaptive_window_stats(sat, (69, 0)) is None


def test_batch_helpers_agree_with_scalar_paths():
    rng = np.random.default_rng(25)
    values = rng.normal(size=(50, 44))
    include = rng.random((50, 44)) < 0.4
    sat = build_exclusion_sat(values, include)
    rows = rng.integers(0, 50, size=60)
    cols = rng.integers(0, 44, size=60)

    mean, std, n = window_stats_batch(sat, rows, cols, 7)
    for i in range(60):
        scalar = window_stats(sat, (int(rows[i]), int(cols[i])), half_width=7)
        if scalar is None:
            assert n[i] == 0
        else:
            assert n[i] == scalar.valid_count
            assert mean[i] == pytest.approx(scalar.mean, rel=1e-12)
            assert std[i] == pytest.approx(scalar.std, rel=1e-12)

    sides = adaptive_sides(sat, rows, cols)
    for i in range(60):
        scalar = adaptive_window_stats(sat, (int(rows[i]), int(cols[i])))
        if scalar is None:
            assert sides[i] == 0
        else:
            assert sides[i] == scalar.window_side


def test_sat_shape_validation():
    with pytest.raises(ValueError):
        build_exclusion_sat(np.ones((4, 4)), np.ones((4, 5), dtype=bool))
