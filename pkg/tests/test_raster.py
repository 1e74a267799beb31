"""Scene container, band/metadata IO, and pixel masks."""
import numpy as np
import pytest

from firescan.errors import SceneFormatError
from firescan.raster import (
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
from synth import make_scene, random_scene


def test_write_then_load_round_trips_exactly(tmp_path):
    rng = np.random.default_rng(11)
    scene = random_scene(rng, height=40, width=52)
    write_scene(scene, tmp_path)
    back = load_scene(tmp_path)

    assert back.scene_id == scene.scene_id
    assert back.wrs_path == scene.wrs_path
    assert back.wrs_row == scene.wrs_row
    assert back.acquisition_date == scene.acquisition_date
    assert back.sun_elevation_deg == scene.sun_elevation_deg
    assert set(back.bands) == set(BAND_ORDER)
    for ch in BAND_ORDER:
        assert np.array_equal(back.bands[ch], scene.bands[ch])
    for ch in REFLECTIVE_CHANNELS:
        assert back.refl_mult[ch] == scene.refl_mult[ch]
        assert back.refl_add[ch] == scene.refl_add[ch]


def test_load_missing_band_names_the_channel(tmp_path):
    scene = make_scene(scene_id="LC81370292020RX", shape=(8, 8))
    write_scene(scene, tmp_path)
    (tmp_path / "LC81370292020RX_B7.TIF").unlink()
    with pytest.raises(SceneFormatError, match="channel 7"):
        load_scene(tmp_path)


def test_load_mismatched_dimensions_names_the_channel(tmp_path):
    import tifffile

    scene = make_scene(scene_id="LC81370292020RX", shape=(8, 8))
    write_scene(scene, tmp_path)
    tifffile.imwrite(
        tmp_path / "LC81370292020RX_B5.TIF", np.zeros((9, 8), dtype=np.uint16)
    )
    with pytest.raises(SceneFormatError, match="channel 5"):
        load_scene(tmp_path)


def test_load_missing_metadata_key_names_it(tmp_path):
    scene = make_scene(scene_id="LC81370292020RX", shape=(8, 8))
    write_scene(scene, tmp_path)
    mtl = tmp_path / "LC81370292020RX_MTL.txt"
    text = mtl.read_text()
    mtl.write_text(
        "\n".join(l for l in text.splitlines() if "REFLECTANCE_MULT_BAND_5" not in l)
    )
    with pytest.raises(SceneFormatError, match="REFLECTANCE_MULT_BAND_5"):
        load_scene(tmp_path)


def test_load_without_metadata_file_fails(tmp_path):
    scene = make_scene(scene_id="LC81370292020RX", shape=(8, 8))
    write_scene(scene, tmp_path)
    (tmp_path / "LC81370292020RX_MTL.txt").unlink()
    with pytest.raises(SceneFormatError):
        load_scene(tmp_path)


def test_scene_rejects_band_8_and_non_uint16():
    scene = make_scene(shape=(4, 4))
    bands = dict(scene.bands)
    bands[8] = np.zeros((4, 4), dtype=np.uint16)
    with pytest.raises(SceneFormatError):
        Scene(
            scene_id=scene.scene_id,
            wrs_path=scene.wrs_path,
            wrs_row=scene.wrs_row,
            acquisition_date=scene.acquisition_date,
            sun_elevation_deg=scene.sun_elevation_deg,
            bands=bands,
            refl_mult=scene.refl_mult,
            refl_add=scene.refl_add,
        )

    bands = dict(scene.bands)
    bands[5] = bands[5].astype(np.float32)
    with pytest.raises(SceneFormatError):
        Scene(
            scene_id=scene.scene_id,
            wrs_path=scene.wrs_path,
            wrs_row=scene.wrs_row,
            acquisition_date=scene.acquisition_date,
            sun_elevation_deg=scene.sun_elevation_deg,
            bands=bands,
            refl_mult=scene.refl_mult,
            refl_add=scene.refl_add,
        )


def test_band_accessor_names_missing_channel():
    scene = make_scene(shape=(4, 4))
    with pytest.raises(SceneFormatError, match="channel 8"):
        scene.band(8)


def test_nodata_requires_all_reflective_channels_zero():
    scene = make_scene(shape=(6, 6))
    for ch in REFLECTIVE_CHANNELS:
        scene.bands[ch][:] = 1
    # All-zero across every reflective channel marks nodata.
    for ch in REFLECTIVE_CHANNELS:
        scene.bands[ch][0, 0] = 0
    # A single zeroed channel does not.
    scene.bands[5][2, 3] = 0

    mask = nodata_mask(scene)
    assert mask[0, 0]
    assert not mask[2, 3]
    assert mask.sum() == 1
    assert mask.dtype == np.bool_

    # Thermal channels have no say: zeroing them flips nothing.
    scene.bands[10][:] = 0
    scene.bands[11][:] = 0
    assert np.array_equal(nodata_mask(scene), mask)


def test_saturation_is_exactly_the_top_code():
    scene = make_scene(shape=(5, 5))
    scene.bands[7][:] = 1000
    scene.bands[7][1, 1] = SATURATION_DN
    scene.bands[7][2, 2] = SATURATION_DN - 1
    scene.bands[7][3, 3] = 0

    mask = saturation_mask(scene, 7)
    assert mask[1, 1]
    assert not mask[2, 2]
    assert not mask[3, 3]
    assert mask.sum() == 1


def test_saturation_mask_is_monotone_in_dn():
    rng = np.random.default_rng(3)
    scene = make_scene(shape=(16, 16))
    low = rng.integers(0, SATURATION_DN + 1, size=(16, 16), dtype=np.uint16)
    bumped = low.copy()
    bump = rng.random((16, 16)) < 0.3
    bumped[bump] = SATURATION_DN

    scene.bands[6][:] = low
    mask_low = saturation_mask(scene, 6)
    scene.bands[6][:] = bumped
    mask_high = saturation_mask(scene, 6)
    # Raising a DN can only turn saturation on, never off.
    assert not np.any(mask_low & ~mask_high)


def test_saturation_mask_unknown_channel():
    scene = make_scene(shape=(4, 4))
    with pytest.raises(SceneFormatError, match="channel 8"):
        saturation_mask(scene, 8)


def test_mask_file_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    mask = rng.random((33, 47)) < 0.2
    path = tmp_path / "m.tif"
    write_mask(path, mask)
    assert np.array_equal(read_mask(path), mask)


def test_patch_file_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    cube = rng.integers(0, 65536, size=(10, 64, 64), dtype=np.uint16)
    path = tmp_path / "p.tif"
    write_patch(path, cube)
    back = read_patch(path)
    assert back.dtype == np.uint16
    assert back.shape == (10, 64, 64)
    assert np.array_equal(back, cube)
