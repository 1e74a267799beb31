"""Module tests: configuration, dataset IO, inference plumbing, run persistence."""
import csv
import json

import numpy as np
import pytest
import tifffile

from firescan_unet.config import (
    THREE_BAND_SUBSET,
    TrainSpec,
    UNetConfig,
    VARIANTS,
    load_run_config,
    save_run_config,
)
from firescan_unet.data import band_indices, load_dataset, load_mask, load_patch, read_manifest
from firescan_unet.model import build_model
from firescan_unet.predict import binarize, predict_mask, probabilities, write_mask
from firescan_unet.train import load_run, save_run, train_model
from synthdata import write_dataset


def test_config_validation():
    with pytest.raises(ValueError, match="base_filters"):
        UNetConfig(base_filters=32)
    with pytest.raises(ValueError, match="band_subset has"):
        UNetConfig(input_channels=3, band_subset=(7, 6))
    with pytest.raises(ValueError, match="not present"):
        UNetConfig(input_channels=3, band_subset=(7, 6, 8))
    with pytest.raises(ValueError, match="depth"):
        UNetConfig(depth=1)
    with pytest.raises(ValueError, match="dropout"):
        UNetConfig(dropout=1.0)
    with pytest.raises(ValueError, match="threshold"):
        UNetConfig(threshold=0.0)
    with pytest.raises(ValueError, match="threshold"):
        UNetConfig(threshold=1.0)


def test_trainspec_validation():
    with pytest.raises(ValueError, match="sum to 1"):
        TrainSpec(fractions=(0.5, 0.2, 0.2))
    with pytest.raises(ValueError, match="three non-negative"):
        TrainSpec(fractions=(0.5, 0.5))
    with pytest.raises(ValueError, match="batch_size"):
        TrainSpec(batch_size=0)
    with pytest.raises(ValueError, match="patience"):
        TrainSpec(patience=-1)
    with pytest.raises(ValueError, match="learning_rate"):
        TrainSpec(learning_rate=0.0)
    with pytest.raises(ValueError, match="max_epochs"):
        TrainSpec(max_epochs=0)


def test_published_variants():
    assert set(VARIANTS) == {"full10", "full3", "light3"}
    assert VARIANTS["full10"].input_channels == 10
    assert VARIANTS["full10"].base_filters == 64
    assert VARIANTS["full3"].band_subset == THREE_BAND_SUBSET
    assert VARIANTS["full3"].base_filters == 64
    assert VARIANTS["light3"].base_filters == 16
    assert all(cfg.threshold == 0.25 for cfg in VARIANTS.values())


def test_sidecar_round_trip(tmp_path):
    config = VARIANTS["full3"]
    spec = TrainSpec(seed=42)
    path = save_run_config(tmp_path / "run_config.json", config, spec)
    loaded_config, loaded_spec = load_run_config(path)
    assert loaded_config == config
    assert loaded_spec == spec
    payload = json.loads(path.read_text())
    assert payload["optimizer"] == "adam"
    assert payload["loss"] == "binary_crossentropy"
    assert payload["normalization_divisor"] == 65535.0


def test_read_manifest(dataset10):
    root, manifest = dataset10
    index = read_manifest(manifest)
    assert len(index.patch_ids) == 10
    assert index.labels == ("fire",)
    assert index.patch_ids[0] == "SYN_r0_c0"


def test_read_manifest_rejects_malformed(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_manifest(empty)

    bad_header = tmp_path / "head.csv"
    bad_header.write_text("id,scene\nx,y\n")
    with pytest.raises(ValueError, match="header"):
        read_manifest(bad_header)

    bad_column = tmp_path / "col.csv"
    bad_column.write_text(
        "patch_id,scene_id,tile_row,tile_col,pixel_x,pixel_y,valid_fraction,burn_a\n"
    )
    with pytest.raises(ValueError, match="unexpected"):
        read_manifest(bad_column)

    short_row = tmp_path / "short.csv"
    short_row.write_text(
        "patch_id,scene_id,tile_row,tile_col,pixel_x,pixel_y,valid_fraction,fire_a\n"
        "p,s,0,0,0,0,1.0\n"
    )
    with pytest.raises(ValueError, match="row 2"):
        read_manifest(short_row)


def test_band_indices():
    assert band_indices((7, 6, 2)) == (6, 5, 1)
    assert band_indices((1, 2, 3, 4, 5, 6, 7, 9, 10, 11)) == tuple(range(10))
    with pytest.raises(ValueError, match="not present"):
        band_indices((7, 6, 8))


def test_load_patch_selects_and_scales(tmp_path):
    cube = np.zeros((10, 8, 8), dtype=np.uint16)
    for k, ch in enumerate((1, 2, 3, 4, 5, 6, 7, 9, 10, 11)):
        cube[k] = ch * 1000
    cube[6, 0, 0] = 65535
    path = tmp_path / "p.tif"
    tifffile.imwrite(path, cube, photometric="minisblack")

    hwc = load_patch(path, (7, 6, 2))
    assert hwc.shape == (8, 8, 3)
    assert hwc.dtype == np.float32
    assert hwc[0, 0, 0] == 1.0
    assert hwc[1, 1, 0] == np.float32(7000 / 65535)
    assert hwc[1, 1, 1] == np.float32(6000 / 65535)
    assert hwc[1, 1, 2] == np.float32(2000 / 65535)

    single = tmp_path / "single.tif"
    tifffile.imwrite(single, cube[0])
    with pytest.raises(ValueError, match="10-band"):
        load_patch(single, (7, 6, 2))


def test_load_mask(tmp_path):
    mask = np.zeros((8, 8), dtype=np.uint8)
    mask[2, 3] = 1
    path = tmp_path / "m.tif"
    tifffile.imwrite(path, mask)
    loaded = load_mask(path)
    assert loaded.shape == (8, 8, 1)
    assert loaded.dtype == np.float32
    assert loaded[2, 3, 0] == 1.0
    assert loaded.sum() == 1.0


def test_load_dataset(dataset10):
    root, manifest = dataset10
    x, y = load_dataset(root, manifest, "fire", (7, 6, 2))
    assert x.shape == (10, 256, 256, 3)
    assert y.shape == (10, 256, 256, 1)
    assert x.dtype == np.float32 and y.dtype == np.float32
    assert 0.0 <= x.min() and x.max() <= 1.0
    assert set(np.unique(y)) == {0.0, 1.0}

    with pytest.raises(ValueError, match="label 'smoke'"):
        load_dataset(root, manifest, "smoke", (7, 6, 2))


def test_load_dataset_missing_file(tmp_path):
    ghost = tmp_path / "manifest.csv"
    ghost.write_text(
        "patch_id,scene_id,tile_row,tile_col,pixel_x,pixel_y,valid_fraction,fire_fire\n"
        "GHOST_r0_c0,S,0,0,0,0,1.0,5\n"
    )
    with pytest.raises(FileNotFoundError, match="GHOST_r0_c0"):
        load_dataset(tmp_path, ghost, "fire", (7, 6, 2))


def test_binarize_is_strict():
    probs = np.array([0.0, 0.2499, 0.25, 0.2501, 1.0])
    assert binarize(probs, 0.25).tolist() == [False, False, False, True, True]


def test_write_mask_format(tmp_path):
    mask = np.zeros((16, 16), dtype=bool)
    mask[4:8, 4:8] = True
    path = write_mask(tmp_path / "out.tif", mask)
    grid = tifffile.imread(path)
    assert grid.dtype == np.uint8
    assert set(np.unique(grid)) == {0, 1}
    assert np.array_equal(grid != 0, mask)


def test_model_shape_contract(light_model):
    x = np.random.default_rng(0).random((1, 64, 64, 3), dtype=np.float32)
    out = light_model.predict(x, verbose=0)
    assert out.shape == (1, 64, 64, 1)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_probabilities_validation(light_model):
    config = VARIANTS["light3"]
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError, match="10-band"):
        probabilities(light_model, config, rng.integers(0, 100, (9, 64, 64)))
    with pytest.raises(ValueError, match="channels"):
        probabilities(light_model, VARIANTS["full10"], rng.integers(0, 100, (10, 64, 64)))

    cube = rng.integers(0, 65536, (10, 64, 64)).astype(np.uint16)
    probs = probabilities(light_model, config, cube)
    assert probs.shape == (64, 64)
    assert probs.dtype == np.float32
    assert probs.min() >= 0.0 and probs.max() <= 1.0

    mask = predict_mask(light_model, config, cube)
    assert mask.dtype == bool
    assert np.array_equal(mask, probs > 0.25)


def test_empty_split_errors(tmp_path, dataset4, light_model):
    root, manifest = dataset4
    empty = write_dataset(tmp_path, 0, np.random.default_rng(0), manifest_name="empty.csv")
    config = VARIANTS["light3"]
    spec = TrainSpec(max_epochs=1, patience=0)
    with pytest.raises(ValueError, match="train split is empty"):
        train_model(light_model, tmp_path, empty, manifest, "fire", config, spec)
    with pytest.raises(ValueError, match="validation split is empty"):
        train_model(light_model, root, manifest, empty, "fire", config, spec)


def test_save_and_load_run(tmp_path):
    config = VARIANTS["light3"]
    spec = TrainSpec(seed=5)
    model = build_model(config)
    run_dir = save_run(tmp_path / "run", model, config, spec)
    assert (run_dir / "model.weights.h5").exists()
    assert (run_dir / "run_config.json").exists()

    loaded_model, loaded_config, loaded_spec = load_run(run_dir)
    assert loaded_config == config
    assert loaded_spec == spec
    for a, b in zip(model.get_weights(), loaded_model.get_weights()):
        assert np.array_equal(a, b)
