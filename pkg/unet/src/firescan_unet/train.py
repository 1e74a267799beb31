"""Training protocol: Adam, binary cross entropy, early stopping.

Weight initialization happens when the model is built, so for end-to-end
reproducibility seed the process (``seed_everything``) before calling
``build_model`` as well; ``train_model`` re-seeds with ``spec.seed`` to
make shuffling and stochastic layers deterministic either way.
"""
from __future__ import annotations

from pathlib import Path

import tensorflow as tf

from .config import TrainSpec, UNetConfig, load_run_config, save_run_config
from .data import load_dataset
from .model import build_model

WEIGHTS_NAME = "model.weights.h5"
SIDECAR_NAME = "run_config.json"


def seed_everything(seed: int) -> None:
    """Seed Python, numpy, and the backend in one call."""
    tf.keras.utils.set_random_seed(seed)


def compile_model(model: tf.keras.Model, spec: TrainSpec) -> tf.keras.Model:
    model.compile(
        optimizer=tf.keras.optimizers.Adam(learning_rate=spec.learning_rate),
        loss="binary_crossentropy",
    )
    return model


def train_model(
    model: tf.keras.Model,
    patches_dir: str | Path,
    train_manifest: str | Path,
    val_manifest: str | Path,
    label: str,
    config: UNetConfig,
    spec: TrainSpec,
    extra_callbacks: tuple = (),
) -> tf.keras.callbacks.History:
    """Fit the model on one manifest split pair.

    The history records per-epoch training and validation loss. Training
    stops after ``spec.max_epochs`` epochs, or earlier once validation loss
    has not improved for ``spec.patience`` epochs.

    Raises:
        ValueError: a split lists no patches, or the label is unknown.
        FileNotFoundError: a referenced patch or mask file is missing.
    """
    x_train, y_train = _load_split(patches_dir, train_manifest, label, config, "train")
    x_val, y_val = _load_split(patches_dir, val_manifest, label, config, "validation")

    seed_everything(spec.seed)
    compile_model(model, spec)

    callbacks = list(extra_callbacks)
    if spec.patience > 0:
        callbacks.append(
            tf.keras.callbacks.EarlyStopping(monitor="val_loss", patience=spec.patience)
        )
    return model.fit(
        x_train,
        y_train,
        validation_data=(x_val, y_val),
        batch_size=spec.batch_size,
        epochs=spec.max_epochs,
        callbacks=callbacks,
        verbose=0,
    )


def _load_split(patches_dir, manifest, label, config, split_name):
    try:
        return load_dataset(patches_dir, manifest, label, config.band_subset)
    except ValueError as exc:
        if "no patches" in str(exc):
            raise ValueError(f"{split_name} split is empty") from exc
        raise


def save_run(run_dir: str | Path, model: tf.keras.Model, config: UNetConfig, spec: TrainSpec) -> Path:
    """Persist weights plus the JSON sidecar describing the run."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    model.save_weights(run_dir / WEIGHTS_NAME)
    save_run_config(run_dir / SIDECAR_NAME, config, spec)
    return run_dir


def load_run(run_dir: str | Path) -> tuple[tf.keras.Model, UNetConfig, TrainSpec]:
    """Rebuild a model from a run directory and load its weights."""
    run_dir = Path(run_dir)
    config, spec = load_run_config(run_dir / SIDECAR_NAME)
    model = build_model(config)
    model.load_weights(run_dir / WEIGHTS_NAME)
    return model, config, spec
