"""Run configuration for the U-Net variants and their training protocol.

A run is fully described by a UNetConfig (architecture) plus a TrainSpec
(optimization), and both are persisted together as a JSON sidecar next to
the weights so that inference can rebuild the exact model later.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

# Channel order inside a patch TIFF, as written by the tiling pipeline.
PATCH_BAND_ORDER = (1, 2, 3, 4, 5, 6, 7, 9, 10, 11)

# Patch DN values are scaled into [0, 1] by this fixed constant, train and
# inference alike; it is recorded in the sidecar.
NORMALIZATION_DIVISOR = 65535.0

FULL_BAND_SUBSET = PATCH_BAND_ORDER
THREE_BAND_SUBSET = (7, 6, 2)

ALLOWED_BASE_FILTERS = (64, 16)


@dataclass(frozen=True)
class UNetConfig:
    """Architecture knobs for one model variant.

    Attributes:
        input_channels: channels the network consumes (10 or 3).
        base_filters: filters at the first level; doubled per level down.
        depth: number of encoder levels, bottleneck included.
        batch_norm: batch-normalize after every ordinary convolution.
        dropout: dropout rate applied after the bottleneck block, 0 disables.
        threshold: probability cut for binarizing predictions.
        band_subset: patch channels fed to the network, in input order.
    """

    input_channels: int = 10
    base_filters: int = 64
    depth: int = 5
    batch_norm: bool = True
    dropout: float = 0.0
    threshold: float = 0.25
    band_subset: tuple[int, ...] = FULL_BAND_SUBSET

    def __post_init__(self) -> None:
        object.__setattr__(self, "band_subset", tuple(self.band_subset))
        if self.base_filters not in ALLOWED_BASE_FILTERS:
            raise ValueError(
                f"base_filters must be one of {ALLOWED_BASE_FILTERS}, got {self.base_filters}"
            )
        if len(self.band_subset) != self.input_channels:
            raise ValueError(
                f"band_subset has {len(self.band_subset)} channels, "
                f"input_channels says {self.input_channels}"
            )
        unknown = [b for b in self.band_subset if b not in PATCH_BAND_ORDER]
        if unknown:
            raise ValueError(f"band_subset contains channels not present in patches: {unknown}")
        if self.depth < 2:
            raise ValueError(f"depth must be at least 2, got {self.depth}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")


# The three published variants: the full network on all ten channels, the
# same network on the three most informative channels, and a light variant
# with a quarter of the filters per layer.
VARIANTS = {
    "full10": UNetConfig(),
    "full3": UNetConfig(input_channels=3, band_subset=THREE_BAND_SUBSET),
    "light3": UNetConfig(input_channels=3, base_filters=16, band_subset=THREE_BAND_SUBSET),
}


@dataclass(frozen=True)
class TrainSpec:
    """Optimization protocol. Optimizer is Adam, loss is binary cross entropy.

    Attributes:
        learning_rate: Adam step size.
        batch_size: samples per optimizer step.
        max_epochs: hard epoch cap.
        patience: epochs without validation-loss improvement before stopping;
            0 disables early stopping.
        fractions: train/validation/test fractions, must sum to 1.
        seed: seed covering weight shuffling and any stochastic layers.
    """

    learning_rate: float = 0.001
    batch_size: int = 16
    max_epochs: int = 50
    patience: int = 5
    fractions: tuple[float, float, float] = (0.4, 0.1, 0.5)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "fractions", tuple(self.fractions))
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be at least 1, got {self.max_epochs}")
        if self.patience < 0:
            raise ValueError(f"patience must not be negative, got {self.patience}")
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError(f"fractions must be three non-negative values, got {self.fractions}")
        if not math.isclose(sum(self.fractions), 1.0, abs_tol=1e-9):
            raise ValueError(f"fractions must sum to 1, got {self.fractions}")


def save_run_config(path: str | Path, config: UNetConfig, spec: TrainSpec) -> Path:
    """Write the JSON sidecar describing a run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "model": asdict(config),
        "train": asdict(spec),
        "optimizer": "adam",
        "loss": "binary_crossentropy",
        "normalization_divisor": NORMALIZATION_DIVISOR,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def load_run_config(path: str | Path) -> tuple[UNetConfig, TrainSpec]:
    """Read a sidecar back into validated config objects."""
    payload = json.loads(Path(path).read_text())
    model = dict(payload["model"])
    train = dict(payload["train"])
    model["band_subset"] = tuple(model["band_subset"])
    train["fractions"] = tuple(train["fractions"])
    return UNetConfig(**model), TrainSpec(**train)
