"""Keras U-Net builder.

Encoder levels double the filter count and halve the resolution; the decoder
mirrors them with stride-2 3x3 transpose convolutions and skip
concatenations. Every ordinary convolution is followed by batch
normalization (when enabled) and ReLU; transpose convolutions and the final
1x1 sigmoid convolution are not normalized. The layer schedule is pinned by
the exact parameter counts asserted in the acceptance tests.
"""
from __future__ import annotations

import tensorflow as tf

from .config import UNetConfig


# Moving-statistics momentum low enough that inference batch norm catches up
# with training within tens of optimizer steps, not thousands; small
# training runs are unusable at the framework default of 0.99.
BN_MOMENTUM = 0.9


def _conv_block(x, filters: int, batch_norm: bool, name: str):
    for k in (1, 2):
        x = tf.keras.layers.Conv2D(filters, 3, padding="same", name=f"{name}_conv{k}")(x)
        if batch_norm:
            x = tf.keras.layers.BatchNormalization(momentum=BN_MOMENTUM, name=f"{name}_bn{k}")(x)
        x = tf.keras.layers.Activation("relu", name=f"{name}_relu{k}")(x)
    return x


def build_model(config: UNetConfig) -> tf.keras.Model:
    """Build an uncompiled segmentation model for the given variant.

    The spatial dimensions are left open; any input whose height and width
    are divisible by 2**(depth-1) maps to an equally sized single-channel
    probability map.
    """
    inputs = tf.keras.Input(shape=(None, None, config.input_channels), name="patch")
    skips = []
    x = inputs
    for level in range(config.depth - 1):
        x = _conv_block(x, config.base_filters * 2**level, config.batch_norm, f"enc{level}")
        skips.append(x)
        x = tf.keras.layers.MaxPooling2D(2, name=f"enc{level}_pool")(x)

    x = _conv_block(
        x, config.base_filters * 2 ** (config.depth - 1), config.batch_norm, "bottleneck"
    )
    if config.dropout > 0:
        x = tf.keras.layers.Dropout(config.dropout, name="bottleneck_drop")(x)

    for level in reversed(range(config.depth - 1)):
        filters = config.base_filters * 2**level
        x = tf.keras.layers.Conv2DTranspose(
            filters, 3, strides=2, padding="same", name=f"dec{level}_up"
        )(x)
        x = tf.keras.layers.Concatenate(name=f"dec{level}_skip")([x, skips[level]])
        x = _conv_block(x, filters, config.batch_norm, f"dec{level}")

    outputs = tf.keras.layers.Conv2D(1, 1, activation="sigmoid", name="probability")(x)
    return tf.keras.Model(inputs, outputs, name=f"unet_c{config.input_channels}_f{config.base_filters}")
