"""U-Net training and inference over exported patch datasets."""

__version__ = "0.1.0"
