"""Exception types shared across the package."""


class FirescanError(Exception):
    """Base class for data and processing errors raised by this package."""


class SceneFormatError(FirescanError):
    """A scene directory, band file, or metadata file is malformed or incomplete."""


class ManifestFormatError(FirescanError):
    """A patch manifest CSV is malformed or references unknown labels."""
