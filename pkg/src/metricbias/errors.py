"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Array or image dimensions are incompatible with the operation."""


class ImageFormatError(ValueError):
    """Decoded raster has an unsupported mode or bit depth."""


class ImageReadError(OSError):
    """An image file could not be read or decoded."""


class CapabilityError(ValueError):
    """Requested configuration is outside what the implementation supports."""


class EmptyDatasetError(OSError):
    """A dataset directory contains no images with the requested extensions."""
