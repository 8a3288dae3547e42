"""Exception hierarchy shared by all modules."""


class ShiftSRError(Exception):
    """Base class for all library errors."""


class ShapeError(ShiftSRError):
    """Operand shapes are incompatible with the requested operation."""


class ConfigError(ShiftSRError):
    """A model or step-set configuration violates its invariants."""


class CheckpointError(ShiftSRError):
    """A checkpoint file is malformed or inconsistent with its config."""


class ImageFormatError(ShiftSRError):
    """An image file is unsupported, truncated, or not 8-bit RGB."""
