"""
Exception classes for the ctxcodec library.
"""

from typing import Optional


class CtxCodecError(Exception):
    """Base exception for ctxcodec errors."""

    pass


class ArgumentError(CtxCodecError, ValueError):
    """An argument violates an operation's preconditions (shape, range, value)."""

    pass


class ParameterError(CtxCodecError, ValueError):
    """A model or distribution parameter is outside its admissible domain."""

    pass


class ContractError(CtxCodecError):
    """An internal contract between pipeline stages was broken by the caller."""

    pass


class ConfigurationError(CtxCodecError):
    """Invalid or inconsistent configuration (modes, checkpoints, manifests)."""

    pass


class UnsupportedCodecError(ConfigurationError):
    """A bitstream references an intra codec that is not registered."""

    def __init__(self, codec_id: int, known: Optional[list] = None):
        """
        Initialize unsupported-codec error.

        Args:
            codec_id: Intra codec id found in the bitstream
            known: Registered ids (if available)
        """
        self.codec_id = codec_id
        self.known = list(known or [])
        super().__init__(f"unsupported intra codec id {codec_id} (registered: {self.known})")


class DataError(CtxCodecError):
    """Base class for problems with input data or coded data."""

    pass


class MalformedInputError(DataError):
    """Input file or image set does not have the expected layout."""

    pass


class EmptyInputError(DataError):
    """Input holds no frames."""

    pass


class SymbolRangeError(DataError):
    """A symbol falls outside the range covered by its CDF table."""

    pass


class OverlapError(DataError):
    """Two rate-distortion curves share no quality interval."""

    pass


class CorruptionError(DataError):
    """Coded data is truncated or inconsistent."""

    def __init__(self, message: str, substream: Optional[int] = None):
        """
        Initialize corruption error.

        Args:
            message: Error message
            substream: Index of the substream in the P record (0=g, 1=s, 2=y, 3=z), if known
        """
        self.message = message
        self.substream = substream
        super().__init__(message)

    def __str__(self):
        """String representation of the error."""
        if self.substream is not None:
            return f"substream {self.substream}: {self.message}"
        return self.message


class TrainingDivergedError(DataError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, snapshot_path: Optional[str] = None):
        self.snapshot_path = snapshot_path
        super().__init__(message if snapshot_path is None else f"{message} (snapshot: {snapshot_path})")
