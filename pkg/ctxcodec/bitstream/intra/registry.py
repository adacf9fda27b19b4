"""
Registry of intra codecs keyed by their container id.
"""

import logging
from typing import Dict, List, Optional

from ctxcodec.bitstream.intra.base import IntraCodec
from ctxcodec.bitstream.intra.lossless import LosslessDeflateIntra
from ctxcodec.exceptions import ArgumentError, UnsupportedCodecError

logger = logging.getLogger(__name__)


class IntraRegistry:
    """Maps intra codec ids to codec instances."""

    def __init__(self, codecs: Optional[List[IntraCodec]] = None):
        self._codecs: Dict[int, IntraCodec] = {}
        for codec in codecs or []:
            self.register(codec)

    def register(self, codec: IntraCodec, replace: bool = False) -> None:
        if not 0 <= codec.codec_id <= 255:
            raise ArgumentError(f"intra codec id must fit in a byte, got {codec.codec_id}")
        if codec.codec_id in self._codecs and not replace:
            raise ArgumentError(f"intra codec id {codec.codec_id} is already registered")
        self._codecs[codec.codec_id] = codec
        logger.debug("registered intra codec %d (%s)", codec.codec_id, codec.name)

    def get(self, codec_id: int) -> IntraCodec:
        """
        Look up a codec.

        Raises:
            UnsupportedCodecError: If no codec has this id
        """
        if codec_id not in self._codecs:
            raise UnsupportedCodecError(codec_id, self.ids())
        return self._codecs[codec_id]

    def by_name(self, name: str) -> IntraCodec:
        for codec in self._codecs.values():
            if codec.name == name:
                return codec
        raise ArgumentError(f"no intra codec named {name!r} (known: {[c.name for c in self._codecs.values()]})")

    def ids(self) -> List[int]:
        return sorted(self._codecs)

    def __contains__(self, codec_id: int) -> bool:
        return codec_id in self._codecs


def default_registry(toy=None) -> IntraRegistry:
    """Registry with the lossless plug and, when given, a (trained) toy hyperprior plug."""
    registry = IntraRegistry([LosslessDeflateIntra()])
    if toy is not None:
        registry.register(toy)
    return registry
