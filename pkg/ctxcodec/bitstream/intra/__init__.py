"""
Pluggable intra (I-frame) codecs.
"""

from ctxcodec.bitstream.intra.base import IntraCodec
from ctxcodec.bitstream.intra.lossless import LosslessDeflateIntra
from ctxcodec.bitstream.intra.registry import IntraRegistry, default_registry
from ctxcodec.bitstream.intra.toy_hyperprior import IntraOutput, ToyHyperpriorIntra

__all__ = [
    "IntraCodec",
    "IntraOutput",
    "IntraRegistry",
    "LosslessDeflateIntra",
    "ToyHyperpriorIntra",
    "default_registry",
]
