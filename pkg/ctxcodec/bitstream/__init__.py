"""
Bitstream coding: CDF tables, range coder, latent substreams, container and
sequence encode/decode.
"""

from ctxcodec.bitstream.cdf import CdfTable, build_cdf
from ctxcodec.bitstream.container import BitstreamContainer, ContainerHeader, FrameBitstream, FrameType
from ctxcodec.bitstream.frame_coder import decode_frame_p, encode_frame_p
from ctxcodec.bitstream.intra import (
    IntraCodec,
    IntraRegistry,
    LosslessDeflateIntra,
    ToyHyperpriorIntra,
    default_registry,
)
from ctxcodec.bitstream.latent_coder import decode_hyper, decode_latents, encode_hyper, encode_latents
from ctxcodec.bitstream.range_coder import RangeDecoder, RangeEncoder, range_decode, range_encode
from ctxcodec.bitstream.sequence import (
    FrameRateRecord,
    decode_sequence,
    encode_sequence,
    encode_sequence_with_reconstruction,
    rate_records,
    write_rate_report,
)

__all__ = [
    "BitstreamContainer",
    "CdfTable",
    "ContainerHeader",
    "FrameBitstream",
    "FrameRateRecord",
    "FrameType",
    "IntraCodec",
    "IntraRegistry",
    "LosslessDeflateIntra",
    "RangeDecoder",
    "RangeEncoder",
    "ToyHyperpriorIntra",
    "build_cdf",
    "decode_frame_p",
    "decode_hyper",
    "decode_latents",
    "decode_sequence",
    "default_registry",
    "encode_frame_p",
    "encode_hyper",
    "encode_latents",
    "encode_sequence",
    "encode_sequence_with_reconstruction",
    "range_decode",
    "range_encode",
    "rate_records",
    "write_rate_report",
]
