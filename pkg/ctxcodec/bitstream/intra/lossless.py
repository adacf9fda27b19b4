"""
Lossless intra codec: 8-bit RGB planes compressed with zlib.

Used to test the P-frame pipeline in isolation. The reconstruction is the
frame quantized to 8 bits, which is exact for 8-bit sources.
"""

import struct
import zlib

import numpy as np
import torch

from ctxcodec.bitstream.intra.base import IntraCodec
from ctxcodec.exceptions import CorruptionError
from ctxcodec.video.frames import check_frame

SIZE = struct.Struct(">II")


class LosslessDeflateIntra(IntraCodec):
    """Deflate-compressed 8-bit planes (``lossless-deflate``)."""

    codec_id = 0
    name = "lossless-deflate"

    def __init__(self, level: int = 9):
        self.level = level

    def encode(self, frame: torch.Tensor) -> bytes:
        check_frame(frame)
        planes = torch.round(frame.detach().cpu() * 255.0).to(torch.uint8).numpy()
        _, height, width = planes.shape
        return SIZE.pack(width, height) + zlib.compress(planes.tobytes(), self.level)

    def decode(self, payload: bytes) -> torch.Tensor:
        if len(payload) < SIZE.size:
            raise CorruptionError("intra payload shorter than its size header")
        width, height = SIZE.unpack_from(payload)
        try:
            raw = zlib.decompress(payload[SIZE.size :])
        except zlib.error as e:
            raise CorruptionError(f"intra payload does not inflate: {e}") from e
        if len(raw) != 3 * width * height:
            raise CorruptionError(f"intra payload holds {len(raw)} bytes, expected {3 * width * height}")
        planes = np.frombuffer(raw, dtype=np.uint8).reshape(3, height, width)
        return torch.from_numpy(planes.astype(np.float32) / 255.0)
