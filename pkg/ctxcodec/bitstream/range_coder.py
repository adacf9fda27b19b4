"""
Carry-less range coder (Subbotin style) with a 64-bit state.

A byte leaves the encoder once the top bytes of ``low`` and ``low + range``
agree. When the range falls below ``BOTTOM`` while the interval still
straddles a byte boundary, the range is cut back to that boundary and a byte
is emitted. The decoder mirrors every step, reading zeros past the end of the
data.

Frequencies are 16-bit (total 65536), see :mod:`ctxcodec.bitstream.cdf`.
"""

import logging
from typing import List, Sequence

import numpy as np

from ctxcodec.bitstream.cdf import PRECISION_BITS, CdfTable
from ctxcodec.exceptions import CorruptionError, SymbolRangeError

logger = logging.getLogger(__name__)

PRECISION = 64
TOP = 1 << (PRECISION - 8)
BOTTOM = 1 << (PRECISION - 32)
MASK = (1 << PRECISION) - 1
MIN_FLUSH_BYTES = 2
# A complete stream never leaves the decoder more than this many bytes short.
MAX_ZERO_FILL = PRECISION // 8 - MIN_FLUSH_BYTES


class RangeEncoder:
    """Incremental encoder; call :meth:`encode` per symbol, then :meth:`finish`."""

    def __init__(self):
        self.low = 0
        self.range = MASK
        self.out = bytearray()

    def _emit(self) -> None:
        self.out.append(self.low >> (PRECISION - 8))
        self.low = (self.low << 8) & MASK
        self.range <<= 8

    def encode(self, start: int, frequency: int) -> None:
        """Narrow the interval to ``[start, start + frequency)`` out of 2**16."""
        if frequency <= 0:
            raise SymbolRangeError("cannot encode a zero-frequency symbol")
        step = self.range >> PRECISION_BITS
        self.low += start * step
        self.range = frequency * step
        while True:
            if (self.low ^ (self.low + self.range)) < TOP:
                self._emit()
            elif self.range < BOTTOM:
                self.range = (MASK + 1 - self.low) & (BOTTOM - 1)
                self._emit()
            else:
                break

    def finish(self) -> bytes:
        """Emit the shortest prefix (at least two bytes) that selects a value in the final interval."""
        high = self.low + self.range
        for count in range(MIN_FLUSH_BYTES, PRECISION // 8 + 1):
            unit = 1 << (PRECISION - 8 * count)
            value = -(-self.low // unit) * unit
            if value < high:
                break
        for _ in range(count):
            self.out.append(value >> (PRECISION - 8))
            value = (value << 8) & MASK
        return bytes(self.out)


class RangeDecoder:
    """Incremental decoder over a complete byte string."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.low = 0
        self.range = MASK
        self.value = 0
        for _ in range(PRECISION // 8):
            self.value = (self.value << 8) | self._next_byte()

    def _next_byte(self) -> int:
        pos = self.pos
        self.pos += 1
        if pos < len(self.data):
            return self.data[pos]
        if pos - len(self.data) >= MAX_ZERO_FILL:
            raise CorruptionError(f"range-coded data truncated after {len(self.data)} bytes")
        return 0

    def _shift(self) -> None:
        self.value = ((self.value << 8) | self._next_byte()) & MASK
        self.low = (self.low << 8) & MASK
        self.range <<= 8

    def decode(self, cdf_row: np.ndarray) -> int:
        """Decode one symbol against a cumulative row ``[0, ..., 65536]``; returns its column."""
        step = self.range >> PRECISION_BITS
        target = (self.value - self.low) // step
        if target < 0 or target >= int(cdf_row[-1]):
            raise CorruptionError("range-coded data is inconsistent with its tables")
        column = int(np.searchsorted(cdf_row, target, side="right")) - 1
        start = int(cdf_row[column])
        self.low += start * step
        self.range = (int(cdf_row[column + 1]) - start) * step
        while True:
            if (self.low ^ (self.low + self.range)) < TOP:
                self._shift()
            elif self.range < BOTTOM:
                self.range = (MASK + 1 - self.low) & (BOTTOM - 1)
                self._shift()
            else:
                break
        return column


def range_encode(symbols: Sequence[int], cdfs: CdfTable) -> bytes:
    """
    Encode ``symbols[i]`` with row ``i`` of ``cdfs``.

    Raises:
        SymbolRangeError: If a symbol lies outside its table
    """
    symbols = np.asarray(symbols, dtype=np.int64).reshape(-1)
    if symbols.size != cdfs.num_rows:
        raise SymbolRangeError(f"{symbols.size} symbols for {cdfs.num_rows} tables")
    columns = cdfs.columns_of(symbols)
    encoder = RangeEncoder()
    cdf = cdfs.cdf
    for row, column in enumerate(columns.tolist()):
        start = int(cdf[row, column])
        encoder.encode(start, int(cdf[row, column + 1]) - start)
    data = encoder.finish()
    logger.debug("range coded %d symbols into %d bytes", symbols.size, len(data))
    return data


def range_decode(data: bytes, cdfs: CdfTable) -> np.ndarray:
    """
    Decode one symbol per row of ``cdfs``.

    Raises:
        CorruptionError: If the data is truncated or inconsistent
    """
    decoder = RangeDecoder(data)
    out: List[int] = []
    for row in range(cdfs.num_rows):
        out.append(decoder.decode(cdfs.cdf[row]) + int(cdfs.offsets[row]))
    return np.asarray(out, dtype=np.int64)
