"""
Container format.

All integers are big-endian::

    header  = "DCV1" | version u8 | width u32 | height u32
              | padded width u32 | padded height u32 | gop size u16
              | entropy mode u8 | condition mode u8 | motion mode u8
              | context dim u16 | intra id u8 | frame count u32
    I record = 0x00 | intra id u8 | length u32 | payload
    P record = 0x01 | 4 x (length u32 | substream), in the order g, s, y, z

A substream starts with the ``u16`` symbol range of its tables.
"""

import struct
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ctxcodec.config import (
    CONDITION_MODE_IDS,
    ENTROPY_MODE_IDS,
    MOTION_MODE_IDS,
    ConditionMode,
    EntropyMode,
    MotionMode,
    condition_mode_from_id,
    entropy_mode_from_id,
    motion_mode_from_id,
)
from ctxcodec.exceptions import ArgumentError, ConfigurationError, CorruptionError, MalformedInputError

MAGIC = b"DCV1"
FORMAT_VERSION = 1
HEADER = struct.Struct(">4sBIIIIHBBBHBI")
LENGTH = struct.Struct(">I")
SUBSTREAM_NAMES = ("g", "s", "y", "z")
LENGTH_PREFIX_BITS = 8 * LENGTH.size


class FrameType(IntEnum):
    I = 0  # noqa: E741
    P = 1


@dataclass
class FrameBitstream:
    """
    Coded data of one frame.

    I frames carry ``intra_id`` and ``payload``; P frames carry exactly four
    substreams in the order g, s, y, z.
    """

    frame_type: FrameType
    substreams: List[bytes] = field(default_factory=list)
    intra_id: Optional[int] = None
    payload: bytes = b""

    def __post_init__(self):
        self.frame_type = FrameType(self.frame_type)
        if self.frame_type is FrameType.P and len(self.substreams) != len(SUBSTREAM_NAMES):
            raise ArgumentError(f"P frames carry exactly 4 substreams, got {len(self.substreams)}")
        if self.frame_type is FrameType.I and self.intra_id is None:
            raise ArgumentError("I frames need an intra codec id")

    @property
    def total_bits(self) -> int:
        """Record size in bits, excluding the frame type byte."""
        if self.frame_type is FrameType.P:
            return len(SUBSTREAM_NAMES) * LENGTH_PREFIX_BITS + 8 * sum(len(s) for s in self.substreams)
        return 8 + LENGTH_PREFIX_BITS + 8 * len(self.payload)

    def substream_bits(self) -> dict:
        if self.frame_type is not FrameType.P:
            return {}
        return {name: 8 * len(data) for name, data in zip(SUBSTREAM_NAMES, self.substreams)}

    def to_bytes(self) -> bytes:
        out = bytearray([int(self.frame_type)])
        if self.frame_type is FrameType.I:
            out.append(self.intra_id)
            out += LENGTH.pack(len(self.payload)) + self.payload
        else:
            for data in self.substreams:
                out += LENGTH.pack(len(data)) + data
        return bytes(out)


@dataclass
class ContainerHeader:
    width: int
    height: int
    padded_width: int
    padded_height: int
    gop_size: int
    entropy_mode: EntropyMode
    condition_mode: ConditionMode
    motion_mode: MotionMode
    context_dim: int
    intra_id: int
    frame_count: int
    version: int = FORMAT_VERSION

    def pack(self) -> bytes:
        try:
            return HEADER.pack(
                MAGIC,
                self.version,
                self.width,
                self.height,
                self.padded_width,
                self.padded_height,
                self.gop_size,
                ENTROPY_MODE_IDS[EntropyMode(self.entropy_mode)],
                CONDITION_MODE_IDS[ConditionMode(self.condition_mode)],
                MOTION_MODE_IDS[MotionMode(self.motion_mode)],
                self.context_dim,
                self.intra_id,
                self.frame_count,
            )
        except struct.error as e:
            raise ArgumentError(f"header field out of range: {e}") from e

    @classmethod
    def unpack(cls, data: bytes) -> "ContainerHeader":
        if len(data) < HEADER.size:
            raise CorruptionError(f"container shorter than its {HEADER.size}-byte header")
        fields = HEADER.unpack_from(data)
        magic, version = fields[0], fields[1]
        if magic != MAGIC:
            raise MalformedInputError(f"not a ctxcodec container (magic {magic!r})")
        if version != FORMAT_VERSION:
            raise ConfigurationError(f"unsupported container version {version}")
        try:
            entropy_mode = entropy_mode_from_id(fields[7])
            condition_mode = condition_mode_from_id(fields[8])
            motion_mode = motion_mode_from_id(fields[9])
        except ConfigurationError as e:
            raise CorruptionError(str(e)) from e
        return cls(
            width=fields[2],
            height=fields[3],
            padded_width=fields[4],
            padded_height=fields[5],
            gop_size=fields[6],
            entropy_mode=entropy_mode,
            condition_mode=condition_mode,
            motion_mode=motion_mode,
            context_dim=fields[10],
            intra_id=fields[11],
            frame_count=fields[12],
            version=version,
        )


def _read_length_prefixed(data: bytes, pos: int, substream: Optional[int] = None) -> Tuple[bytes, int]:
    if pos + LENGTH.size > len(data):
        raise CorruptionError("truncated length prefix", substream)
    (length,) = LENGTH.unpack_from(data, pos)
    pos += LENGTH.size
    if pos + length > len(data):
        raise CorruptionError(f"declared {length} bytes, {len(data) - pos} available", substream)
    return data[pos : pos + length], pos + length


def read_record(data: bytes, pos: int) -> Tuple[FrameBitstream, int]:
    if pos >= len(data):
        raise CorruptionError("missing frame record")
    frame_type = data[pos]
    pos += 1
    if frame_type == FrameType.I:
        if pos >= len(data):
            raise CorruptionError("truncated I record")
        intra_id = data[pos]
        payload, pos = _read_length_prefixed(data, pos + 1)
        return FrameBitstream(FrameType.I, intra_id=intra_id, payload=payload), pos
    if frame_type == FrameType.P:
        substreams = []
        for index in range(len(SUBSTREAM_NAMES)):
            chunk, pos = _read_length_prefixed(data, pos, substream=index)
            substreams.append(chunk)
        return FrameBitstream(FrameType.P, substreams=substreams), pos
    raise CorruptionError(f"unknown frame type {frame_type}")


@dataclass
class BitstreamContainer:
    """Header plus ordered frame records."""

    header: ContainerHeader
    records: List[FrameBitstream] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        if self.header.frame_count != len(self.records):
            raise ArgumentError(
                f"header declares {self.header.frame_count} frames, container has {len(self.records)}"
            )
        return self.header.pack() + b"".join(record.to_bytes() for record in self.records)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitstreamContainer":
        header = ContainerHeader.unpack(data)
        pos = HEADER.size
        records = []
        for _ in range(header.frame_count):
            record, pos = read_record(data, pos)
            records.append(record)
        if pos != len(data):
            raise CorruptionError(f"{len(data) - pos} trailing bytes after the last record")
        return cls(header=header, records=records)

    def write(self, path: Union[str, Path]) -> int:
        data = self.to_bytes()
        Path(path).write_bytes(data)
        return len(data)

    @classmethod
    def read(cls, path: Union[str, Path]) -> "BitstreamContainer":
        return cls.from_bytes(Path(path).read_bytes())
