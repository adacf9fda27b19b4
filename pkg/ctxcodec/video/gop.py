"""
Group-of-pictures segmentation.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from ctxcodec.exceptions import ArgumentError
from ctxcodec.video.frames import FrameSequence

# Defaults: raw YUV (HEVC-style test material) and image sequences.
DEFAULT_GOP_YUV = 10
DEFAULT_GOP_IMAGES = 12


class FrameRole(str, Enum):
    I = "I"  # noqa: E741
    P = "P"


@dataclass(frozen=True)
class GopStructure:
    """
    Frame roles of a sequence split into GOPs.

    Attributes:
        gop_size: Frames per GOP
        frame_roles: One role per frame; every GOP starts with an I frame
    """

    gop_size: int
    frame_roles: Tuple[FrameRole, ...]

    def gops(self) -> List[Tuple[int, int]]:
        """``(start, length)`` of each GOP in frame order."""
        total = len(self.frame_roles)
        return [
            (start, min(self.gop_size, total - start)) for start in range(0, total, self.gop_size)
        ]

    @property
    def intra_count(self) -> int:
        return sum(1 for role in self.frame_roles if role is FrameRole.I)


def segment_gops(seq: FrameSequence, gop_size: int) -> GopStructure:
    """
    Assign I/P roles: frame 0 of each GOP is I, the others P.

    Args:
        seq: Input sequence (only its length is used)
        gop_size: Frames per GOP (>= 1)

    Raises:
        ArgumentError: If gop_size < 1
    """
    return segment_length(len(seq), gop_size)


def segment_length(num_frames: int, gop_size: int) -> GopStructure:
    """Same as :func:`segment_gops` for a bare frame count."""
    if gop_size < 1:
        raise ArgumentError(f"gop_size must be >= 1, got: {gop_size}")
    roles = tuple(FrameRole.I if i % gop_size == 0 else FrameRole.P for i in range(num_frames))
    return GopStructure(gop_size=gop_size, frame_roles=roles)
