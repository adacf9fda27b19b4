"""
Frame containers and spatial helpers.

A frame is a float32 torch tensor of shape ``[3, H, W]`` holding RGB values in
``[0, 1]``. Network code works on batched ``[N, C, H, W]`` tensors; the helpers
here convert between the two and pad/crop to the multiple-of-64 grid the codec
requires.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Tuple

import torch
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError, EmptyInputError, MalformedInputError

PAD_MULTIPLE = 64


def check_frame(frame: torch.Tensor, name: str = "frame") -> None:
    """
    Validate a single ``[3, H, W]`` frame.

    Raises:
        ArgumentError: If the shape or value range is wrong
    """
    if frame.dim() != 3 or frame.shape[0] != 3:
        raise ArgumentError(f"{name} must have shape [3, H, W], got {tuple(frame.shape)}")
    if frame.shape[1] < 1 or frame.shape[2] < 1:
        raise ArgumentError(f"{name} must be at least 1x1")
    if frame.numel() and (frame.min() < 0.0 or frame.max() > 1.0):
        raise ArgumentError(f"{name} values must lie in [0, 1]")


def as_batch(x: torch.Tensor) -> torch.Tensor:
    """Return ``x`` as a 4-D batch, adding a leading axis to 3-D input."""
    if x.dim() == 3:
        return x.unsqueeze(0)
    if x.dim() != 4:
        raise ArgumentError(f"expected a [C, H, W] or [N, C, H, W] tensor, got {tuple(x.shape)}")
    return x


@dataclass
class FrameSequence:
    """
    Ordered RGB frames of identical size.

    Attributes:
        frames: ``[3, H, W]`` float tensors in [0, 1]
        frame_rate: Frames per second (metadata only)
    """

    frames: List[torch.Tensor] = field(default_factory=list)
    frame_rate: float = 30.0

    def __post_init__(self):
        if not self.frames:
            raise EmptyInputError("frame sequence is empty")
        for i, frame in enumerate(self.frames):
            check_frame(frame, name=f"frame {i}")
        height, width = self.frames[0].shape[1:]
        for i, frame in enumerate(self.frames[1:], start=1):
            if tuple(frame.shape[1:]) != (height, width):
                raise MalformedInputError(
                    f"frame {i} is {frame.shape[2]}x{frame.shape[1]}, expected {width}x{height}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[torch.Tensor]:
        return iter(self.frames)

    def __getitem__(self, index: int) -> torch.Tensor:
        return self.frames[index]

    @property
    def height(self) -> int:
        return int(self.frames[0].shape[1])

    @property
    def width(self) -> int:
        return int(self.frames[0].shape[2])

    def stacked(self) -> torch.Tensor:
        """All frames as one ``[T, 3, H, W]`` tensor."""
        return torch.stack(self.frames, dim=0)


def padded_size(height: int, width: int, multiple: int = PAD_MULTIPLE) -> Tuple[int, int]:
    """Smallest (height, width) that are multiples of ``multiple`` and cover the input."""
    return (-(-height // multiple) * multiple, -(-width // multiple) * multiple)


def pad_to_multiple(x: torch.Tensor, multiple: int = PAD_MULTIPLE) -> torch.Tensor:
    """
    Reflect-pad the spatial dims of ``x`` (3-D or 4-D) at the bottom/right.

    Falls back to replicate padding when a side is too small to reflect.
    """
    height, width = x.shape[-2:]
    pad_h, pad_w = padded_size(height, width, multiple)
    if (pad_h, pad_w) == (height, width):
        return x
    batch = as_batch(x)
    pads = (0, pad_w - width, 0, pad_h - height)
    mode = "reflect" if pad_h - height < height and pad_w - width < width else "replicate"
    out = F.pad(batch, pads, mode=mode)
    return out if x.dim() == 4 else out.squeeze(0)


def crop(x: torch.Tensor, height: int, width: int) -> torch.Tensor:
    """Crop the spatial dims of ``x`` to the top-left ``height`` x ``width`` window."""
    if x.shape[-2] < height or x.shape[-1] < width:
        raise ArgumentError(
            f"cannot crop {x.shape[-1]}x{x.shape[-2]} to larger size {width}x{height}"
        )
    return x[..., :height, :width]
