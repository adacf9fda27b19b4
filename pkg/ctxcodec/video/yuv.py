"""
Raw planar YUV 4:2:0 (8-bit) input and output.

Colour conversion uses the BT.601 limited-range matrices. With R, G, B in
[0, 1]::

    Y  =  16 +  65.481 R + 128.553 G +  24.966 B
    Cb = 128 -  37.797 R -  74.203 G + 112.000 B
    Cr = 128 + 112.000 R -  93.786 G -  18.214 B

and the inverse (values divided by 255, then clamped to [0, 1])::

    R = 1.164383 (Y - 16)                       + 1.596027 (Cr - 128)
    G = 1.164383 (Y - 16) - 0.391762 (Cb - 128) - 0.812968 (Cr - 128)
    B = 1.164383 (Y - 16) + 2.017232 (Cb - 128)

Chroma is box-averaged over 2x2 blocks on write and nearest-upsampled on read.
Odd frame sizes are rejected rather than cropped.
"""

import logging
import os
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import torch

from ctxcodec.exceptions import ArgumentError, EmptyInputError, MalformedInputError
from ctxcodec.video.frames import FrameSequence, check_frame

logger = logging.getLogger(__name__)

RGB_TO_YUV = np.array(
    [
        [65.481, 128.553, 24.966],
        [-37.797, -74.203, 112.0],
        [112.0, -93.786, -18.214],
    ],
    dtype=np.float64,
)
YUV_OFFSET = np.array([16.0, 128.0, 128.0], dtype=np.float64)
YUV_TO_RGB = np.array(
    [
        [1.164383, 0.0, 1.596027],
        [1.164383, -0.391762, -0.812968],
        [1.164383, 2.017232, 0.0],
    ],
    dtype=np.float64,
)


def _check_even(width: int, height: int) -> None:
    if width < 2 or height < 2 or width % 2 or height % 2:
        raise ArgumentError(f"YUV 4:2:0 needs even width and height, got {width}x{height}")


def rgb_to_yuv(frame: torch.Tensor) -> np.ndarray:
    """
    Convert an RGB frame to full-resolution 8-bit YUV planes.

    Args:
        frame: ``[3, H, W]`` tensor in [0, 1]

    Returns:
        ``uint8`` array of shape ``[3, H, W]`` (Y, Cb, Cr)
    """
    check_frame(frame)
    rgb = frame.detach().cpu().double().numpy()
    yuv = np.einsum("ij,jhw->ihw", RGB_TO_YUV, rgb) + YUV_OFFSET[:, None, None]
    return np.clip(np.rint(yuv), 0, 255).astype(np.uint8)


def yuv_to_rgb(yuv: np.ndarray) -> torch.Tensor:
    """
    Convert full-resolution 8-bit YUV planes to an RGB frame in [0, 1].

    Args:
        yuv: ``[3, H, W]`` array (Y, Cb, Cr), any integer or float dtype

    Returns:
        ``[3, H, W]`` float32 tensor
    """
    planes = yuv.astype(np.float64) - YUV_OFFSET[:, None, None]
    rgb = np.einsum("ij,jhw->ihw", YUV_TO_RGB, planes) / 255.0
    return torch.from_numpy(np.clip(rgb, 0.0, 1.0).astype(np.float32))


def rgb_to_yuv420(frame: torch.Tensor) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Convert an RGB frame to 8-bit 4:2:0 planes.

    Returns:
        ``(y, u, v)`` with shapes ``[H, W]``, ``[H/2, W/2]``, ``[H/2, W/2]``
    """
    height, width = frame.shape[1:]
    _check_even(width, height)
    rgb = frame.detach().cpu().double().numpy()
    yuv = np.einsum("ij,jhw->ihw", RGB_TO_YUV, rgb) + YUV_OFFSET[:, None, None]
    y = yuv[0]
    chroma = yuv[1:].reshape(2, height // 2, 2, width // 2, 2).mean(axis=(2, 4))
    to_u8 = lambda a: np.clip(np.rint(a), 0, 255).astype(np.uint8)  # noqa: E731
    return to_u8(y), to_u8(chroma[0]), to_u8(chroma[1])


def yuv420_to_rgb(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> torch.Tensor:
    """Convert 8-bit 4:2:0 planes to an RGB frame in [0, 1]."""
    u_full = u.repeat(2, axis=0).repeat(2, axis=1)
    v_full = v.repeat(2, axis=0).repeat(2, axis=1)
    return yuv_to_rgb(np.stack([y, u_full, v_full], axis=0))


def load_yuv420(
    path: Union[str, Path], width: int, height: int, max_frames: int = 0, frame_rate: float = 30.0
) -> FrameSequence:
    """
    Read a planar YUV 4:2:0 8-bit file.

    Args:
        path: File path
        width: Frame width in pixels (even)
        height: Frame height in pixels (even)
        max_frames: Maximum number of frames to read (0 reads all)
        frame_rate: Frame rate stored as metadata

    Returns:
        FrameSequence with ``min(max_frames, available)`` frames

    Raises:
        ArgumentError: If width or height is odd
        MalformedInputError: If the file length is not a whole number of frames
        EmptyInputError: If the file holds no frames
    """
    _check_even(width, height)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"YUV file not found: {path}")

    frame_bytes = width * height * 3 // 2
    size = os.path.getsize(path)
    if size % frame_bytes:
        raise MalformedInputError(
            f"{path}: {size} bytes is not a multiple of the {frame_bytes}-byte frame size "
            f"for {width}x{height}"
        )
    available = size // frame_bytes
    if available == 0:
        raise EmptyInputError(f"{path}: no frames")
    count = available if max_frames <= 0 else min(max_frames, available)

    luma = width * height
    chroma = luma // 4
    frames = []
    with open(path, "rb") as handle:
        for _ in range(count):
            raw = np.frombuffer(handle.read(frame_bytes), dtype=np.uint8)
            y = raw[:luma].reshape(height, width)
            u = raw[luma : luma + chroma].reshape(height // 2, width // 2)
            v = raw[luma + chroma :].reshape(height // 2, width // 2)
            frames.append(yuv420_to_rgb(y, u, v))

    logger.debug("loaded %d frame(s) of %dx%d from %s", count, width, height, path)
    return FrameSequence(frames=frames, frame_rate=frame_rate)


def write_yuv420(seq: FrameSequence, path: Union[str, Path]) -> int:
    """
    Write a sequence as planar YUV 4:2:0 8-bit.

    Returns:
        Number of bytes written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(path, "wb") as handle:
        for frame in seq:
            for plane in rgb_to_yuv420(frame):
                written += handle.write(plane.tobytes())
    return written
