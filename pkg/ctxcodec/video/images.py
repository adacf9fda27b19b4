"""
Image-sequence input and output (PNG, PPM and anything else Pillow reads).
"""

import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import torch
from PIL import Image

from ctxcodec.exceptions import EmptyInputError, MalformedInputError
from ctxcodec.video.frames import FrameSequence

logger = logging.getLogger(__name__)


def image_to_frame(image: Image.Image) -> torch.Tensor:
    """Convert a Pillow image to a ``[3, H, W]`` float tensor in [0, 1]."""
    array = np.asarray(image.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(np.ascontiguousarray(array.transpose(2, 0, 1)))


def frame_to_image(frame: torch.Tensor) -> Image.Image:
    """Convert a ``[3, H, W]`` frame to an 8-bit RGB Pillow image."""
    array = frame.detach().cpu().clamp(0.0, 1.0).numpy().transpose(1, 2, 0)
    return Image.fromarray(np.rint(array * 255.0).astype(np.uint8))


def load_image_sequence(
    directory: Union[str, Path], pattern: str = "*.png", frame_rate: float = 30.0
) -> FrameSequence:
    """
    Load the images in ``directory`` matching ``pattern`` as one sequence.

    Frames are ordered by file name (lexicographic).

    Args:
        directory: Directory holding the images
        pattern: Glob pattern (default ``*.png``)
        frame_rate: Frame rate stored as metadata

    Raises:
        EmptyInputError: If nothing matches
        MalformedInputError: If image sizes differ
    """
    directory = Path(directory)
    paths: List[Path] = sorted(p for p in directory.glob(pattern) if p.is_file())
    if not paths:
        raise EmptyInputError(f"no images matching {pattern!r} in {directory}")

    frames = []
    size = None
    for path in paths:
        with Image.open(path) as image:
            if size is None:
                size = image.size
            elif image.size != size:
                raise MalformedInputError(
                    f"{path.name} is {image.size[0]}x{image.size[1]}, expected {size[0]}x{size[1]}"
                )
            frames.append(image_to_frame(image))

    logger.debug("loaded %d image(s) from %s", len(frames), directory)
    return FrameSequence(frames=frames, frame_rate=frame_rate)


def save_image_sequence(seq: FrameSequence, directory: Union[str, Path], prefix: str = "frame") -> List[Path]:
    """
    Write each frame as ``<prefix>_NNNNN.png``.

    Returns:
        Paths written, in frame order
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for index, frame in enumerate(seq):
        path = directory / f"{prefix}_{index:05d}.png"
        frame_to_image(frame).save(path)
        paths.append(path)
    return paths
