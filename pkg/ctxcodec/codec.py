"""
ctxcodec codec facade.

``ContextualVideoCodec`` bundles a trained P-frame model, the registered
intra codecs and a device, and exposes sequence- and file-level encode and
decode.
"""

import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import torch

from ctxcodec.bitstream.container import BitstreamContainer
from ctxcodec.bitstream.intra.registry import IntraRegistry, default_registry
from ctxcodec.bitstream.sequence import (
    FrameRateRecord,
    decode_sequence,
    encode_sequence_with_reconstruction,
    rate_records,
    write_rate_report,
)
from ctxcodec.config import CodecConfig
from ctxcodec.exceptions import ArgumentError
from ctxcodec.model import VideoModel
from ctxcodec.training.checkpoint import intra_from_checkpoint, load_checkpoint, model_from_checkpoint
from ctxcodec.video.frames import FrameSequence
from ctxcodec.video.gop import DEFAULT_GOP_IMAGES, DEFAULT_GOP_YUV, segment_gops
from ctxcodec.video.images import load_image_sequence, save_image_sequence
from ctxcodec.video.yuv import load_yuv420, write_yuv420

logger = logging.getLogger(__name__)


class ContextualVideoCodec:
    """
    Contextual video codec for one trained configuration.

    Example:
        >>> codec = ContextualVideoCodec.from_checkpoint("final.pt")
        >>> container, recon = codec.encode_sequence(seq, gop_size=10)
        >>> frames = codec.decode_sequence(container)
    """

    def __init__(
        self,
        model: VideoModel,
        registry: Optional[IntraRegistry] = None,
        device: str = "cpu",
        intra_id: int = 0,
    ):
        """
        Args:
            model: P-frame networks
            registry: Intra codecs (default: lossless plug only)
            device: Torch device for the networks
            intra_id: Intra codec used when encoding
        """
        self.device = torch.device(device)
        self.model = model.to(self.device).eval()
        self.registry = registry or default_registry()
        self.intra_id = intra_id
        self.registry.get(intra_id)
        for codec_id in self.registry.ids():
            codec = self.registry.get(codec_id)
            if isinstance(codec, torch.nn.Module):
                codec.to(self.device).eval()

    @property
    def config(self) -> CodecConfig:
        return self.model.config

    @classmethod
    def from_checkpoint(
        cls, path: Union[str, Path], device: str = "cpu", intra_id: Optional[int] = None
    ) -> "ContextualVideoCodec":
        """
        Load model and (if saved) the toy intra codec; the toy plug is the default intra when present.
        """
        ckpt = load_checkpoint(path, map_location="cpu")
        toy = intra_from_checkpoint(ckpt)
        registry = default_registry(toy)
        if intra_id is None:
            intra_id = toy.codec_id if toy is not None else 0
        return cls(model_from_checkpoint(ckpt), registry, device=device, intra_id=intra_id)

    def encode_sequence(
        self, seq: FrameSequence, gop_size: int, workers: int = 1
    ) -> Tuple[BitstreamContainer, FrameSequence]:
        """Encode ``seq``; returns the container and the encoder-side reconstruction."""
        seq = FrameSequence([f.to(self.device) for f in seq], frame_rate=seq.frame_rate)
        return encode_sequence_with_reconstruction(
            seq, segment_gops(seq, gop_size), self.model, self.registry.get(self.intra_id), workers
        )

    def decode_sequence(self, container: BitstreamContainer, workers: int = 1) -> FrameSequence:
        return decode_sequence(container, self.model, self.registry, workers)

    def encode_file(
        self,
        input_path: Union[str, Path],
        output_path: Union[str, Path],
        size: Optional[Tuple[int, int]] = None,
        gop_size: Optional[int] = None,
        max_frames: int = 0,
        report_path: Optional[Union[str, Path]] = None,
    ) -> list:
        """
        Encode a ``.yuv`` file (``size`` required) or an image directory to a container file.

        Returns:
            Per-frame rate records
        """
        input_path = Path(input_path)
        if input_path.is_dir():
            seq = load_image_sequence(input_path)
            if max_frames:
                seq = FrameSequence(seq.frames[:max_frames], seq.frame_rate)
            default_gop = DEFAULT_GOP_IMAGES
        else:
            if size is None:
                raise ArgumentError("raw YUV input needs --size WxH")
            seq = load_yuv420(input_path, size[0], size[1], max_frames=max_frames)
            default_gop = DEFAULT_GOP_YUV
        container, _ = self.encode_sequence(seq, gop_size or default_gop)
        written = container.write(output_path)
        records = rate_records(container)
        if report_path is not None:
            write_rate_report(records, report_path)
        logger.info("wrote %d bytes for %d frames to %s", written, len(seq), output_path)
        return records

    def decode_file(self, input_path: Union[str, Path], output_path: Union[str, Path]) -> FrameSequence:
        """Decode a container file to PNGs in a directory, or to raw YUV when ``output_path`` ends in ``.yuv``."""
        seq = self.decode_sequence(BitstreamContainer.read(input_path))
        output_path = Path(output_path)
        if output_path.suffix.lower() == ".yuv":
            write_yuv420(seq, output_path)
        else:
            save_image_sequence(seq, output_path)
        return seq


__all__ = ["ContextualVideoCodec", "FrameRateRecord"]
