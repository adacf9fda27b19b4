"""
Sequence encoding and decoding.

Each GOP starts with an I frame coded by the intra plug; every following P
frame references the previous *decoded* frame. GOPs share no state, so they
can be coded concurrently.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import torch

from ctxcodec.bitstream.container import BitstreamContainer, ContainerHeader, FrameBitstream, FrameType
from ctxcodec.bitstream.frame_coder import decode_frame_p, encode_frame_p
from ctxcodec.bitstream.intra.base import IntraCodec
from ctxcodec.bitstream.intra.registry import IntraRegistry
from ctxcodec.exceptions import ArgumentError, ConfigurationError, CorruptionError
from ctxcodec.model import VideoModel
from ctxcodec.video.frames import FrameSequence, crop, pad_to_multiple
from ctxcodec.video.gop import FrameRole, GopStructure, segment_length

logger = logging.getLogger(__name__)


@dataclass
class FrameRateRecord:
    """Per-frame rate accounting; ``bpp`` counts all bits of the record over the original pixels."""

    frame: int
    type: str
    bits_g: int
    bits_s: int
    bits_y: int
    bits_z: int
    bits_intra: int
    bpp: float


def _encode_gop(
    frames: List[torch.Tensor], model: VideoModel, intra: IntraCodec
) -> Tuple[List[FrameBitstream], List[torch.Tensor]]:
    records, recons = [], []
    payload, recon = intra.encode_with_reconstruction(frames[0])
    records.append(FrameBitstream(FrameType.I, intra_id=intra.codec_id, payload=payload))
    recons.append(recon.to(frames[0].device))
    for frame in frames[1:]:
        bits, recon = encode_frame_p(frame, recons[-1], model)
        records.append(bits)
        recons.append(recon)
    return records, recons


def encode_sequence_with_reconstruction(
    seq: FrameSequence,
    gops: GopStructure,
    model: VideoModel,
    intra: IntraCodec,
    workers: int = 1,
) -> Tuple[BitstreamContainer, FrameSequence]:
    """
    Encode a sequence and return the encoder-side reconstruction (cropped) with it.

    Args:
        seq: Input frames (any size; padded to multiples of 64 internally)
        gops: GOP structure with one role per frame
        model: P-frame networks
        intra: Intra plug for the I frames
        workers: GOPs coded concurrently
    """
    if len(gops.frame_roles) != len(seq):
        raise ArgumentError(f"GOP structure covers {len(gops.frame_roles)} frames, sequence has {len(seq)}")
    height, width = seq.height, seq.width
    padded = [pad_to_multiple(frame) for frame in seq]
    config = model.config
    header = ContainerHeader(
        width=width,
        height=height,
        padded_width=padded[0].shape[-1],
        padded_height=padded[0].shape[-2],
        gop_size=gops.gop_size,
        entropy_mode=config.entropy_mode,
        condition_mode=config.condition_mode,
        motion_mode=config.motion_mode,
        context_dim=config.context_dim,
        intra_id=intra.codec_id,
        frame_count=len(seq),
    )

    spans = gops.gops()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda span: _encode_gop(padded[span[0] : span[0] + span[1]], model, intra), spans))

    records, recons = [], []
    for gop_records, gop_recons in results:
        records += gop_records
        recons += gop_recons
    container = BitstreamContainer(header=header, records=records)
    logger.info("encoded %d frames in %d GOP(s)", len(seq), len(spans))
    reconstruction = FrameSequence([crop(frame, height, width) for frame in recons], frame_rate=seq.frame_rate)
    return container, reconstruction


def encode_sequence(
    seq: FrameSequence,
    gops: GopStructure,
    model: VideoModel,
    intra: IntraCodec,
    workers: int = 1,
) -> BitstreamContainer:
    """Encode ``seq`` into a container (see :func:`encode_sequence_with_reconstruction`)."""
    container, _ = encode_sequence_with_reconstruction(seq, gops, model, intra, workers)
    return container


def check_header(header: ContainerHeader, model: VideoModel) -> None:
    """
    Raise ``ConfigurationError`` if the container was coded with other modes than ``model``.
    """
    config = model.config
    expected = (config.entropy_mode, config.condition_mode, config.motion_mode, config.context_dim)
    found = (header.entropy_mode, header.condition_mode, header.motion_mode, header.context_dim)
    if expected != found:
        raise ConfigurationError(f"container was coded with {found}, model is configured for {expected}")


def _decode_gop(records: List[FrameBitstream], model: VideoModel, registry: IntraRegistry) -> List[torch.Tensor]:
    first = records[0]
    if first.frame_type is not FrameType.I:
        raise CorruptionError("GOP does not start with an I record")
    device = next(model.parameters()).device
    recons = [registry.get(first.intra_id).decode(first.payload).to(device)]
    for record in records[1:]:
        if record.frame_type is not FrameType.P:
            raise CorruptionError("I record inside a GOP")
        recons.append(decode_frame_p(record, recons[-1], model))
    return recons


def decode_sequence(
    container: BitstreamContainer, model: VideoModel, registry: IntraRegistry, workers: int = 1
) -> FrameSequence:
    """
    Decode a container to frames cropped to the original size.

    Raises:
        UnsupportedCodecError: If an I record uses an unregistered intra id
        ConfigurationError: If the model does not match the header
    """
    header = container.header
    check_header(header, model)
    if header.frame_count != len(container.records):
        raise CorruptionError(f"header declares {header.frame_count} frames, found {len(container.records)}")
    if header.frame_count == 0:
        raise CorruptionError("container holds no frames")
    registry.get(header.intra_id)
    gops = segment_length(header.frame_count, header.gop_size)
    for index, (role, record) in enumerate(zip(gops.frame_roles, container.records)):
        expected = FrameType.I if role is FrameRole.I else FrameType.P
        if record.frame_type is not expected:
            raise CorruptionError(f"frame {index}: expected a {expected.name} record")

    spans = gops.gops()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(
            pool.map(lambda span: _decode_gop(container.records[span[0] : span[0] + span[1]], model, registry), spans)
        )
    frames = [crop(frame, header.height, header.width) for gop in results for frame in gop]
    logger.info("decoded %d frames", len(frames))
    return FrameSequence(frames)


def rate_records(container: BitstreamContainer) -> List[FrameRateRecord]:
    """Per-frame rate accounting from the coded records."""
    pixels = container.header.width * container.header.height
    out = []
    for index, record in enumerate(container.records):
        parts = record.substream_bits()
        out.append(
            FrameRateRecord(
                frame=index,
                type=record.frame_type.name,
                bits_g=parts.get("g", 0),
                bits_s=parts.get("s", 0),
                bits_y=parts.get("y", 0),
                bits_z=parts.get("z", 0),
                bits_intra=8 * len(record.payload),
                bpp=record.total_bits / pixels,
            )
        )
    return out


def write_rate_report(records: List[FrameRateRecord], path: Union[str, Path]) -> None:
    """Write one JSON object per frame."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(asdict(record)) + "\n")


def mean_bpp(records: List[FrameRateRecord], frame_type: Optional[str] = None) -> float:
    selected = [r.bpp for r in records if frame_type is None or r.type == frame_type]
    if not selected:
        raise ArgumentError(f"no {frame_type or ''} frames to average")
    return sum(selected) / len(selected)
