"""
Video input/output: raw YUV 4:2:0, image sequences, GOP segmentation and manifests.
"""

from ctxcodec.video.frames import FrameSequence, crop, pad_to_multiple, padded_size
from ctxcodec.video.gop import FrameRole, GopStructure, segment_gops, segment_length
from ctxcodec.video.images import load_image_sequence, save_image_sequence
from ctxcodec.video.manifest import ManifestEntry, load_manifest
from ctxcodec.video.yuv import load_yuv420, rgb_to_yuv, write_yuv420, yuv_to_rgb

__all__ = [
    "FrameSequence",
    "FrameRole",
    "GopStructure",
    "ManifestEntry",
    "crop",
    "load_image_sequence",
    "load_manifest",
    "load_yuv420",
    "pad_to_multiple",
    "padded_size",
    "rgb_to_yuv",
    "save_image_sequence",
    "segment_gops",
    "segment_length",
    "write_yuv420",
    "yuv_to_rgb",
]
