"""
ctxcodec - Conditional Neural Video Codec

P-frames are coded conditioned on a learned feature-domain context built by
motion-compensating features of the previous reconstruction. Latents are
range coded under a Laplace model fused from hyper, spatial and temporal
priors, and frames are stored in a versioned container.

Example:
    >>> from ctxcodec import ContextualVideoCodec
    >>> codec = ContextualVideoCodec.from_checkpoint("final.pt")
    >>> codec.encode_file("clip/", "clip.dcv")
    >>> frames = codec.decode_file("clip.dcv", "decoded/")
"""

from ctxcodec.codec import ContextualVideoCodec
from ctxcodec.config import CodecConfig, ConditionMode, EntropyMode, MotionMode
from ctxcodec.exceptions import CtxCodecError
from ctxcodec.model import VideoModel

__version__ = "0.1.0"
__all__ = [
    "CodecConfig",
    "ConditionMode",
    "ContextualVideoCodec",
    "CtxCodecError",
    "EntropyMode",
    "MotionMode",
    "VideoModel",
]
