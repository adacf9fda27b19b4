"""
Motion estimation, warping and MV compression.
"""

from ctxcodec.motion.flow import FlowLevel, PyramidFlowNet, estimate_flow
from ctxcodec.motion.mv_codec import MvCodec, MvCodecOutput, MvLatentBlock, mv_decode, mv_encode
from ctxcodec.motion.warp import warp_bilinear

__all__ = [
    "FlowLevel",
    "MvCodec",
    "MvCodecOutput",
    "MvLatentBlock",
    "PyramidFlowNet",
    "estimate_flow",
    "mv_decode",
    "mv_encode",
    "warp_bilinear",
]
