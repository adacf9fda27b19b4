"""
Neural-network layers shared across the codec.
"""

from ctxcodec.layers.blocks import ResBlock, conv, deconv, zero_module
from ctxcodec.layers.gdn import GDN, gdn
from ctxcodec.layers.masked_conv import MaskedConv2d, raster_mask
from ctxcodec.layers.quantization import QuantMode, is_integral, quantize, round_half_away

__all__ = [
    "GDN",
    "MaskedConv2d",
    "QuantMode",
    "ResBlock",
    "conv",
    "deconv",
    "gdn",
    "is_integral",
    "quantize",
    "raster_mask",
    "round_half_away",
    "zero_module",
]
