"""
Contextual encoder and decoder of the current frame.

The encoder sees the frame together with the condition and produces 96
latent channels at /16; the decoder upsamples the quantized latents back to
full resolution and fuses them with the condition. The condition mode picks
how the condition enters:

* ``context_feature``: encoder input ``[x, ctx]``, decoder fuses with ``ctx``
* ``rgb_prediction``: encoder input ``[x, pred]``, decoder fuses with ``pred``
* ``residue``: encoder input ``x - pred``, decoder output ``pred + residue``

where ``pred`` is the first three channels of the condition.
"""

from dataclasses import dataclass
from typing import Union

import torch
import torch.nn as nn

from ctxcodec.config import CodecConfig, ConditionMode
from ctxcodec.exceptions import ArgumentError, ContractError
from ctxcodec.layers.blocks import ResBlock, conv, deconv
from ctxcodec.layers.gdn import GDN
from ctxcodec.layers.quantization import is_integral
from ctxcodec.video.frames import PAD_MULTIPLE


@dataclass
class LatentTensor:
    """Frame latents ``[N, 96, H/16, W/16]`` with a flag telling whether they are rounded."""

    y: torch.Tensor
    quantized: bool = False

    def __post_init__(self):
        if self.quantized and not is_integral(self.y):
            raise ContractError("latents flagged as quantized hold non-integer values")


def encoder_in_channels(config: CodecConfig) -> int:
    if config.condition_mode is ConditionMode.CONTEXT_FEATURE:
        return 3 + config.context_dim
    if config.condition_mode is ConditionMode.RGB_PREDICTION:
        return 6
    return 3


def prediction_of(condition: torch.Tensor) -> torch.Tensor:
    return condition[:, :3]


class ContextualEncoder(nn.Module):
    """Four stride-2 stages with GDN and one residual block each."""

    def __init__(self, config: CodecConfig):
        super().__init__()
        self.config = config
        hidden = config.hidden_channels
        layers = []
        in_channels = encoder_in_channels(config)
        for _ in range(3):
            layers += [conv(in_channels, hidden), GDN(hidden), ResBlock(hidden)]
            in_channels = hidden
        layers.append(conv(hidden, config.latent_channels))
        self.net = nn.Sequential(*layers)

    def encoder_input(self, x: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        mode = self.config.condition_mode
        if mode is ConditionMode.CONTEXT_FEATURE:
            return torch.cat([x, condition], dim=1)
        if mode is ConditionMode.RGB_PREDICTION:
            return torch.cat([x, prediction_of(condition)], dim=1)
        return x - prediction_of(condition)

    def forward(self, x: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        return self.net(self.encoder_input(x, condition))


class ContextualDecoder(nn.Module):
    """Mirrored IGDN synthesis followed by fusion with the condition."""

    def __init__(self, config: CodecConfig):
        super().__init__()
        self.config = config
        hidden = config.hidden_channels
        layers = []
        in_channels = config.latent_channels
        for _ in range(3):
            layers += [deconv(in_channels, hidden), GDN(hidden, inverse=True), ResBlock(hidden)]
            in_channels = hidden
        layers.append(deconv(hidden, hidden))
        self.synthesis = nn.Sequential(*layers)

        mode = config.condition_mode
        fused = hidden
        if mode is ConditionMode.CONTEXT_FEATURE:
            fused += config.context_dim
        elif mode is ConditionMode.RGB_PREDICTION:
            fused += 3
        self.fusion = nn.Sequential(
            nn.Conv2d(fused, hidden, 3, padding=1),
            ResBlock(hidden),
            nn.Conv2d(hidden, 3, 3, padding=1),
        )

    def forward(self, y_hat: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        features = self.synthesis(y_hat)
        mode = self.config.condition_mode
        if mode is ConditionMode.CONTEXT_FEATURE:
            out = self.fusion(torch.cat([features, condition], dim=1))
        elif mode is ConditionMode.RGB_PREDICTION:
            out = self.fusion(torch.cat([features, prediction_of(condition)], dim=1))
        else:
            out = prediction_of(condition) + self.fusion(features)
        return out.clamp(0.0, 1.0)


def _check_inputs(x: torch.Tensor, condition: torch.Tensor, config: CodecConfig) -> None:
    if x.dim() != 4 or x.shape[1] != 3:
        raise ArgumentError(f"frame must be [N, 3, H, W], got {tuple(x.shape)}")
    height, width = x.shape[-2:]
    if height % PAD_MULTIPLE or width % PAD_MULTIPLE:
        raise ArgumentError(f"frame {width}x{height} is not padded to a multiple of {PAD_MULTIPLE}")
    if condition.dim() != 4 or condition.shape[0] != x.shape[0] or condition.shape[-2:] != x.shape[-2:]:
        raise ArgumentError(f"condition {tuple(condition.shape)} does not match frame {tuple(x.shape)}")
    if condition.shape[1] != config.condition_channels:
        raise ArgumentError(
            f"condition has {condition.shape[1]} channels, config expects {config.condition_channels}"
        )


def _as_batch(t: torch.Tensor):
    return (t.unsqueeze(0), True) if t.dim() == 3 else (t, False)


def contextual_encode(x: torch.Tensor, ctx: torch.Tensor, encoder: ContextualEncoder) -> LatentTensor:
    """
    Unquantized latents of ``x`` given the condition ``ctx``.

    Args:
        x: Padded frame ``[3, H, W]`` or batch ``[N, 3, H, W]``
        ctx: Condition with matching spatial size
        encoder: Encoder weights (carrying the codec configuration)

    Returns:
        ``LatentTensor`` with ``y`` of shape ``[.., 96, H/16, W/16]``
    """
    xb, squeeze = _as_batch(x)
    cb, _ = _as_batch(ctx)
    _check_inputs(xb, cb, encoder.config)
    y = encoder(xb, cb)
    return LatentTensor(y.squeeze(0) if squeeze else y, quantized=False)


def contextual_decode(
    y_hat: Union[LatentTensor, torch.Tensor], ctx: torch.Tensor, decoder: ContextualDecoder
) -> torch.Tensor:
    """
    Reconstruct the frame from quantized latents and the condition.

    Raises:
        ContractError: If the latents are not quantized
        ArgumentError: If the latent and condition shapes disagree
    """
    if isinstance(y_hat, LatentTensor):
        if not y_hat.quantized:
            raise ContractError("contextual_decode needs quantized latents")
        y_hat = y_hat.y
    elif not is_integral(y_hat):
        raise ContractError("contextual_decode needs integer-valued latents")
    yb, squeeze = _as_batch(y_hat)
    cb, _ = _as_batch(ctx)
    config = decoder.config
    if yb.shape[1] != config.latent_channels:
        raise ArgumentError(f"expected {config.latent_channels} latent channels, got {yb.shape[1]}")
    if cb.shape[-2] != 16 * yb.shape[-2] or cb.shape[-1] != 16 * yb.shape[-1]:
        raise ArgumentError(f"condition {tuple(cb.shape)} does not match latents {tuple(yb.shape)}")
    if cb.shape[1] != config.condition_channels:
        raise ArgumentError(
            f"condition has {cb.shape[1]} channels, config expects {config.condition_channels}"
        )
    out = decoder(yb, cb)
    return out.squeeze(0) if squeeze else out
