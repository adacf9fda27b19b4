"""
All networks of one contextual P-frame model.

``VideoModel`` owns the flow estimator, the MV codec, the context generator,
the contextual encoder/decoder and the frame-latent entropy model, and
groups their parameters for staged training.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

import torch
import torch.nn as nn

from ctxcodec.config import CodecConfig, MotionMode
from ctxcodec.context import ContextGenerator, pixel_warp
from ctxcodec.contextual import ContextualDecoder, ContextualEncoder
from ctxcodec.entropy.model import EntropyModel
from ctxcodec.exceptions import ArgumentError, ConfigurationError
from ctxcodec.motion.flow import PyramidFlowNet
from ctxcodec.motion.mv_codec import MvCodec

logger = logging.getLogger(__name__)

PARAMETER_GROUPS = ("mv", "context", "contextual", "entropy")


@dataclass
class ModelOutput:
    """
    Outputs of one training/evaluation step.

    Rates are in bits per pixel of the (padded) input. ``x_hat`` is None when
    only the motion part was run.
    """

    x_tilde: torch.Tensor
    x_hat: Optional[torch.Tensor]
    bpp_y: torch.Tensor
    bpp_z: torch.Tensor
    bpp_g: torch.Tensor
    bpp_s: torch.Tensor

    @property
    def bpp(self) -> torch.Tensor:
        return self.bpp_y + self.bpp_z + self.bpp_g + self.bpp_s


class VideoModel(nn.Module):
    """
    Contextual P-frame model for one configuration.

    Args:
        config: Codec configuration (modes, widths, lambda)
    """

    def __init__(self, config: CodecConfig):
        super().__init__()
        self.config = config
        self.flow_net = PyramidFlowNet(config.flow_levels)
        self.mv_codec = MvCodec(config.mv_channels)
        self.context = ContextGenerator(config)
        self.encoder = ContextualEncoder(config)
        self.decoder = ContextualDecoder(config)
        self.entropy = EntropyModel(
            config.latent_channels,
            config.hyper_channels,
            config.entropy_mode,
            condition_channels=config.condition_channels,
            temporal_channels=config.temporal_channels,
            spatial_kernel=config.spatial_kernel,
        )

    @property
    def uses_motion(self) -> bool:
        return self.config.motion_mode is MotionMode.MEMC

    def group_modules(self, name: str) -> List[nn.Module]:
        groups = {
            "mv": [self.flow_net, self.mv_codec],
            "context": [self.context],
            "contextual": [self.encoder, self.decoder],
            "entropy": [self.entropy],
        }
        if name not in groups:
            raise ConfigurationError(f"unknown parameter group {name!r}, expected one of {PARAMETER_GROUPS}")
        return groups[name]

    def group_parameters(self, name: str) -> Iterator[nn.Parameter]:
        for module in self.group_modules(name):
            yield from module.parameters()

    def group_state(self, name: str) -> Dict[str, torch.Tensor]:
        state = {}
        for module in self.group_modules(name):
            prefix = next(attr for attr, child in self.named_children() if child is module)
            for key, value in module.state_dict().items():
                state[f"{prefix}.{key}"] = value
        return state

    def set_trainable(self, groups) -> None:
        """Enable gradients for ``groups`` and freeze every other group."""
        groups = set(groups)
        for name in PARAMETER_GROUPS:
            for param in self.group_parameters(name):
                param.requires_grad_(name in groups)

    def forward(self, ref: torch.Tensor, cur: torch.Tensor, motion_only: bool = False) -> ModelOutput:
        """
        Run the model on a batch of ``(reference, current)`` frames.

        Args:
            ref: ``[N, 3, H, W]`` reference frames, H and W multiples of 64
            cur: ``[N, 3, H, W]`` current frames
            motion_only: Stop after the MV codec (first training stage)
        """
        if ref.shape != cur.shape or ref.dim() != 4:
            raise ArgumentError(f"reference {tuple(ref.shape)} and current {tuple(cur.shape)} must match")
        n, _, height, width = cur.shape
        pixels = float(n * height * width)
        zero = cur.new_zeros(())

        m_hat = None
        bpp_g = bpp_s = zero
        x_tilde = ref
        if self.uses_motion:
            flow = self.flow_net(ref, cur)
            mv = self.mv_codec(flow, training=self.training)
            m_hat = mv.m_hat
            bpp_g = mv.bits_g.sum() / pixels
            bpp_s = mv.bits_s.sum() / pixels
            x_tilde = pixel_warp(ref, m_hat)
        if motion_only:
            return ModelOutput(x_tilde, None, zero, zero, bpp_g, bpp_s)

        condition = self.context(ref, m_hat)
        y = self.encoder(cur, condition)
        coded = self.entropy(y, condition, training=self.training)
        x_hat = self.decoder(coded.y_hat, condition)
        return ModelOutput(
            x_tilde=x_tilde,
            x_hat=x_hat,
            bpp_y=coded.bits_y.sum() / pixels,
            bpp_z=coded.bits_z.sum() / pixels,
            bpp_g=bpp_g,
            bpp_s=bpp_s,
        )
