"""
Coarse-to-fine pyramid optical flow.

Each pyramid level runs a small 5-layer convolution stack on
``[current, warp(reference, upsampled_flow), upsampled_flow]`` and predicts a
residual flow, in the style of spatial-pyramid flow networks. The coarsest
level starts from zero flow. Pretrained weights are optional; the network
trains from scratch at desk scale.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Union

import torch
import torch.nn as nn
import torch.nn.functional as F

from ctxcodec.exceptions import ArgumentError, ConfigurationError
from ctxcodec.motion.warp import warp_bilinear

logger = logging.getLogger(__name__)


class FlowLevel(nn.Module):
    """Residual flow estimator for one pyramid level."""

    def __init__(self, widths=(32, 64, 32, 16), kernel_size: int = 7):
        super().__init__()
        layers = []
        in_channels = 8
        for width in widths:
            layers += [nn.Conv2d(in_channels, width, kernel_size, padding=kernel_size // 2), nn.ReLU()]
            in_channels = width
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv2d(in_channels, 2, kernel_size, padding=kernel_size // 2)
        # Start from zero residual flow.
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, current: torch.Tensor, warped_ref: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
        return self.head(self.body(torch.cat([current - 0.5, warped_ref - 0.5, flow], dim=1)))


class PyramidFlowNet(nn.Module):
    """
    L-level coarse-to-fine flow estimator.

    Args:
        levels: Number of pyramid levels (inputs must be divisible by 2**levels)
    """

    def __init__(self, levels: int = 4):
        super().__init__()
        if levels < 1:
            raise ConfigurationError(f"flow levels must be >= 1, got: {levels}")
        self.levels = levels
        self.stages = nn.ModuleList(FlowLevel() for _ in range(levels))

    def check_inputs(self, ref: torch.Tensor, cur: torch.Tensor) -> None:
        if ref.shape != cur.shape:
            raise ArgumentError(f"reference {tuple(ref.shape)} and current {tuple(cur.shape)} differ")
        if ref.dim() != 4 or ref.shape[1] != 3:
            raise ArgumentError(f"flow inputs must be [N, 3, H, W], got {tuple(ref.shape)}")
        step = 2**self.levels
        height, width = ref.shape[-2:]
        if height % step or width % step:
            raise ArgumentError(
                f"{width}x{height} is not divisible by {step} for a {self.levels}-level pyramid"
            )

    def forward(self, ref: torch.Tensor, cur: torch.Tensor) -> torch.Tensor:
        self.check_inputs(ref, cur)
        refs, curs = [ref], [cur]
        for _ in range(self.levels - 1):
            refs.insert(0, F.avg_pool2d(refs[0], 2))
            curs.insert(0, F.avg_pool2d(curs[0], 2))

        flow = torch.zeros_like(refs[0][:, :2])
        for index, stage in enumerate(self.stages):
            if index > 0:
                flow = 2.0 * F.interpolate(flow, scale_factor=2, mode="bilinear", align_corners=False)
            warped = warp_bilinear(refs[index], flow)
            flow = flow + stage(curs[index], warped, flow)
        return flow

    def load_external(self, state: Dict[str, torch.Tensor], manifest: Union[str, Path, Dict[str, str]]) -> int:
        """
        Import pretrained weights through a tensor-name manifest.

        Args:
            state: External state dict
            manifest: Mapping (or JSON file path) from external tensor names to local names

        Returns:
            Number of tensors imported

        Raises:
            ConfigurationError: If a name or shape does not match
        """
        if not isinstance(manifest, dict):
            manifest = json.loads(Path(manifest).read_text())
        own = self.state_dict()
        updates = {}
        for external, local in manifest.items():
            if external not in state:
                raise ConfigurationError(f"external flow weights have no tensor {external!r}")
            if local not in own:
                raise ConfigurationError(f"flow network has no tensor {local!r}")
            if tuple(state[external].shape) != tuple(own[local].shape):
                raise ConfigurationError(
                    f"shape mismatch for {external!r} -> {local!r}: "
                    f"{tuple(state[external].shape)} vs {tuple(own[local].shape)}"
                )
            updates[local] = state[external]
        own.update(updates)
        self.load_state_dict(own)
        logger.info("imported %d pretrained flow tensor(s)", len(updates))
        return len(updates)


def estimate_flow(ref: torch.Tensor, cur: torch.Tensor, net: PyramidFlowNet) -> torch.Tensor:
    """
    Estimate the backward flow from ``cur`` to ``ref``.

    Args:
        ref: Reference frame(s), ``[3, H, W]`` or ``[N, 3, H, W]``
        cur: Current frame(s), same shape as ``ref``
        net: Flow network (weights)

    Returns:
        Motion field ``[2, H, W]`` (or ``[N, 2, H, W]``) such that
        ``warp(ref, flow)`` approximates ``cur``
    """
    if ref.shape != cur.shape:
        raise ArgumentError(f"reference {tuple(ref.shape)} and current {tuple(cur.shape)} differ")
    squeeze = ref.dim() == 3
    if squeeze:
        ref, cur = ref.unsqueeze(0), cur.unsqueeze(0)
    flow = net(ref, cur)
    return flow.squeeze(0) if squeeze else flow
