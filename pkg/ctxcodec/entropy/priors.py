"""
Prior networks of the entropy model: hyper codec, temporal prior encoder,
spatial (autoregressive) prior and the fusion network.
"""

import torch
import torch.nn as nn

from ctxcodec.entropy.laplace import EntropyParams, positive_scale
from ctxcodec.exceptions import ArgumentError
from ctxcodec.layers.blocks import conv, deconv
from ctxcodec.layers.gdn import GDN


class HyperEncoder(nn.Module):
    """Latents at /16 to hyper latents at /64 (two stride-2 stages)."""

    def __init__(self, latent_channels: int, hyper_channels: int):
        super().__init__()
        self.net = nn.Sequential(
            conv(latent_channels, hyper_channels, kernel_size=3, stride=1),
            nn.LeakyReLU(0.1),
            conv(hyper_channels, hyper_channels, stride=2),
            nn.LeakyReLU(0.1),
            conv(hyper_channels, hyper_channels, stride=2),
        )

    def forward(self, y: torch.Tensor) -> torch.Tensor:
        if y.dim() != 4 or y.shape[-2] % 4 or y.shape[-1] % 4:
            raise ArgumentError(f"hyper encoder needs [N, C, h, w] with h, w divisible by 4, got {tuple(y.shape)}")
        return self.net(y)


class HyperDecoder(nn.Module):
    """Hyper latents at /64 back to prior features on the /16 latent grid."""

    def __init__(self, hyper_channels: int, out_channels: int):
        super().__init__()
        self.net = nn.Sequential(
            deconv(hyper_channels, hyper_channels),
            nn.LeakyReLU(0.1),
            deconv(hyper_channels, hyper_channels),
            nn.LeakyReLU(0.1),
            conv(hyper_channels, out_channels, kernel_size=3, stride=1),
        )

    def forward(self, z_hat: torch.Tensor) -> torch.Tensor:
        return self.net(z_hat)


class TemporalPriorEncoder(nn.Module):
    """
    Condition at full resolution to temporal prior features at /16.

    Four stride-2 convolutions with GDN after the first three.
    """

    def __init__(self, in_channels: int, out_channels: int, hidden_channels: int = 64):
        super().__init__()
        self.net = nn.Sequential(
            conv(in_channels, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, hidden_channels),
            GDN(hidden_channels),
            conv(hidden_channels, out_channels),
        )

    def forward(self, condition: torch.Tensor) -> torch.Tensor:
        if condition.dim() != 4 or condition.shape[-2] % 16 or condition.shape[-1] % 16:
            raise ArgumentError(
                f"temporal prior needs [N, C, H, W] with H, W divisible by 16, got {tuple(condition.shape)}"
            )
        return self.net(condition)


class PriorFusion(nn.Module):
    """
    Three 1x1 convolution stages mapping concatenated priors to ``(mu, sigma)``.

    1x1 kernels keep the parameters at a position a function of the priors at
    that position only.
    """

    def __init__(self, in_channels: int, latent_channels: int):
        super().__init__()
        hidden = 2 * latent_channels
        self.latent_channels = latent_channels
        self.net = nn.Sequential(
            nn.Conv2d(in_channels, hidden, 1),
            nn.LeakyReLU(0.1),
            nn.Conv2d(hidden, hidden, 1),
            nn.LeakyReLU(0.1),
            nn.Conv2d(hidden, 2 * latent_channels, 1),
        )

    def forward(self, priors: torch.Tensor) -> EntropyParams:
        mu, raw_scale = self.net(priors).chunk(2, dim=1)
        return EntropyParams(mu=mu, sigma=positive_scale(raw_scale))


def spatial_prior_channels(latent_channels: int) -> int:
    return 2 * latent_channels
