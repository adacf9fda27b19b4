"""
Entropy model of quantized latents.

Combines the hyper prior (always), the spatial prior and the temporal prior
(per ``EntropyMode``) into per-element Laplace parameters, and a factorized
prior for the hyper latents. The same class models the frame latents (with
a temporal prior fed by the condition) and the MV latents (hyper + spatial).
"""

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from ctxcodec.config import EntropyMode
from ctxcodec.entropy.factorized import FactorizedPrior
from ctxcodec.entropy.laplace import EntropyParams, rate_bits
from ctxcodec.entropy.priors import (
    HyperDecoder,
    HyperEncoder,
    PriorFusion,
    TemporalPriorEncoder,
    spatial_prior_channels,
)
from ctxcodec.exceptions import ArgumentError, ConfigurationError
from ctxcodec.layers.masked_conv import MaskedConv2d
from ctxcodec.layers.quantization import quantize


@dataclass
class EntropyOutput:
    """Training/evaluation outputs of :meth:`EntropyModel.forward`."""

    y_hat: torch.Tensor
    z_hat: torch.Tensor
    params: EntropyParams
    bits_y: torch.Tensor
    bits_z: torch.Tensor


class EntropyModel(nn.Module):
    """
    Hyper, spatial and temporal priors fused into Laplace parameters.

    Args:
        latent_channels: Channels of the modelled latents
        hyper_channels: Channels of the hyper latents
        mode: Which priors are used
        condition_channels: Input channels of the temporal prior encoder
            (required when the mode uses a temporal prior)
        temporal_channels: Output channels of the temporal prior
        spatial_kernel: Kernel size of the masked convolution
    """

    def __init__(
        self,
        latent_channels: int,
        hyper_channels: int,
        mode: EntropyMode = EntropyMode.HYPER_SPATIAL_TEMPORAL,
        condition_channels: Optional[int] = None,
        temporal_channels: int = 64,
        spatial_kernel: int = 5,
    ):
        super().__init__()
        self.mode = EntropyMode(mode)
        self.latent_channels = latent_channels
        self.hyper_channels = hyper_channels
        self.spatial_kernel = spatial_kernel
        hyper_features = 2 * latent_channels

        self.hyper_encoder = HyperEncoder(latent_channels, hyper_channels)
        self.hyper_decoder = HyperDecoder(hyper_channels, hyper_features)
        self.factorized = FactorizedPrior(hyper_channels)

        fusion_in = hyper_features
        self.spatial: Optional[MaskedConv2d] = None
        if self.mode.uses_spatial:
            self.spatial = MaskedConv2d(latent_channels, spatial_prior_channels(latent_channels), spatial_kernel)
            fusion_in += spatial_prior_channels(latent_channels)

        self.temporal: Optional[TemporalPriorEncoder] = None
        if self.mode.uses_temporal:
            if not condition_channels:
                raise ConfigurationError(f"entropy mode {self.mode.value} needs condition_channels")
            self.temporal = TemporalPriorEncoder(condition_channels, temporal_channels)
            fusion_in += temporal_channels

        self.fusion = PriorFusion(fusion_in, latent_channels)

    # Individual prior paths.

    def hyper_encode(self, y: torch.Tensor) -> torch.Tensor:
        if y.dim() != 4 or y.shape[1] != self.latent_channels:
            raise ArgumentError(f"expected [N, {self.latent_channels}, h, w] latents, got {tuple(y.shape)}")
        return self.hyper_encoder(y)

    def hyper_decode(self, z_hat: torch.Tensor) -> torch.Tensor:
        if z_hat.dim() != 4 or z_hat.shape[1] != self.hyper_channels:
            raise ArgumentError(f"expected [N, {self.hyper_channels}, h, w] hyper latents, got {tuple(z_hat.shape)}")
        return self.hyper_decoder(z_hat)

    def temporal_prior(self, condition: torch.Tensor) -> torch.Tensor:
        if self.temporal is None:
            raise ConfigurationError(f"entropy mode {self.mode.value} has no temporal prior")
        return self.temporal(condition)

    def spatial_prior(self, y_hat: torch.Tensor) -> torch.Tensor:
        if self.spatial is None:
            raise ConfigurationError(f"entropy mode {self.mode.value} has no spatial prior")
        if y_hat.dim() != 4 or y_hat.shape[1] != self.latent_channels:
            raise ArgumentError(f"expected [N, {self.latent_channels}, h, w] latents, got {tuple(y_hat.shape)}")
        return self.spatial(y_hat)

    def fuse(
        self,
        hyper: torch.Tensor,
        spatial: Optional[torch.Tensor] = None,
        temporal: Optional[torch.Tensor] = None,
    ) -> EntropyParams:
        """
        Fuse the priors the mode consumes; priors the mode does not use are ignored.

        Raises:
            ConfigurationError: If a prior the mode needs is missing
            ArgumentError: If the priors disagree in spatial size
        """
        parts = [hyper]
        if self.mode.uses_spatial:
            if spatial is None:
                raise ConfigurationError(f"entropy mode {self.mode.value} needs a spatial prior")
            parts.append(spatial)
        if self.mode.uses_temporal:
            if temporal is None:
                raise ConfigurationError(f"entropy mode {self.mode.value} needs a temporal prior")
            parts.append(temporal)
        size = hyper.shape[-2:]
        for part in parts[1:]:
            if part.shape[-2:] != size:
                raise ArgumentError(f"prior sizes differ: {tuple(size)} vs {tuple(part.shape[-2:])}")
        return self.fusion(torch.cat(parts, dim=1))

    # Coding-path helpers: identical computations on encoder and decoder.

    def params_parallel(self, hyper: torch.Tensor, temporal: Optional[torch.Tensor]) -> EntropyParams:
        """Parameters of every element at once (modes without a spatial prior)."""
        if self.mode.uses_spatial:
            raise ConfigurationError(f"entropy mode {self.mode.value} must be decoded sequentially")
        return self.fuse(hyper, temporal=temporal)

    def params_at(
        self,
        padded_y_hat: torch.Tensor,
        row: int,
        col: int,
        hyper: torch.Tensor,
        temporal: Optional[torch.Tensor],
    ) -> EntropyParams:
        """
        Parameters of the latents at one position, from already-decoded neighbours.

        Args:
            padded_y_hat: ``[1, C, h + 2p, w + 2p]`` buffer of decoded values
                (zeros where not yet decoded), ``p = kernel // 2``
            row, col: Position on the unpadded latent grid
            hyper, temporal: Full prior feature maps
        """
        k = self.spatial_kernel
        patch = padded_y_hat[:, :, row : row + k, col : col + k]
        spatial = self.spatial.forward_patch(patch)
        hyper_at = hyper[:, :, row : row + 1, col : col + 1]
        temporal_at = None if temporal is None else temporal[:, :, row : row + 1, col : col + 1]
        return self.fuse(hyper_at, spatial=spatial, temporal=temporal_at)

    def pad_for_context(self, y_hat: torch.Tensor) -> torch.Tensor:
        p = self.spatial_kernel // 2
        return F.pad(y_hat, (p, p, p, p))

    # Training / evaluation forward.

    def forward(self, y: torch.Tensor, condition: Optional[torch.Tensor] = None, training: bool = True) -> EntropyOutput:
        """
        Quantize ``y`` and return the rates of ``y`` and its hyper latents in bits.

        In training mode the rates use additive-noise relaxations while the
        decoder-facing ``y_hat`` is straight-through rounded. Otherwise both
        use rounding.
        """
        z = self.hyper_encode(y)
        if training:
            bits_z = self.factorized.rate_bits(quantize(z, "noise"))
        z_hat = quantize(z, "ste")
        if not training:
            bits_z = self.factorized.rate_bits(z_hat)
        hyper = self.hyper_decode(z_hat)

        y_hat = quantize(y, "ste")
        spatial = self.spatial_prior(y_hat) if self.spatial is not None else None
        temporal = self.temporal_prior(condition) if self.temporal is not None else None
        params = self.fuse(hyper, spatial=spatial, temporal=temporal)

        y_for_rate = quantize(y, "noise") if training else y_hat
        bits_y = rate_bits(y_for_rate, params)
        return EntropyOutput(y_hat=y_hat, z_hat=z_hat, params=params, bits_y=bits_y, bits_z=bits_z)


# Functional forms of the individual operations.


def hyper_encode(y: torch.Tensor, model: EntropyModel) -> torch.Tensor:
    """Hyper latents ``z_hat`` (rounded) of ``y``."""
    return quantize(model.hyper_encode(y), "round")


def hyper_decode(z_hat: torch.Tensor, model: EntropyModel) -> torch.Tensor:
    return model.hyper_decode(z_hat)


def temporal_prior_encode(condition: torch.Tensor, model: EntropyModel) -> torch.Tensor:
    return model.temporal_prior(condition)


def spatial_prior(y_hat: torch.Tensor, model: EntropyModel) -> torch.Tensor:
    return model.spatial_prior(y_hat)


def fuse_priors(
    hyper: torch.Tensor,
    spatial: Optional[torch.Tensor],
    temporal: Optional[torch.Tensor],
    model: EntropyModel,
    entropy_mode: Optional[EntropyMode] = None,
) -> EntropyParams:
    """
    Laplace parameters from the priors.

    Raises:
        ConfigurationError: If ``entropy_mode`` differs from the model's mode
            or a required prior is missing
    """
    if entropy_mode is not None and EntropyMode(entropy_mode) is not model.mode:
        raise ConfigurationError(
            f"model was built for {model.mode.value}, not {EntropyMode(entropy_mode).value}"
        )
    return model.fuse(hyper, spatial=spatial, temporal=temporal)
