"""
Entropy coding of quantized latents into substreams.

A substream is ``u16 r`` (big-endian) followed by range-coder bytes. Latents
are visited position by position in raster order with the channels of a
position together. With a spatial prior, the parameters at a position come
from a buffer of already-coded values; encoder and decoder fill that buffer
through the same calls, so they see bit-identical tables. Without a spatial
prior every table is known up front and any agreed element order decodes to
the same tensor.
"""

import logging
import struct
from typing import Optional, Tuple

import numpy as np
import torch

from ctxcodec.bitstream.cdf import build_cdf
from ctxcodec.bitstream.range_coder import RangeDecoder, RangeEncoder, range_decode, range_encode
from ctxcodec.entropy.factorized import FactorizedPrior, factorized_mass
from ctxcodec.entropy.laplace import (
    EntropyParams,
    laplace_centers,
    laplace_table,
    required_range,
)
from ctxcodec.entropy.model import EntropyModel
from ctxcodec.exceptions import ArgumentError, ConfigurationError, ContractError, CorruptionError
from ctxcodec.layers.quantization import is_integral

logger = logging.getLogger(__name__)

RANGE_PREFIX = struct.Struct(">H")
MAX_SYMBOL_RANGE = (1 << 16) - 1


def _pack(r: int, payload: bytes) -> bytes:
    if r > MAX_SYMBOL_RANGE:
        raise ArgumentError(f"symbol range {r} does not fit the u16 substream prefix")
    return RANGE_PREFIX.pack(r) + payload


def _unpack(data: bytes) -> Tuple[int, bytes]:
    if len(data) < RANGE_PREFIX.size:
        raise CorruptionError("substream shorter than its range prefix")
    (r,) = RANGE_PREFIX.unpack_from(data)
    if r < 1:
        raise CorruptionError(f"invalid symbol range {r}")
    return r, data[RANGE_PREFIX.size :]


def _check_latents(y_hat: torch.Tensor, channels: int) -> None:
    if y_hat.dim() != 4 or y_hat.shape[0] != 1 or y_hat.shape[1] != channels:
        raise ArgumentError(f"expected [1, {channels}, h, w] latents, got {tuple(y_hat.shape)}")
    if not is_integral(y_hat):
        raise ContractError("only quantized latents can be entropy coded")


def position_major(t: torch.Tensor) -> torch.Tensor:
    """``[1, C, h, w]`` to a flat vector in position-major, channel-minor order."""
    return t[0].permute(1, 2, 0).reshape(-1)


def from_position_major(flat: torch.Tensor, shape) -> torch.Tensor:
    _, c, h, w = shape
    return flat.reshape(h, w, c).permute(2, 0, 1).unsqueeze(0).contiguous()


def _check_order(order: Optional[np.ndarray], size: int) -> Optional[np.ndarray]:
    if order is None:
        return None
    order = np.asarray(order, dtype=np.int64).reshape(-1)
    if order.size != size or not np.array_equal(np.sort(order), np.arange(size)):
        raise ArgumentError("element order must be a permutation of all latent elements")
    return order


# Sequential (spatial prior) path.


@torch.no_grad()
def _sequential_params(
    y_hat: torch.Tensor, hyper: torch.Tensor, temporal: Optional[torch.Tensor], model: EntropyModel
):
    """Per-position parameters, filling the context buffer exactly as the decoder will."""
    _, _, h, w = y_hat.shape
    buffer = model.pad_for_context(torch.zeros_like(y_hat))
    p = model.spatial_kernel // 2
    params = []
    for row in range(h):
        for col in range(w):
            params.append(model.params_at(buffer, row, col, hyper, temporal).flatten())
            buffer[:, :, row + p, col + p] = y_hat[:, :, row, col]
    return params


@torch.no_grad()
def _encode_sequential(y_hat, hyper, temporal, model) -> bytes:
    params = _sequential_params(y_hat, hyper, temporal, model)
    mu = torch.cat([prm.mu for prm in params])
    sigma = torch.cat([prm.sigma for prm in params])
    flat = position_major(y_hat)
    r = required_range(flat, laplace_centers(EntropyParams(mu, sigma)))
    encoder = RangeEncoder()
    for index, prm in enumerate(params):
        table = build_cdf(laplace_table(prm, r))
        symbols = flat[index * prm.mu.numel() : (index + 1) * prm.mu.numel()]
        columns = table.columns_of(symbols.to(torch.int64).numpy())
        for row, column in enumerate(columns.tolist()):
            start = int(table.cdf[row, column])
            encoder.encode(start, int(table.cdf[row, column + 1]) - start)
    return _pack(r, encoder.finish())


@torch.no_grad()
def _decode_sequential(data: bytes, shape, hyper, temporal, model) -> torch.Tensor:
    r, payload = _unpack(data)
    _, c, h, w = shape
    y_hat = torch.zeros(shape, dtype=hyper.dtype, device=hyper.device)
    buffer = model.pad_for_context(y_hat.clone())
    p = model.spatial_kernel // 2
    decoder = RangeDecoder(payload)
    for row in range(h):
        for col in range(w):
            prm = model.params_at(buffer, row, col, hyper, temporal).flatten()
            table = build_cdf(laplace_table(prm, r))
            values = [decoder.decode(table.cdf[k]) + int(table.offsets[k]) for k in range(c)]
            decoded = torch.tensor(values, dtype=y_hat.dtype, device=y_hat.device)
            y_hat[0, :, row, col] = decoded
            buffer[0, :, row + p, col + p] = decoded
    return y_hat


# Parallel (no spatial prior) path.


def _parallel_tables(params: EntropyParams, order: Optional[np.ndarray]) -> EntropyParams:
    mu = position_major(params.mu)
    sigma = position_major(params.sigma)
    if order is not None:
        index = torch.from_numpy(order)
        mu, sigma = mu[index], sigma[index]
    return EntropyParams(mu, sigma)


@torch.no_grad()
def _encode_parallel(y_hat, hyper, temporal, model, order) -> bytes:
    flat = position_major(y_hat)
    order = _check_order(order, flat.numel())
    params = _parallel_tables(model.params_parallel(hyper, temporal), order)
    if order is not None:
        flat = flat[torch.from_numpy(order)]
    r = required_range(flat, laplace_centers(params))
    table = build_cdf(laplace_table(params, r))
    return _pack(r, range_encode(flat.to(torch.int64).numpy(), table))


@torch.no_grad()
def _decode_parallel(data: bytes, shape, hyper, temporal, model, order) -> torch.Tensor:
    r, payload = _unpack(data)
    size = int(np.prod(shape))
    order = _check_order(order, size)
    params = _parallel_tables(model.params_parallel(hyper, temporal), order)
    table = build_cdf(laplace_table(params, r))
    values = torch.from_numpy(range_decode(payload, table)).to(hyper.dtype)
    flat = torch.empty(size, dtype=hyper.dtype)
    if order is None:
        flat = values
    else:
        flat[torch.from_numpy(order)] = values
    return from_position_major(flat, shape).to(hyper.device)


# Public entry points.


def encode_latents(
    y_hat: torch.Tensor,
    hyper: torch.Tensor,
    temporal: Optional[torch.Tensor],
    model: EntropyModel,
    order: Optional[np.ndarray] = None,
) -> bytes:
    """
    Entropy code integer latents with the Laplace model.

    Args:
        y_hat: ``[1, C, h, w]`` integer-valued latents
        hyper: Decoded hyper-prior features on the latent grid
        temporal: Temporal prior features (None when the mode has none)
        model: Entropy model
        order: Optional element permutation (modes without a spatial prior only)

    Raises:
        ConfigurationError: If ``order`` is given for a spatial-prior mode
    """
    _check_latents(y_hat, model.latent_channels)
    if model.mode.uses_spatial:
        if order is not None and not np.array_equal(np.asarray(order), np.arange(y_hat.numel())):
            raise ConfigurationError(f"entropy mode {model.mode.value} only supports raster order")
        return _encode_sequential(y_hat, hyper, temporal, model)
    return _encode_parallel(y_hat, hyper, temporal, model, order)


def decode_latents(
    data: bytes,
    shape: Tuple[int, int, int, int],
    hyper: torch.Tensor,
    temporal: Optional[torch.Tensor],
    model: EntropyModel,
    order: Optional[np.ndarray] = None,
) -> torch.Tensor:
    """Inverse of :func:`encode_latents`; ``shape`` is ``(1, C, h, w)``."""
    if model.mode.uses_spatial:
        size = int(np.prod(shape))
        if order is not None and not np.array_equal(np.asarray(order), np.arange(size)):
            raise ConfigurationError(f"entropy mode {model.mode.value} only supports raster order")
        return _decode_sequential(data, shape, hyper, temporal, model)
    return _decode_parallel(data, shape, hyper, temporal, model, order)


@torch.no_grad()
def encode_hyper(z_hat: torch.Tensor, prior: FactorizedPrior) -> bytes:
    """Entropy code integer hyper latents with the factorized prior (``N, C, h, w`` order)."""
    if not is_integral(z_hat):
        raise ContractError("only quantized hyper latents can be entropy coded")
    table = factorized_mass(z_hat, prior)
    cdf = build_cdf(table)
    return _pack(table.r, range_encode(z_hat.reshape(-1).to(torch.int64).cpu().numpy(), cdf))


@torch.no_grad()
def decode_hyper(data: bytes, shape, prior: FactorizedPrior, device="cpu") -> torch.Tensor:
    r, payload = _unpack(data)
    placeholder = torch.zeros(shape)
    cdf = build_cdf(factorized_mass(placeholder, prior, r=r))
    values = range_decode(payload, cdf)
    return torch.from_numpy(values).to(torch.float32).reshape(shape).to(device)
