"""
Rate-distortion loss of the four training stages.

=====  ============================  ===============================
stage  trains                        loss
=====  ============================  ===============================
1      MV generation                 lambda * D(x, x_tilde) + R_g + R_s
2      reconstruction                lambda * D(x, x_hat)
3      contextual coding             lambda * D(x, x_hat) + R_y + R_z
4      everything                    stage 3 + R_g + R_s
=====  ============================  ===============================

Rates are cross-entropies in bits per pixel.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import torch

from ctxcodec.config import DistortionMetric
from ctxcodec.exceptions import ArgumentError, ContractError
from ctxcodec.harness.metrics import ms_ssim_batch
from ctxcodec.model import ModelOutput

STAGES = (1, 2, 3, 4)
STAGE_RATES: Dict[int, Tuple[str, ...]] = {
    1: ("rate_g", "rate_s"),
    2: (),
    3: ("rate_y", "rate_z"),
    4: ("rate_y", "rate_z", "rate_g", "rate_s"),
}


@dataclass
class LossBreakdown:
    """
    Loss components of one step.

    ``total`` is ``lam * distortion`` plus the rates the stage includes; rates
    outside the stage are still reported.
    """

    stage: int
    distortion: torch.Tensor
    rate_y: torch.Tensor
    rate_z: torch.Tensor
    rate_g: torch.Tensor
    rate_s: torch.Tensor
    lam: float
    total: torch.Tensor

    @property
    def included_rates(self) -> Tuple[str, ...]:
        return STAGE_RATES[self.stage]

    def recompute_total(self) -> torch.Tensor:
        total = self.lam * self.distortion
        for name in self.included_rates:
            total = total + getattr(self, name)
        return total

    def as_dict(self) -> Dict[str, float]:
        return {
            "loss": float(self.total),
            "distortion": float(self.distortion),
            "rate_y": float(self.rate_y),
            "rate_z": float(self.rate_z),
            "rate_g": float(self.rate_g),
            "rate_s": float(self.rate_s),
        }


def distortion(x: torch.Tensor, x_hat: torch.Tensor, metric=DistortionMetric.MSE) -> torch.Tensor:
    """MSE, or ``1 - MS-SSIM`` averaged over the batch."""
    if DistortionMetric(metric) is DistortionMetric.MSE:
        return torch.mean((x - x_hat) ** 2)
    return 1.0 - ms_ssim_batch(x, x_hat).mean()


def compute_loss(
    stage: int,
    x: torch.Tensor,
    outputs: ModelOutput,
    lam: float,
    metric=DistortionMetric.MSE,
) -> LossBreakdown:
    """
    Loss of one training stage.

    Raises:
        ArgumentError: If ``stage`` is not 1..4
        ContractError: If the outputs lack the tensors the stage needs
    """
    if stage not in STAGES:
        raise ArgumentError(f"stage must be one of {STAGES}, got: {stage}")
    target = outputs.x_tilde if stage == 1 else outputs.x_hat
    if target is None:
        raise ContractError(f"stage {stage} needs {'x_tilde' if stage == 1 else 'x_hat'}")
    d = distortion(x, target, metric)
    breakdown = LossBreakdown(
        stage=stage,
        distortion=d,
        rate_y=outputs.bpp_y,
        rate_z=outputs.bpp_z,
        rate_g=outputs.bpp_g,
        rate_s=outputs.bpp_s,
        lam=float(lam),
        total=d,
    )
    breakdown.total = breakdown.recompute_total()
    return breakdown
