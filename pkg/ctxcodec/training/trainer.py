"""
Progressive four-stage trainer.

Each stage trains its parameter groups with Adam and freezes the rest,
writes one JSON line per step and checkpoints at its end. Frozen groups are
snapshotted at stage start and compared at stage end. A non-finite loss
stops training with a diagnostic checkpoint.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import torch
from torch.utils.data import Dataset

from ctxcodec.bitstream.intra.toy_hyperprior import ToyHyperpriorIntra
from ctxcodec.config import CodecConfig, MotionMode
from ctxcodec.exceptions import ContractError, TrainingDivergedError
from ctxcodec.model import PARAMETER_GROUPS, VideoModel
from ctxcodec.training.checkpoint import load_checkpoint, load_groups, save_checkpoint
from ctxcodec.training.dataset import endless, make_loader
from ctxcodec.training.loss import LossBreakdown, compute_loss, distortion
from ctxcodec.training.schedule import StageSpec, TrainSchedule

logger = logging.getLogger(__name__)


@dataclass
class TrainResult:
    checkpoint: Path
    history: List[Dict[str, float]] = field(default_factory=list)


class Trainer:
    """
    Args:
        config: Codec configuration
        schedule: Stage lengths and optimizer settings
        dataset: Dataset of ``(reference, current)`` pairs
        output_dir: Where checkpoints and the step log go
        device: Torch device
        init_from: Checkpoint to start from (for example an MSE model when
            fine-tuning for MS-SSIM)
        resume: Also continue from the global step saved in ``init_from``
        intra: Optional toy intra codec saved alongside the P-frame model
    """

    def __init__(
        self,
        config: CodecConfig,
        schedule: TrainSchedule,
        dataset: Dataset,
        output_dir: Union[str, Path],
        device: str = "cpu",
        init_from: Optional[Union[str, Path]] = None,
        intra: Optional[ToyHyperpriorIntra] = None,
        resume: bool = False,
    ):
        self.config = config
        self.schedule = schedule
        self.dataset = dataset
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.device = torch.device(device)
        self.intra = intra
        torch.manual_seed(schedule.seed)
        self.model = VideoModel(config).to(self.device)
        self.global_step = 0
        if init_from is not None:
            ckpt = load_checkpoint(init_from, map_location=str(self.device))
            load_groups(self.model, ckpt)
            if resume:
                self.global_step = int(ckpt["state"]["step"])
            logger.info("initialized from %s at step %d", init_from, self.global_step)
        self.log_path = self.output_dir / "train_log.jsonl"
        self.history: List[Dict[str, float]] = []

    def _snapshot(self, groups) -> Dict[str, torch.Tensor]:
        out = {}
        for name in groups:
            for key, value in self.model.group_state(name).items():
                out[key] = value.detach().clone()
        return out

    def _verify_frozen(self, spec: StageSpec, before: Dict[str, torch.Tensor]) -> None:
        after = self._snapshot(spec.frozen)
        changed = [key for key, value in before.items() if not torch.equal(value, after[key])]
        if changed:
            raise ContractError(f"stage {spec.stage} changed frozen parameters: {changed[:5]}")

    def _diverged(self, spec: StageSpec, loss: LossBreakdown) -> None:
        path = save_checkpoint(
            self.output_dir / "diverged.pt",
            self.model,
            schedule=self.schedule,
            stage=spec.stage,
            step=self.global_step,
            intra=self.intra,
        )
        raise TrainingDivergedError(
            f"non-finite loss at stage {spec.stage}, step {self.global_step}: {loss.as_dict()}",
            snapshot_path=str(path),
        )

    def run_stage(self, spec: StageSpec, batches, log) -> Optional[LossBreakdown]:
        if spec.stage == 1 and self.config.motion_mode is MotionMode.NONE:
            logger.info("skipping stage 1: motion mode is none")
            return None
        self.model.set_trainable(spec.trainable)
        self.model.train()
        params = [p for p in self.model.parameters() if p.requires_grad]
        # a stage run on its own still sits at its place in the full schedule
        self.global_step = max(self.global_step, self.schedule.stage_start(spec.stage))
        optimizer = torch.optim.Adam(params, lr=self.schedule.lr_at(self.global_step))
        frozen = self._snapshot(spec.frozen)
        logger.info("stage %d: %d steps, training %s", spec.stage, spec.steps, ", ".join(spec.trainable))

        loss = None
        for _ in range(spec.steps):
            ref, cur = (t.to(self.device) for t in next(batches))
            lr = self.schedule.lr_at(self.global_step)
            for group in optimizer.param_groups:
                group["lr"] = lr
            out = self.model(ref, cur, motion_only=spec.stage == 1)
            loss = compute_loss(spec.stage, cur, out, self.config.lam, self.config.distortion_metric)
            if not math.isfinite(float(loss.total)):
                self._diverged(spec, loss)
            optimizer.zero_grad()
            loss.total.backward()
            optimizer.step()

            entry = {"step": self.global_step, "stage": spec.stage, "lr": lr, **loss.as_dict()}
            self.history.append(entry)
            log.write(json.dumps(entry) + "\n")
            self.global_step += 1

        self._verify_frozen(spec, frozen)
        save_checkpoint(
            self.output_dir / f"stage{spec.stage}.pt",
            self.model,
            schedule=self.schedule,
            stage=spec.stage,
            step=self.global_step,
            intra=self.intra,
        )
        return loss

    def run(self) -> TrainResult:
        loader = make_loader(self.dataset, self.schedule.batch_size, self.schedule.workers, self.schedule.seed)
        batches = endless(loader)
        with open(self.log_path, "a", encoding="utf-8") as log:
            for spec in self.schedule.stage_specs():
                self.run_stage(spec, batches, log)
        self.model.set_trainable(PARAMETER_GROUPS)
        self.model.eval()
        final = save_checkpoint(
            self.output_dir / "final.pt",
            self.model,
            schedule=self.schedule,
            stage=self.schedule.stages[-1],
            step=self.global_step,
            intra=self.intra,
        )
        return TrainResult(checkpoint=final, history=self.history)


def train_progressive(
    dataset: Dataset,
    schedule: TrainSchedule,
    config: CodecConfig,
    output_dir: Union[str, Path],
    device: str = "cpu",
    init_from: Optional[Union[str, Path]] = None,
) -> TrainResult:
    """Run the configured stages in order and return the final checkpoint path and step history."""
    return Trainer(config, schedule, dataset, output_dir, device=device, init_from=init_from).run()


def train_intra(
    intra: ToyHyperpriorIntra,
    dataset: Dataset,
    steps: int,
    lam: float = 256.0,
    lr: float = 1e-4,
    batch_size: int = 4,
    seed: int = 0,
) -> List[float]:
    """
    Train the toy intra codec on the current frames of ``dataset`` with ``lam * MSE + bpp``.

    Returns:
        Loss per step
    """
    intra.train()
    optimizer = torch.optim.Adam(intra.parameters(), lr=lr)
    batches = endless(make_loader(dataset, batch_size, seed=seed))
    history = []
    for step in range(steps):
        _, x = next(batches)
        out = intra(x)
        n, _, height, width = x.shape
        loss = lam * distortion(x, out.x_hat) + out.bits / (n * height * width)
        if not math.isfinite(float(loss)):
            raise TrainingDivergedError(f"non-finite intra loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        history.append(float(loss))
    intra.eval()
    return history
