"""
Rate-distortion training: loss, schedule, data, checkpoints and the progressive trainer.
"""

from ctxcodec.training.checkpoint import (
    load_checkpoint,
    model_from_checkpoint,
    save_checkpoint,
)
from ctxcodec.training.dataset import ClipDataset
from ctxcodec.training.job import TrainJob, load_train_job, parse_train_job
from ctxcodec.training.loss import LossBreakdown, compute_loss
from ctxcodec.training.schedule import StageSpec, TrainSchedule
from ctxcodec.training.synthetic import static_clip, translating_clip
from ctxcodec.training.trainer import TrainResult, Trainer, train_intra, train_progressive

__all__ = [
    "ClipDataset",
    "LossBreakdown",
    "StageSpec",
    "TrainJob",
    "TrainResult",
    "TrainSchedule",
    "Trainer",
    "compute_loss",
    "load_checkpoint",
    "load_train_job",
    "model_from_checkpoint",
    "parse_train_job",
    "save_checkpoint",
    "static_clip",
    "train_intra",
    "train_progressive",
    "translating_clip",
]
