"""
Single-file versioned checkpoints.

Layout::

    {"format": "ctxcodec-checkpoint", "version": 1,
     "config": CodecConfig.to_dict(), "schedule": TrainSchedule.to_dict() | None,
     "state": {"stage": int, "step": int},
     "groups": {group: state_dict}, "intra": state_dict | None}
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import torch

from ctxcodec.bitstream.intra.toy_hyperprior import ToyHyperpriorIntra
from ctxcodec.config import CodecConfig
from ctxcodec.exceptions import ConfigurationError
from ctxcodec.model import PARAMETER_GROUPS, VideoModel
from ctxcodec.training.schedule import TrainSchedule

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "ctxcodec-checkpoint"
CHECKPOINT_VERSION = 1


def make_checkpoint(
    model: VideoModel,
    schedule: Optional[TrainSchedule] = None,
    stage: int = 0,
    step: int = 0,
    intra: Optional[ToyHyperpriorIntra] = None,
) -> Dict[str, Any]:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "schedule": schedule.to_dict() if schedule is not None else None,
        "state": {"stage": stage, "step": step},
        "groups": {name: {k: v.detach().cpu().clone() for k, v in model.group_state(name).items()} for name in PARAMETER_GROUPS},
        "intra": {k: v.detach().cpu().clone() for k, v in intra.state_dict().items()} if intra is not None else None,
    }


def save_checkpoint(path: Union[str, Path], model: VideoModel, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(make_checkpoint(model, **kwargs), path)
    logger.info("saved checkpoint %s", path)
    return path


def load_checkpoint(path: Union[str, Path], map_location: str = "cpu") -> Dict[str, Any]:
    """
    Read and validate a checkpoint.

    Raises:
        FileNotFoundError: If the file is missing
        ConfigurationError: If the format or version is unknown
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    try:
        ckpt = torch.load(path, map_location=map_location, weights_only=True)
    except Exception as e:
        raise ConfigurationError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(ckpt, dict) or ckpt.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError(f"{path} is not a ctxcodec checkpoint")
    if ckpt.get("version") != CHECKPOINT_VERSION:
        raise ConfigurationError(f"unsupported checkpoint version {ckpt.get('version')}")
    missing = [key for key in ("config", "state", "groups") if key not in ckpt]
    if missing:
        raise ConfigurationError(f"checkpoint lacks {missing}")
    return ckpt


def load_groups(model: VideoModel, ckpt: Dict[str, Any], groups=PARAMETER_GROUPS) -> None:
    """Load the named parameter groups of ``ckpt`` into ``model``."""
    state = {}
    for name in groups:
        if name not in ckpt["groups"]:
            raise ConfigurationError(f"checkpoint has no parameter group {name!r}")
        state.update(ckpt["groups"][name])
    own = model.state_dict()
    for key, value in state.items():
        if key not in own or tuple(own[key].shape) != tuple(value.shape):
            raise ConfigurationError(f"checkpoint tensor {key!r} does not fit the model")
    own.update(state)
    model.load_state_dict(own)


def model_from_checkpoint(ckpt: Dict[str, Any]) -> VideoModel:
    model = VideoModel(CodecConfig.from_dict(ckpt["config"]))
    load_groups(model, ckpt)
    model.eval()
    return model


def intra_from_checkpoint(ckpt: Dict[str, Any]) -> Optional[ToyHyperpriorIntra]:
    if ckpt.get("intra") is None:
        return None
    intra = ToyHyperpriorIntra()
    intra.load_state_dict(ckpt["intra"])
    intra.eval()
    return intra
