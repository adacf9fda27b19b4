"""
Training job files.

A job is one JSON document::

    {"codec": {...CodecConfig...},
     "schedule": {...TrainSchedule...},
     "data": {"manifest": "clips.json"}            # or
     "data": {"synthetic": {"frames": 7, "size": [64, 64], "shift": [2, 0]}},
     "intra": {"steps": 0, "lambda": 256}}

``intra.steps > 0`` also trains the toy intra codec and saves it with the
P-frame checkpoints.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

from ctxcodec.config import CodecConfig
from ctxcodec.exceptions import ConfigurationError
from ctxcodec.training.dataset import ClipDataset
from ctxcodec.training.schedule import TrainSchedule
from ctxcodec.training.synthetic import translating_clip
from ctxcodec.video.frames import FrameSequence
from ctxcodec.video.manifest import load_manifest

JOB_KEYS = ("codec", "schedule", "data", "intra")


@dataclass
class TrainJob:
    config: CodecConfig
    schedule: TrainSchedule
    data: Dict[str, Any]
    intra: Dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")

    @property
    def intra_steps(self) -> int:
        return int(self.intra.get("steps", 0))

    @property
    def intra_lambda(self) -> float:
        return float(self.intra.get("lambda", self.config.lam))

    def clips(self) -> List[FrameSequence]:
        """
        Load the training clips.

        Raises:
            ConfigurationError: If the data section names no source
        """
        if "manifest" in self.data:
            manifest = Path(self.data["manifest"])
            if not manifest.is_absolute():
                manifest = self.base_dir / manifest
            return [entry.load() for entry in load_manifest(manifest)]
        if "synthetic" in self.data:
            options = dict(self.data["synthetic"])
            count = int(options.pop("clips", 1))
            seed = int(options.pop("seed", 0))
            size = tuple(options.pop("size", (64, 64)))
            shift = tuple(options.pop("shift", (2.0, 0.0)))
            frames = int(options.pop("frames", 7))
            if options:
                raise ConfigurationError(f"unknown synthetic data keys: {sorted(options)}")
            return [translating_clip(frames, size, shift, seed=seed + i) for i in range(count)]
        raise ConfigurationError("data section needs 'manifest' or 'synthetic'")

    def dataset(self) -> ClipDataset:
        return ClipDataset(self.clips(), crop_size=self.schedule.crop_size, flip=bool(self.data.get("flip", True)))


def parse_train_job(raw: Dict[str, Any], base_dir: Union[str, Path] = ".") -> TrainJob:
    if not isinstance(raw, dict):
        raise ConfigurationError("training config must be a JSON object")
    unknown = sorted(set(raw) - set(JOB_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown training config sections: {unknown}")
    if "data" not in raw:
        raise ConfigurationError("training config needs a 'data' section")
    return TrainJob(
        config=CodecConfig.from_dict(raw.get("codec", {})),
        schedule=TrainSchedule.from_dict(raw.get("schedule", {})),
        data=dict(raw["data"]),
        intra=dict(raw.get("intra", {})),
        base_dir=Path(base_dir),
    )


def load_train_job(path: Union[str, Path]) -> TrainJob:
    """
    Read a job file; relative data paths resolve against its directory.

    Raises:
        ConfigurationError: If the file is unreadable or invalid
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read training config {path}: {e}") from e
    return parse_train_job(raw, path.parent)
