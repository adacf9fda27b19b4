"""
Progressive training schedule.
"""

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Tuple

from ctxcodec.exceptions import ConfigurationError
from ctxcodec.model import PARAMETER_GROUPS

# Groups each stage trains; every other group is frozen.
STAGE_GROUPS = {
    1: ("mv",),
    2: ("context", "contextual"),
    3: ("context", "contextual", "entropy"),
    4: PARAMETER_GROUPS,
}


@dataclass(frozen=True)
class StageSpec:
    stage: int
    steps: int
    trainable: Tuple[str, ...]

    @property
    def frozen(self) -> Tuple[str, ...]:
        return tuple(g for g in PARAMETER_GROUPS if g not in self.trainable)


@dataclass
class TrainSchedule:
    """
    Attributes:
        stage_steps: Optimizer steps of stages 1-4
        lr: Learning rate
        fine_tune_lr: Learning rate from ``lr_drop_step`` on
        lr_drop_step: Global step at which the rate drops
        batch_size: Clips per batch
        crop_size: Square crop side (multiple of 64)
        workers: DataLoader workers
        seed: RNG seed
    """

    stage_steps: Tuple[int, int, int, int] = (200, 200, 400, 1200)
    lr: float = 1e-4
    fine_tune_lr: float = 1e-5
    lr_drop_step: int = 1600
    batch_size: int = 4
    crop_size: int = 256
    workers: int = 0
    seed: int = 0
    stages: List[int] = field(default_factory=lambda: [1, 2, 3, 4])

    def __post_init__(self):
        self.stage_steps = tuple(int(s) for s in self.stage_steps)
        if len(self.stage_steps) != 4 or any(s < 0 for s in self.stage_steps):
            raise ConfigurationError(f"stage_steps must be four counts >= 0, got: {self.stage_steps}")
        if not (self.lr > 0 and self.fine_tune_lr > 0):
            raise ConfigurationError("learning rates must be positive")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got: {self.batch_size}")
        if self.crop_size < 64 or self.crop_size % 64:
            raise ConfigurationError(f"crop_size must be a positive multiple of 64, got: {self.crop_size}")
        if sorted(set(self.stages)) != sorted(self.stages) or not set(self.stages) <= {1, 2, 3, 4}:
            raise ConfigurationError(f"stages must be distinct values in 1..4, got: {self.stages}")
        self.stages = sorted(self.stages)

    def stage_specs(self) -> List[StageSpec]:
        return [StageSpec(s, self.stage_steps[s - 1], STAGE_GROUPS[s]) for s in self.stages]

    def stage_start(self, stage: int) -> int:
        """Global step at which ``stage`` begins in the full four-stage schedule."""
        return sum(self.stage_steps[: stage - 1])

    def lr_at(self, global_step: int) -> float:
        return self.fine_tune_lr if global_step >= self.lr_drop_step else self.lr

    @property
    def total_steps(self) -> int:
        return sum(spec.steps for spec in self.stage_specs())

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["stage_steps"] = list(self.stage_steps)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainSchedule":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown schedule keys: {unknown}")
        return cls(**data)
