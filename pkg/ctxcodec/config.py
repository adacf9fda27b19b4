"""
Codec configuration.

``CodecConfig`` carries every ablation axis of the codec (condition, motion
and entropy modes, context width, lambda, distortion metric) plus the
architecture widths. It is stored in checkpoints and in the container header,
so a decoder never needs any other out-of-band settings.
"""

from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Any, Dict

from ctxcodec.exceptions import ConfigurationError


class ConditionMode(str, Enum):
    """How the current frame is conditioned on the reference."""

    CONTEXT_FEATURE = "context_feature"
    RGB_PREDICTION = "rgb_prediction"
    RESIDUE = "residue"


class MotionMode(str, Enum):
    """Whether the condition is motion compensated."""

    MEMC = "memc"
    NONE = "none"


class EntropyMode(str, Enum):
    """Which priors feed the entropy model of the frame latents."""

    HYPER_SPATIAL_TEMPORAL = "hyper_spatial_temporal"
    HYPER_TEMPORAL = "hyper_temporal"
    HYPER_SPATIAL = "hyper_spatial"
    HYPER_ONLY = "hyper_only"

    @property
    def uses_spatial(self) -> bool:
        return self in (EntropyMode.HYPER_SPATIAL_TEMPORAL, EntropyMode.HYPER_SPATIAL)

    @property
    def uses_temporal(self) -> bool:
        return self in (EntropyMode.HYPER_SPATIAL_TEMPORAL, EntropyMode.HYPER_TEMPORAL)


class DistortionMetric(str, Enum):
    """Distortion term of the rate-distortion loss."""

    MSE = "mse"
    MS_SSIM = "ms_ssim"


CONTEXT_DIMS = (3, 16, 64, 256)

# Lambda sets, one model per value.
MSE_LAMBDAS = (256.0, 512.0, 1024.0, 2048.0)
MS_SSIM_LAMBDAS = (8.0, 16.0, 32.0, 64.0)

# Wire ids used in the container header.
ENTROPY_MODE_IDS = {
    EntropyMode.HYPER_SPATIAL_TEMPORAL: 0,
    EntropyMode.HYPER_TEMPORAL: 1,
    EntropyMode.HYPER_SPATIAL: 2,
    EntropyMode.HYPER_ONLY: 3,
}
CONDITION_MODE_IDS = {
    ConditionMode.CONTEXT_FEATURE: 0,
    ConditionMode.RGB_PREDICTION: 1,
    ConditionMode.RESIDUE: 2,
}
MOTION_MODE_IDS = {MotionMode.MEMC: 0, MotionMode.NONE: 1}


def _enum_from_id(table: Dict[Any, int], value: int, what: str):
    for member, wire_id in table.items():
        if wire_id == value:
            return member
    raise ConfigurationError(f"unknown {what} id {value}")


def entropy_mode_from_id(value: int) -> EntropyMode:
    return _enum_from_id(ENTROPY_MODE_IDS, value, "entropy mode")


def condition_mode_from_id(value: int) -> ConditionMode:
    return _enum_from_id(CONDITION_MODE_IDS, value, "condition mode")


def motion_mode_from_id(value: int) -> MotionMode:
    return _enum_from_id(MOTION_MODE_IDS, value, "motion mode")


@dataclass(frozen=True)
class CodecConfig:
    """
    Configuration of one contextual P-frame model.

    Attributes:
        condition_mode: context_feature, rgb_prediction or residue
        motion_mode: memc or none
        entropy_mode: which priors the frame-latent entropy model consumes
        context_dim: channels of the feature-domain context (3, 16, 64 or 256)
        lam: rate-distortion trade-off weight (lambda)
        distortion_metric: mse or ms_ssim
        latent_channels: channels of the frame latents (96)
        hidden_channels: internal width of the contextual encoder/decoder (64)
        hyper_channels: channels of the hyper latents z (C_z)
        temporal_channels: channels of the temporal prior (C_tp)
        mv_channels: channels of the MV latents g and s (C_g)
        flow_levels: pyramid levels of the flow estimator
        refine_blocks: residual blocks in the context refinement stage
        spatial_kernel: kernel size of the masked spatial-prior convolution
        mean_shift: round y - mu instead of y (reserved, not supported when coding)
    """

    condition_mode: ConditionMode = ConditionMode.CONTEXT_FEATURE
    motion_mode: MotionMode = MotionMode.MEMC
    entropy_mode: EntropyMode = EntropyMode.HYPER_SPATIAL_TEMPORAL
    context_dim: int = 64
    lam: float = 256.0
    distortion_metric: DistortionMetric = DistortionMetric.MSE
    latent_channels: int = 96
    hidden_channels: int = 64
    hyper_channels: int = 64
    temporal_channels: int = 64
    mv_channels: int = 64
    flow_levels: int = 4
    refine_blocks: int = 1
    spatial_kernel: int = 5
    mean_shift: bool = False

    def __post_init__(self):
        # Accept plain strings for the enum fields (JSON configs, CLI flags).
        for name, enum_type in (
            ("condition_mode", ConditionMode),
            ("motion_mode", MotionMode),
            ("entropy_mode", EntropyMode),
            ("distortion_metric", DistortionMetric),
        ):
            value = getattr(self, name)
            if not isinstance(value, enum_type):
                try:
                    object.__setattr__(self, name, enum_type(value))
                except ValueError:
                    allowed = ", ".join(m.value for m in enum_type)
                    raise ConfigurationError(
                        f"{name} must be one of {allowed}, got: {value!r}"
                    ) from None
        self.validate()

    def validate(self) -> None:
        """
        Check every field against its domain.

        Raises:
            ConfigurationError: If a field is out of range
        """
        if self.context_dim not in CONTEXT_DIMS:
            raise ConfigurationError(
                f"context_dim must be one of {CONTEXT_DIMS}, got: {self.context_dim}"
            )
        if not self.lam > 0:
            raise ConfigurationError(f"lambda must be positive, got: {self.lam}")
        for name in (
            "latent_channels",
            "hidden_channels",
            "hyper_channels",
            "temporal_channels",
            "mv_channels",
            "flow_levels",
            "refine_blocks",
        ):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got: {getattr(self, name)}")
        if self.spatial_kernel < 3 or self.spatial_kernel % 2 == 0:
            raise ConfigurationError(
                f"spatial_kernel must be odd and >= 3, got: {self.spatial_kernel}"
            )

    @property
    def condition_channels(self) -> int:
        """Channels of the condition tensor fed to the codec and temporal prior."""
        if self.condition_mode is ConditionMode.CONTEXT_FEATURE:
            return self.context_dim
        return 3

    def with_updates(self, **changes) -> "CodecConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, Enum):
                data[key] = value.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CodecConfig":
        known = {f.name for f in fields(cls)}
        # "lambda" is accepted as an alias in JSON files.
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown codec config keys: {unknown}")
        return cls(**data)
