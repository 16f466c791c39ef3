from .denoiser import DenoiserConfig, IdentityDenoiser, UNet3d, sinusoidal_embedding
from .detailise import MemoryStats, MissingLevelError, detailise, upsample_level
from .sample import ddim_batch, ddim_sample, ddim_timesteps, patch_noise
from .schedule import NoiseSchedule, forward_diffuse, make_schedule
from .train import (
    LEVELS,
    LevelConfig,
    UpsamplerTrainConfig,
    UpsamplerTrainResult,
    checkpoint_name,
    level_config,
    load_level,
    train_level,
)

__all__ = [
    "NoiseSchedule",
    "make_schedule",
    "forward_diffuse",
    "DenoiserConfig",
    "UNet3d",
    "IdentityDenoiser",
    "sinusoidal_embedding",
    "ddim_timesteps",
    "ddim_batch",
    "ddim_sample",
    "patch_noise",
    "LEVELS",
    "LevelConfig",
    "level_config",
    "UpsamplerTrainConfig",
    "UpsamplerTrainResult",
    "train_level",
    "load_level",
    "checkpoint_name",
    "MemoryStats",
    "MissingLevelError",
    "detailise",
    "upsample_level",
]
