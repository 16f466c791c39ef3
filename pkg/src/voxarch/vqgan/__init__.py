from .losses import (
    LossBreakdown,
    LossWeights,
    TrainingDivergence,
    combine_losses,
    compute_losses,
    discriminator_loss,
    generator_adversarial,
    reconstruction_loss,
)
from .networks import (
    Decoder3d,
    Encoder3d,
    PatchDiscriminator3d,
    ResBlock3d,
    Vqgan,
    VqganConfig,
    batch_to_fields,
    grids_to_batch,
)
from .perceptual import (
    RandomFeatureExtractor,
    Vgg16Extractor,
    default_extractor,
    perceptual_25d,
)
from .quantize import Codebook, Quantized, commitment_loss
from .train import (
    TrainResult,
    VqganTrainConfig,
    codebook_usage,
    config_hash,
    export_codebook,
    load_vqgan,
    train_vqgan,
)

__all__ = [
    "Codebook",
    "Quantized",
    "commitment_loss",
    "Encoder3d",
    "Decoder3d",
    "ResBlock3d",
    "PatchDiscriminator3d",
    "Vqgan",
    "VqganConfig",
    "grids_to_batch",
    "batch_to_fields",
    "RandomFeatureExtractor",
    "Vgg16Extractor",
    "default_extractor",
    "perceptual_25d",
    "LossWeights",
    "LossBreakdown",
    "TrainingDivergence",
    "reconstruction_loss",
    "generator_adversarial",
    "discriminator_loss",
    "combine_losses",
    "compute_losses",
    "VqganTrainConfig",
    "TrainResult",
    "train_vqgan",
    "load_vqgan",
    "export_codebook",
    "codebook_usage",
    "config_hash",
]
