from .model import MiniGpt, PriorConfig
from .sample import (
    build_plan_grid,
    complete,
    decode_sequence,
    plan_complete,
    plan_known_mask,
    sample_tokens,
)
from .tokens import (
    ORDER,
    detokenize,
    half_known_mask,
    mask_id,
    sequence_from_json,
    sequence_to_json,
    sos_id,
    tokenize,
)
from .train import (
    PriorTrainConfig,
    PriorTrainResult,
    corrupt_inputs,
    load_prior,
    teacher_forced_accuracy,
    train_prior,
)

__all__ = [
    "MiniGpt",
    "PriorConfig",
    "sample_tokens",
    "complete",
    "plan_complete",
    "build_plan_grid",
    "plan_known_mask",
    "decode_sequence",
    "ORDER",
    "tokenize",
    "detokenize",
    "sequence_to_json",
    "sequence_from_json",
    "sos_id",
    "mask_id",
    "half_known_mask",
    "PriorTrainConfig",
    "PriorTrainResult",
    "train_prior",
    "load_prior",
    "teacher_forced_accuracy",
    "corrupt_inputs",
]
