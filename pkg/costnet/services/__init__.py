"""
costnet/services/__init__.py
============================
Service layer for the learnable cost encoder.

Exports:
    - EncoderConfig, CostEncoderParams, CostField: Architecture, weights, output.
    - CostEncoder, FcnCostEncoder, LinearCostEncoder, build_encoder: Encoders.
    - Adam, AdamState, adam_step: Optimizer.
    - GradientCheckReport, gradient_check: Finite-difference verification.
    - Checkpoint, save_checkpoint, load_checkpoint: Persistence.
    - CostNetError, ShapeMismatchError, InvalidSettingError, BackwardBeforeForwardError,
      NonFiniteGradientError, CheckpointError: Custom exceptions.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .exceptions import (
    BackwardBeforeForwardError,
    CheckpointError,
    CostNetError,
    InvalidSettingError,
    NonFiniteGradientError,
    ShapeMismatchError,
)
from .gradcheck import GradientCheckReport, gradient_check
from .network import (
    CostEncoder,
    CostEncoderParams,
    CostField,
    EncoderConfig,
    FcnCostEncoder,
    LinearCostEncoder,
    build_encoder,
)
from .optimizer import Adam, AdamState, adam_step

__all__: list[str] = [
    "EncoderConfig",
    "CostEncoderParams",
    "CostField",
    "CostEncoder",
    "FcnCostEncoder",
    "LinearCostEncoder",
    "build_encoder",
    "Adam",
    "AdamState",
    "adam_step",
    "GradientCheckReport",
    "gradient_check",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "CostNetError",
    "ShapeMismatchError",
    "InvalidSettingError",
    "BackwardBeforeForwardError",
    "NonFiniteGradientError",
    "CheckpointError",
]
