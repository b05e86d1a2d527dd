"""
learner/services/__init__.py
============================
Service layer for end-to-end training and closed-loop evaluation.

Exports:
    - TrainConfig: Training hyper-parameters.
    - NavigationModel: Cost encoder weights plus ``Psi``.
    - CostStrategy, LearnedCostStrategy, OracleCostStrategy: Cost sources.
    - EpisodeTape, StepRecord, StepPlan, record_episode, plan_step,
      maxent_q_values: Replaying demonstrations through the pipeline.
    - nll_loss, loss_coefficients, cost_gradient, loss_gradient_step,
      EpisodeGradient: Loss and its gradient.
    - Trainer, TrainingResult, train, evaluate_split: Training loop.
    - RolloutResult, rollout: Closed-loop navigation.
    - LearnerError, NonFiniteIntermediateError, EmptyDatasetError: Custom
      exceptions.
"""

from .config import TrainConfig
from .cost_strategy import CostStrategy, LearnedCostStrategy, OracleCostStrategy
from .exceptions import EmptyDatasetError, LearnerError, NonFiniteIntermediateError
from .loss import EpisodeGradient, cost_gradient, loss_coefficients, loss_gradient_step, nll_loss
from .model import NavigationModel
from .rollout import REACHED, STEP_CAP, UNREACHABLE, RolloutResult, rollout
from .tape import PLANNERS, EpisodeTape, StepPlan, StepRecord, maxent_q_values, plan_step, record_episode
from .trainer import BEST_CHECKPOINT, LAST_CHECKPOINT, Trainer, TrainingResult, evaluate_split, train

__all__: list[str] = [
    "TrainConfig",
    "NavigationModel",
    "CostStrategy",
    "LearnedCostStrategy",
    "OracleCostStrategy",
    "PLANNERS",
    "EpisodeTape",
    "StepPlan",
    "StepRecord",
    "maxent_q_values",
    "plan_step",
    "record_episode",
    "EpisodeGradient",
    "cost_gradient",
    "loss_coefficients",
    "loss_gradient_step",
    "nll_loss",
    "BEST_CHECKPOINT",
    "LAST_CHECKPOINT",
    "Trainer",
    "TrainingResult",
    "evaluate_split",
    "train",
    "REACHED",
    "STEP_CAP",
    "UNREACHABLE",
    "RolloutResult",
    "rollout",
    "LearnerError",
    "NonFiniteIntermediateError",
    "EmptyDatasetError",
]
