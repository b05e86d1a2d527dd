"""
learner/services/cost_strategy.py
=================================
Where an agent's arrival costs come from.

Follows the Strategy pattern: the tape recorder, the rollout loop and the
evaluation service only talk to :class:`CostStrategy`, so a learned model
and the true expert costs can be swapped for one another.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from costnet.services import CostField
from gridworld.services import AgentState, SemanticGrid
from semantic_map.services import InverseModelParams, LogOddsMap, posterior_grid, update
from sensor.services import PointCloud

from .model import NavigationModel

ORACLE_PSI_SCALE: float = 2.0


class CostStrategy(ABC):
    """Map encoder plus a rule that turns the map into a cost field."""

    name: str = "abstract"

    def __init__(self, inverse: InverseModelParams) -> None:
        self.inverse: InverseModelParams = inverse

    @property
    def class_count(self) -> int:
        return self.inverse.class_count

    @property
    def differentiable(self) -> bool:
        return False

    def new_map(self, shape: tuple[int, int]) -> LogOddsMap:
        return LogOddsMap.empty(shape, self.class_count)

    def observe(self, log_map: LogOddsMap, x: AgentState, cloud: PointCloud) -> LogOddsMap:
        """Fold one scan into the map."""
        return update(log_map, x, cloud, self.inverse)

    @abstractmethod
    def cost_field(self, log_map: LogOddsMap, grid: SemanticGrid) -> tuple[np.ndarray, CostField]:
        """Return the ``(K+1, H, W)`` posterior and the cost field computed from it.

        Args:
            log_map: The agent's current map.
            grid: The true environment, only consulted by oracles.
        """
        ...

    def blocked(self, grid: SemanticGrid) -> np.ndarray | None:
        """Cells the planner must leave out; ``None`` plans over every cell."""
        return None


class LearnedCostStrategy(CostStrategy):
    """Costs from the cost encoder applied to the map posterior."""

    name = "learned"

    def __init__(self, model: NavigationModel) -> None:
        super().__init__(model.inverse)
        self.model: NavigationModel = model

    @property
    def differentiable(self) -> bool:
        return True

    def cost_field(self, log_map: LogOddsMap, grid: SemanticGrid) -> tuple[np.ndarray, CostField]:
        posterior: np.ndarray = posterior_grid(log_map)
        return posterior, self.model.encoder.forward(posterior, self.model.params)


class OracleCostStrategy(CostStrategy):
    """The expert's own costs, with walls removed from the graph.

    The map is still built (with ``Psi = 2 I`` unless given) so the oracle
    produces the same artifacts as a learned model.
    """

    name = "oracle"

    def __init__(self, class_count: int, inverse: InverseModelParams | None = None) -> None:
        super().__init__(inverse or InverseModelParams.scaled_identity(class_count, ORACLE_PSI_SCALE))

    def cost_field(self, log_map: LogOddsMap, grid: SemanticGrid) -> tuple[np.ndarray, CostField]:
        return posterior_grid(log_map), CostField.from_values(grid.arrival_costs())

    def blocked(self, grid: SemanticGrid) -> np.ndarray | None:
        return grid.wall_mask()
