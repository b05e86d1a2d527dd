"""
gridworld/services/classes.py
=============================
Semantic class labels and the expert's arrival costs.

Index 0 is always the free class. The default set mirrors the minigrid
setting: empty, wall, lava and lawn with arrival costs 1, 100, 10, 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import InvalidClassSetError, UnknownClassError

FREE: int = 0


@dataclass(frozen=True)
class ClassSet:
    """Ordered class labels with the expert's per-class arrival cost.

    Attributes:
        labels: Class names, ``labels[0]`` is the free class.
        expert_costs: Positive cost of arriving at a cell of each class.
        colors: RGB display colour per class, used by image exports.
    """

    labels: tuple[str, ...]
    expert_costs: tuple[float, ...]
    colors: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise InvalidClassSetError("a class set needs the free class and at least one other class", self.labels)
        if len(self.expert_costs) != len(self.labels) or len(self.colors) != len(self.labels):
            raise InvalidClassSetError("labels, expert_costs and colors must have the same length", self.labels)
        if any(cost <= 0 for cost in self.expert_costs):
            raise InvalidClassSetError(f"expert costs must be strictly positive: {self.expert_costs}", self.labels)
        if "wall" in self.labels:
            wall_cost = self.expert_costs[self.labels.index("wall")]
            if any(cost > wall_cost for cost in self.expert_costs):
                raise InvalidClassSetError("wall cost must be at least every traversable cost", self.labels)

    @property
    def count(self) -> int:
        """Number of classes including free (K+1)."""
        return len(self.labels)

    @property
    def wall(self) -> int:
        return self.index_of("wall")

    @property
    def semantic_indices(self) -> tuple[int, ...]:
        """Indices of the non-free classes, in label order."""
        return tuple(range(1, self.count))

    def index_of(self, label: str) -> int:
        """Index of ``label``.

        Raises:
            UnknownClassError: If the label is not in the set.
        """
        if label not in self.labels:
            raise UnknownClassError(label, self.count)
        return self.labels.index(label)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "expert_costs": list(self.expert_costs),
            "colors": [list(color) for color in self.colors],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassSet":
        return cls(
            labels=tuple(data["labels"]),
            expert_costs=tuple(float(c) for c in data["expert_costs"]),
            colors=tuple(tuple(int(v) for v in color) for color in data["colors"]),
        )


# gray on empty, white on wall, cyan on lava, purple on lawn
DEFAULT_CLASS_SET: ClassSet = ClassSet(
    labels=("empty", "wall", "lava", "lawn"),
    expert_costs=(1.0, 100.0, 10.0, 0.5),
    colors=((96, 96, 96), (255, 255, 255), (0, 200, 220), (150, 60, 200)),
)


def expert_cost_of_arrival(class_set: ClassSet, class_index: int) -> float:
    """Return the expert's cost of arriving at a cell of ``class_index``.

    Raises:
        UnknownClassError: If ``class_index`` is not a valid class.
    """
    if not 0 <= class_index < class_set.count:
        raise UnknownClassError(class_index, class_set.count)
    return class_set.expert_costs[class_index]
