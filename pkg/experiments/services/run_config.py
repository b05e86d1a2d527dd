"""
experiments/services/run_config.py
==================================
Resolution of the configuration a management command runs with.

Layers, later ones winning:

1. ``settings.SEMNAV_DEFAULTS``
2. the JSON file passed with ``--config``, deep-merged
3. command-line flags (``--seed``, ``--out``, ``--grid-size``, ...)

Keys absent from the defaults are rejected, so a typo in a config file is
an error rather than a silently ignored setting.
"""

from __future__ import annotations

import copy
import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from django.conf import settings

from costnet.services import EncoderConfig
from gridworld.services import GridParams
from learner.services import TrainConfig
from policy_lab.services import PolicyLabConfig
from semnav.exceptions import SemNavError
from sensor.services import SensorParams

from .exceptions import ConfigurationError

logger: logging.Logger = logging.getLogger(__name__)

RESOLVED_CONFIG_FILE: str = "resolved_config.json"

# flag name -> dotted config path
FLAG_PATHS: dict[str, str] = {
    "seed": "seed",
    "out": "out",
    "grid_size": "grid.size",
    "episodes": "data.episodes",
    "epochs": "train.epochs",
    "alpha": "train.alpha",
    "lr": "train.lr",
    "checkpoint": "eval.checkpoint",
}


# ──────────────────────────────────────────────
# Merging
# ──────────────────────────────────────────────


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    """Return ``base`` updated recursively with ``override``.

    Raises:
        ConfigurationError: For keys of ``override`` that ``base`` lacks, or a
            scalar given where a section is expected.
    """
    merged: dict[str, Any] = copy.deepcopy(dict(base))
    for key, value in override.items():
        path: str = f"{prefix}{key}"
        if key not in merged:
            raise ConfigurationError("unknown key", key=path)
        if isinstance(merged[key], dict):
            if not isinstance(value, Mapping):
                raise ConfigurationError("expected a section", key=path)
            merged[key] = deep_merge(merged[key], value, prefix=f"{path}.")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _set_path(values: dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    section = values
    for name in parents:
        section = section[name]
    section[leaf] = value


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file.

    Raises:
        ConfigurationError: If the file is missing, not JSON or not an object.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigurationError(f"config file {str(path)!r} not found")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {str(path)!r} is not valid JSON ({exc.msg})")
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {str(path)!r} must hold a JSON object")
    return data


# ──────────────────────────────────────────────
# RunConfig
# ──────────────────────────────────────────────


@dataclass
class RunConfig:
    """Resolved configuration of one command invocation.

    Attributes:
        command: Management command name.
        values: The merged nested dict; same layout as ``SEMNAV_DEFAULTS``.
    """

    command: str
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    @property
    def out(self) -> Path:
        return Path(self.values["out"])

    def section(self, name: str) -> dict[str, Any]:
        return self.values[name]

    def _typed(self, builder, key: str):
        try:
            return builder()
        except SemNavError as exc:
            raise ConfigurationError(exc.message, key=key) from exc
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigurationError(str(exc), key=key) from exc

    def grid_params(self) -> GridParams:
        grid = self.section("grid")
        return self._typed(
            lambda: GridParams(
                width=int(grid["size"]),
                height=int(grid["size"]),
                rect_count=tuple(int(v) for v in grid["rect_count"]),
                rect_size=tuple(int(v) for v in grid["rect_size"]),
                class_weights=tuple(float(v) for v in grid["class_weights"]),
            ),
            "grid",
        )

    def sensor_params(self) -> SensorParams:
        sensor = self.section("sensor")
        return self._typed(
            lambda: SensorParams(
                ray_count=int(sensor["ray_count"]),
                angular_resolution=float(sensor["angular_resolution"]),
                max_range=float(sensor["max_range"]),
            ),
            "sensor",
        )

    def encoder_config(self) -> EncoderConfig:
        model = self.section("model")
        return self._typed(
            lambda: EncoderConfig(
                kind=str(model["encoder"]),
                channels=tuple(int(c) for c in model["channels"]),
                output_bias=float(model["output_bias"]),
                seed=self.seed,
            ),
            "model",
        )

    def map_kwargs(self) -> dict[str, Any]:
        """Keyword arguments of :meth:`NavigationModel.from_config` for the map encoder."""
        section = self.section("map")
        return {
            "psi_init": float(section["psi_init"]),
            "epsilon": float(section["epsilon"]),
            "update_mode": str(section["update_mode"]),
        }

    def train_config(self, progress: bool = False) -> TrainConfig:
        data = dict(self.section("train"))
        data["data_dir"] = str(self.section("data")["dir"])
        data["progress"] = progress
        return self._typed(lambda: TrainConfig.from_dict(data, seed=self.seed), "train")

    def policy_lab_config(self) -> PolicyLabConfig:
        return self._typed(lambda: PolicyLabConfig.from_dict(self.section("policy_lab")), "policy_lab")

    def episode_cap(self) -> int | None:
        cap = self.section("data")["episodes"]
        return None if cap is None else int(cap)

    def to_dict(self) -> dict[str, Any]:
        return {"command": self.command, **copy.deepcopy(self.values)}

    def write(self, out_dir: str | Path | None = None) -> Path:
        """Write ``resolved_config.json`` into ``out_dir`` (default: ``out``)."""
        directory = Path(out_dir) if out_dir is not None else self.out
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / RESOLVED_CONFIG_FILE
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def resolve_run_config(
    command: str,
    config_path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Build the :class:`RunConfig` of ``command``.

    Args:
        command: Management command name.
        config_path: Optional JSON file merged over the defaults.
        overrides: Flag values keyed by flag name (see ``FLAG_PATHS``);
            ``None`` values are ignored.

    Raises:
        ConfigurationError: On unreadable files, unknown keys or flags.
    """
    values: dict[str, Any] = copy.deepcopy(settings.SEMNAV_DEFAULTS)
    if config_path:
        values = deep_merge(values, load_config_file(config_path))
    for flag, value in (overrides or {}).items():
        if value is None:
            continue
        if flag not in FLAG_PATHS:
            raise ConfigurationError("unknown flag", key=flag)
        _set_path(values, FLAG_PATHS[flag], value)
    logger.debug("resolved %s configuration from %s", command, config_path or "defaults")
    return RunConfig(command=command, values=values)
