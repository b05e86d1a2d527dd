"""
sensor/services/exceptions.py
=============================
Exceptions raised by the ray caster and the lidar simulator.
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class SensorError(SemNavError):
    """Base exception for sensor failures."""


class InvalidScanOriginError(SensorError):
    """Raised when a scan is requested from a wall or off-grid cell."""

    def __init__(self, origin: tuple[int, int], reason: str) -> None:
        self.origin: tuple[int, int] = tuple(origin)
        super().__init__(
            message=f"cannot scan from {self.origin}: {reason}",
            details={"origin": list(self.origin), "reason": reason},
        )


class InvalidSensorParamsError(SensorError):
    """Raised when sensor parameters are out of range."""

    def __init__(self, parameter: str, value: object) -> None:
        super().__init__(
            message=f"invalid sensor parameter {parameter}={value!r}",
            details={"parameter": parameter, "value": repr(value)},
        )
