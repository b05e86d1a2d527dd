"""
sensor/services/__init__.py
===========================
Service layer for the simulated semantic lidar.

Exports:
    - ray_cells, trace_ray, ray_direction, ray_point, RayCell: Ray traversal.
    - scan, SensorParams, LabeledPoint, PointCloud: Lidar simulation.
    - SensorError, InvalidScanOriginError, InvalidSensorParamsError: Custom exceptions.
"""

from .exceptions import InvalidScanOriginError, InvalidSensorParamsError, SensorError
from .lidar import LabeledPoint, PointCloud, SensorParams, scan
from .raycast import RayCell, ray_cells, ray_direction, ray_point, trace_ray

__all__: list[str] = [
    "RayCell",
    "ray_cells",
    "ray_direction",
    "ray_point",
    "trace_ray",
    "LabeledPoint",
    "PointCloud",
    "SensorParams",
    "scan",
    "SensorError",
    "InvalidScanOriginError",
    "InvalidSensorParamsError",
]
