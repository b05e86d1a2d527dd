"""
semantic_map/services/__init__.py
=================================
Service layer for the Bayesian semantic map encoder.

Exports:
    - InverseModelParams, LogOddsMap: Model parameters and the map state.
    - delta_p, inverse_logodds, update, posterior, posterior_grid: Map operations.
    - ScanEvidence, build_scan_evidence: Per-scan sparse statistics.
    - MapGradients, LogOddsGradient, backprop_to_psi, softmax_backward: Gradients.
    - SemanticMapError, InvalidPriorError, SparsityMismatchError: Custom exceptions.
"""

from .backprop import LogOddsGradient, MapGradients, backprop_to_psi, softmax_backward
from .evidence import ScanEvidence, build_scan_evidence, delta_p, ray_support
from .exceptions import InvalidPriorError, SemanticMapError, SparsityMismatchError
from .logodds import (
    InverseModelParams,
    LogOddsMap,
    integrate,
    inverse_logodds,
    posterior,
    posterior_grid,
    update,
)

__all__: list[str] = [
    "InverseModelParams",
    "LogOddsMap",
    "delta_p",
    "ray_support",
    "inverse_logodds",
    "integrate",
    "update",
    "posterior",
    "posterior_grid",
    "ScanEvidence",
    "build_scan_evidence",
    "MapGradients",
    "LogOddsGradient",
    "backprop_to_psi",
    "softmax_backward",
    "SemanticMapError",
    "InvalidPriorError",
    "SparsityMismatchError",
]
