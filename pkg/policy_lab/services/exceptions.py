"""
policy_lab/services/exceptions.py
=================================
Custom exception hierarchy for the value iteration laboratory.

Exception Tree::

    PolicyLabError (base)
"""

from __future__ import annotations

from semnav.exceptions import SemNavError


class PolicyLabError(SemNavError):
    """Raised for invalid MDPs, operators or iteration settings."""
