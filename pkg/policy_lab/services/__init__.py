"""
policy_lab/services/__init__.py
===============================
Service layer for discounted value iteration with hard-min and soft-min
Bellman operators.

Exports:
    - GridMDP, bordered_grid_mdp: Deterministic grid MDPs.
    - bellman_hard, bellman_soft: One Jacobi sweep of each operator.
    - QTable, value_iteration, extract_policy, greedy_rollout: Fixed points and policies.
    - PolicyLabConfig, PolicyComparison, compare_policies, run_policy_lab,
      argmax_agreement: The comparison run.
    - write_comparison, q_table_frame: Artifacts.
    - PolicyLabError: Custom exception.
"""

from .bellman import bellman_hard, bellman_soft, initial_table
from .comparison import PolicyComparison, PolicyLabConfig, argmax_agreement, compare_policies, run_policy_lab
from .exceptions import PolicyLabError
from .export import q_table_frame, write_comparison
from .mdp import GridMDP, bordered_grid_mdp
from .value_iteration import GreedyPath, QTable, extract_policy, greedy_rollout, sup_norm_change, value_iteration

__all__: list[str] = [
    "GridMDP",
    "bordered_grid_mdp",
    "bellman_hard",
    "bellman_soft",
    "initial_table",
    "QTable",
    "GreedyPath",
    "value_iteration",
    "extract_policy",
    "greedy_rollout",
    "sup_norm_change",
    "PolicyLabConfig",
    "PolicyComparison",
    "compare_policies",
    "run_policy_lab",
    "argmax_agreement",
    "write_comparison",
    "q_table_frame",
    "PolicyLabError",
]
