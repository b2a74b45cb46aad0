"""Replay, transition statistics, targets and tabular learners."""

from .crm import base_reward, completion_reward, crm_experiences
from .replay import Experience, ReplayBuffer, SumTree, prioritized_sample
from .tabular import (
    AutomatonQRun,
    ProductMdp,
    TabularQ,
    automaton_q_learning,
    distill_q,
    optimal_q,
    product_mdp,
    robbins_monro,
    tabular_automaton_q_update,
)
from .targets import dqn_target, dqn_values, td3_target, td3_values
from .transfer import (
    DEFAULT_RHO,
    AnnealState,
    TeacherEntry,
    TeacherTable,
    TeacherTableError,
    TransitionStats,
    beta,
    blend,
    q_avg,
    student_target,
)

__all__ = [
    "AnnealState", "AutomatonQRun", "DEFAULT_RHO", "Experience", "ProductMdp", "ReplayBuffer",
    "SumTree", "TabularQ", "TeacherEntry", "TeacherTable", "TeacherTableError", "TransitionStats",
    "automaton_q_learning", "base_reward", "beta", "blend", "completion_reward", "crm_experiences",
    "distill_q", "dqn_target", "dqn_values", "optimal_q", "prioritized_sample", "product_mdp",
    "q_avg", "robbins_monro", "student_target", "tabular_automaton_q_update", "td3_target",
    "td3_values",
]
