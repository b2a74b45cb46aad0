"""Task environments: grid and continuous worlds with labeling functions."""

from .audit import TraceRecord, dump_trace, load_trace, random_policy, reconstruct_rewards, run_episode
from .objectives import OBJECTIVES, Objective, objective, objective_dfa
from .spec import EnvSpec, SpecError, load_spec, parse_geometry, save_spec
from .world import Env, EnvState, EpisodeDoneError, Layout, LayoutError, make_env, make_layout

__all__ = [
    "Env", "EnvSpec", "EnvState", "EpisodeDoneError", "Layout", "LayoutError", "OBJECTIVES",
    "Objective", "SpecError", "TraceRecord", "dump_trace", "load_spec", "load_trace",
    "make_env", "make_layout", "objective", "objective_dfa", "parse_geometry",
    "random_policy", "reconstruct_rewards", "run_episode", "save_spec",
]
