"""Teacher training, automaton distillation and student training."""

from .agents import BASELINES, AgentConfig, DqnAgent, TabularAgent, Td3Agent
from .loop import THRESHOLD, WINDOW, EpisodeRecord, StudentResult, TrainConfig, moving_average, run_training
from .pipeline import (
    DistillationError,
    TeacherArtifact,
    distill_dynamic,
    distill_static,
    static_teacher,
    train_student,
    train_teacher,
)

__all__ = [
    "AgentConfig", "BASELINES", "DistillationError", "DqnAgent", "EpisodeRecord",
    "StudentResult", "THRESHOLD", "TabularAgent", "TeacherArtifact", "Td3Agent", "TrainConfig",
    "WINDOW", "distill_dynamic", "distill_static", "moving_average", "run_training",
    "static_teacher", "train_student", "train_teacher",
]
