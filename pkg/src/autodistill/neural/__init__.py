"""Small numpy neural networks: MLPs, dueling Q heads, Adam and TD3."""

from .agents import Batch, DqnConfig, DqnLearner, Td3Config, Td3Learner, actor_delay
from .nets import Adam, DuelingQ, Mlp, adam_step, encode_product_state, forward_backward, polyak
from .snapshot import SnapshotError, load_into, load_weights, save_weights

__all__ = [
    "Adam", "Batch", "DqnConfig", "DqnLearner", "DuelingQ", "Mlp", "SnapshotError", "Td3Config",
    "Td3Learner", "actor_delay", "adam_step", "encode_product_state", "forward_backward",
    "load_into", "load_weights", "polyak", "save_weights",
]
