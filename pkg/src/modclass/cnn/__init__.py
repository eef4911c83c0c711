from .model import CnnModel, DecisionVector, build_model, forward, loss_and_grads, softmax
from .serialize import load_model, save_model
from .training import TrainConfig, accuracy, train, write_history_csv

__all__ = [
    "CnnModel",
    "DecisionVector",
    "TrainConfig",
    "accuracy",
    "build_model",
    "forward",
    "load_model",
    "loss_and_grads",
    "save_model",
    "softmax",
    "train",
    "write_history_csv",
]
