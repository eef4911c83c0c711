from .config import ExperimentConfig, FitSpec, Scenario, config_from_dict, load_config, save_config
from .dataset import DatasetManifest, generate_dataset, load_images, load_manifest, record_seed
from .evaluate import ConfusionMatrix, MetricsBundle, evaluate, run_training

__all__ = [
    "ConfusionMatrix",
    "DatasetManifest",
    "ExperimentConfig",
    "FitSpec",
    "MetricsBundle",
    "Scenario",
    "config_from_dict",
    "evaluate",
    "generate_dataset",
    "load_config",
    "load_images",
    "load_manifest",
    "record_seed",
    "run_training",
    "save_config",
]
