"""Training orchestration and test-set evaluation with per-SNR metrics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..cnn import build_model, save_model, train, write_history_csv
from ..errors import ConfigurationError, DataError
from ..fusion import FusionRule, decide_single, fuse
from .config import ExperimentConfig
from .dataset import DatasetManifest, load_images

_TRAIN_SEED_SALT = 2
_FUSION_SEED_SALT = 3


@dataclass
class ConfusionMatrix:
    """Rows are truth classes, columns predictions; raw counts."""

    counts: np.ndarray
    class_names: tuple

    @classmethod
    def empty(cls, class_names):
        k = len(class_names)
        return cls(np.zeros((k, k), dtype=np.int64), tuple(class_names))

    def add(self, truth: int, predicted: int):
        self.counts[truth, predicted] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        total = self.total
        return float(np.trace(self.counts) / total) if total else float("nan")

    def row_normalized(self) -> np.ndarray:
        sums = self.counts.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.counts / sums
        return np.where(sums > 0, out, 0.0)


@dataclass
class MetricsBundle:
    scenario_kind: str
    set_tag: str
    class_names: tuple
    snr_list_db: tuple
    confusion_per_snr: dict  # snr -> ConfusionMatrix (per-antenna decisions)
    overall_accuracy: float
    # MIMO only: fused metrics and undecided counts per snr
    fused_confusion_per_snr: dict = field(default_factory=dict)
    fused_undecided_per_snr: dict = field(default_factory=dict)
    fused_overall_accuracy: float = float("nan")

    @property
    def accuracy_per_snr(self) -> dict:
        return {snr: cm.accuracy for snr, cm in self.confusion_per_snr.items()}

    @property
    def fused_accuracy_per_snr(self) -> dict:
        out = {}
        for snr, cm in self.fused_confusion_per_snr.items():
            total = cm.total + self.fused_undecided_per_snr.get(snr, 0)
            out[snr] = float(np.trace(cm.counts) / total) if total else float("nan")
        return out


def training_seeds(cfg: ExperimentConfig):
    """(weight-init seed, shuffle/dropout seed) derived from the master seed."""
    ss = np.random.SeedSequence([cfg.master_seed, _TRAIN_SEED_SALT, cfg.train.seed])
    init, shuffle = ss.generate_state(2, np.uint64)
    return int(init), int(shuffle)


def run_training(cfg: ExperimentConfig, manifest: DatasetManifest, model_path, history_path=None):
    """Train a fresh model on a train-split manifest and persist it."""
    if manifest.split != "train":
        raise ConfigurationError(f"training needs the train split, got {manifest.split!r}")
    expected = tuple(s.name.lower() for s in cfg.modulation_set)
    if manifest.modulation_set != expected:
        raise ConfigurationError(
            f"manifest classes {manifest.modulation_set} do not match config {expected}"
        )
    images, labels, _, _, _ = load_images(manifest)
    init_seed, shuffle_seed = training_seeds(cfg)
    model = build_model(
        manifest.image_shape,
        cfg.num_classes,
        seed=init_seed,
        dropout_rate=cfg.train.dropout_rate,
    )
    model, history = train(
        model, images, labels, dataclasses.replace(cfg.train, seed=shuffle_seed)
    )
    save_model(model, model_path)
    if history_path is not None:
        write_history_csv(history_path, history)
    return model, history


def evaluate(cfg: ExperimentConfig, model, manifest: DatasetManifest) -> MetricsBundle:
    """Score a model on a test-split manifest.

    The per-antenna confusion treats every receive branch as its own test
    sample. For MIMO, bundles are additionally fused with the configured
    rule; undecided n-out-of outcomes count against fused accuracy.
    """
    if manifest.split != "test":
        raise ConfigurationError(f"evaluation needs the test split, got {manifest.split!r}")
    expected = tuple(s.name.lower() for s in cfg.modulation_set)
    if manifest.modulation_set != expected:
        raise ConfigurationError(
            f"manifest classes {manifest.modulation_set} do not match config {expected}"
        )
    images, labels, snrs, bundles, _ = load_images(manifest)
    unknown = set(np.unique(snrs)) - set(cfg.snr_list_db)
    if unknown:
        raise ConfigurationError(f"manifest contains SNRs not in the config: {sorted(unknown)}")
    probs = model.predict_probs(images)
    if probs.shape != (len(images), cfg.num_classes):
        raise DataError(
            f"model produced {probs.shape}, expected ({len(images)}, {cfg.num_classes})"
        )

    rng = np.random.default_rng(
        np.random.SeedSequence([cfg.master_seed, _FUSION_SEED_SALT])
    )
    class_names = manifest.modulation_set
    confusion = {snr: ConfusionMatrix.empty(class_names) for snr in cfg.snr_list_db}
    predictions = np.empty(len(images), dtype=np.int64)
    for i in range(len(images)):
        label, _ = decide_single(probs[i], rng)
        predictions[i] = label
        confusion[snrs[i]].add(labels[i], label)
    overall = float(np.mean(predictions == labels))

    bundle_totals = {snr: 0 for snr in cfg.snr_list_db}
    fused_confusion = {}
    fused_undecided = {}
    fused_correct = 0
    if manifest.scenario_kind == "mimo":
        fused_confusion = {snr: ConfusionMatrix.empty(class_names) for snr in cfg.snr_list_db}
        fused_undecided = {snr: 0 for snr in cfg.snr_list_db}
        for bundle_id in _unique_in_order(bundles):
            idx = np.flatnonzero(bundles == bundle_id)
            snr = snrs[idx[0]]
            truth = labels[idx[0]]
            outcome = fuse([int(predictions[i]) for i in idx], cfg.fusion, rng)
            bundle_totals[snr] += 1
            if outcome.undecided:
                fused_undecided[snr] += 1
            else:
                fused_confusion[snr].add(truth, outcome.final_label)
                if outcome.final_label == truth:
                    fused_correct += 1

    metrics = MetricsBundle(
        scenario_kind=manifest.scenario_kind,
        set_tag=cfg.set_tag,
        class_names=class_names,
        snr_list_db=cfg.snr_list_db,
        confusion_per_snr=confusion,
        overall_accuracy=overall,
        fused_confusion_per_snr=fused_confusion,
        fused_undecided_per_snr=fused_undecided,
        fused_overall_accuracy=(
            fused_correct / sum(bundle_totals.values())
            if manifest.scenario_kind == "mimo"
            else float("nan")
        ),
    )
    return metrics


def _unique_in_order(values: np.ndarray) -> np.ndarray:
    _, first = np.unique(values, return_index=True)
    return values[np.sort(first)]
