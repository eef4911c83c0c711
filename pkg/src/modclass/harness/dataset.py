"""Dataset generation: modulate, pass through the channel, render images.

Every record derives its own integer seed from (master_seed, split,
class, snr, sample index) through a SeedSequence, so datasets are
reproducible regardless of worker count and train/test splits never
share randomness.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import tfa
from ..channel import add_awgn, mimo_transmit, sample_channel
from ..errors import ConfigurationError, DataError
from ..sigsynth import ModulationScheme, RealSignal, SignalParams, generate_symbols, modulate
from .config import ExperimentConfig

_SPLIT_CODES = {"train": 0, "test": 1}


@dataclass(frozen=True)
class ManifestRecord:
    image_path: str  # relative to the manifest directory
    label: str
    snr_db: float
    antenna_index: int
    bundle_index: int
    seed: int


@dataclass(frozen=True)
class DatasetManifest:
    split: str
    scenario_kind: str
    nt: int
    nr: int
    modulation_set: tuple
    image_shape: tuple
    records: tuple
    root: str = "."

    @property
    def class_names(self):
        return self.modulation_set

    def label_index(self, label: str) -> int:
        return self.modulation_set.index(label)


def record_seed(master_seed: int, split: str, class_idx: int, snr_idx: int, sample: int) -> int:
    """Stable 64-bit seed for one generated record."""
    ss = np.random.SeedSequence(
        [master_seed, _SPLIT_CODES[split], class_idx, snr_idx, sample]
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _signal_params(cfg: ExperimentConfig, rng) -> SignalParams:
    if not cfg.random_initial_phase:
        return cfg.signal
    phase = float(rng.uniform(0.0, 2.0 * np.pi))
    return dataclasses.replace(cfg.signal, initial_phase_rad=phase)


def synthesize_record(cfg: ExperimentConfig, scheme: ModulationScheme, snr_db: float, seed: int):
    """Produce the per-antenna images for one transmission.

    Returns a list of (antenna_index, image) pairs. SISO applies a random
    attenuation from [0, 1] and AWGN; MIMO sends nt independent streams of
    the same scheme through a random channel with per-branch noise.
    """
    rng = np.random.default_rng(seed)
    params = _signal_params(cfg, rng)
    scn = cfg.scenario
    if scn.kind == "siso":
        symbols = generate_symbols(scheme.order, params.num_symbols, rng)
        clean = modulate(scheme, symbols, params)
        attenuation = float(rng.uniform(0.0, 1.0))
        faded = RealSignal(attenuation * clean.samples, clean.sample_rate_hz)
        received = [add_awgn(faded, snr_db, rng)]
    else:
        streams = []
        for _ in range(scn.nt):
            symbols = generate_symbols(scheme.order, params.num_symbols, rng)
            streams.append(modulate(scheme, symbols, params))
        ch = sample_channel(scn.nt, scn.nr, params.symbol_period_s, rng)
        received = list(mimo_transmit(streams, ch, snr_db, rng, truth_label=scheme).branches)
    images = []
    for antenna, branch in enumerate(received):
        img = tfa.spectrogram(
            branch, cfg.stft, cfg.fit.target, mode=cfg.fit.mode, grayscale=cfg.fit.grayscale
        )
        images.append((antenna, img.astype(np.float32)))
    return images


def _snr_tag(snr_db: float) -> str:
    text = f"{snr_db:+g}".replace(".", "p")
    return text.replace("+", "p").replace("-", "m")


def _generate_one(args):
    cfg, split, class_idx, snr_idx, sample, out_dir = args
    scheme = cfg.modulation_set[class_idx]
    snr_db = cfg.snr_list_db[snr_idx]
    seed = record_seed(cfg.master_seed, split, class_idx, snr_idx, sample)
    images = synthesize_record(cfg, scheme, snr_db, seed)
    bundle = (class_idx * len(cfg.snr_list_db) + snr_idx) * cfg.signals_per_class_per_snr + sample
    rows = []
    for antenna, img in images:
        name = (
            f"{split}_{scheme.name.lower()}_snr{_snr_tag(snr_db)}_"
            f"{sample:05d}_a{antenna}.tfa"
        )
        tfa.write_raw_tensor(Path(out_dir) / name, img)
        rows.append(
            ManifestRecord(name, scheme.name.lower(), snr_db, antenna, bundle, seed)
        )
    return rows


def max_workers() -> int:
    """Worker cap: MODCLASS_THREADS if set, else the CPU count."""
    env = os.environ.get("MODCLASS_THREADS")
    cpus = os.cpu_count() or 1
    if env is None:
        return cpus
    try:
        cap = int(env)
    except ValueError as exc:
        raise ConfigurationError(f"MODCLASS_THREADS must be an integer, got {env!r}") from exc
    return max(1, min(cpus, cap))


def generate_dataset(cfg: ExperimentConfig, split: str, out_dir) -> DatasetManifest:
    """Generate all images for one split and write manifest.json alongside."""
    if split not in _SPLIT_CODES:
        raise ConfigurationError(f"split must be 'train' or 'test', got {split!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [
        (cfg, split, class_idx, snr_idx, sample, str(out_dir))
        for class_idx in range(len(cfg.modulation_set))
        for snr_idx in range(len(cfg.snr_list_db))
        for sample in range(cfg.signals_per_class_per_snr)
    ]
    workers = max_workers()
    rows = []
    if workers > 1 and len(tasks) > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            for chunk in pool.imap(_generate_one, tasks, chunksize=8):
                rows.extend(chunk)
    else:
        for task in tasks:
            rows.extend(_generate_one(task))

    channels = 1 if cfg.fit.grayscale else 3
    manifest = DatasetManifest(
        split=split,
        scenario_kind=cfg.scenario.kind,
        nt=cfg.scenario.nt,
        nr=cfg.scenario.nr,
        modulation_set=tuple(s.name.lower() for s in cfg.modulation_set),
        image_shape=(cfg.fit.target, cfg.fit.target, channels),
        records=tuple(rows),
        root=str(out_dir),
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "split": manifest.split,
        "scenario_kind": manifest.scenario_kind,
        "nt": manifest.nt,
        "nr": manifest.nr,
        "modulation_set": list(manifest.modulation_set),
        "image_shape": list(manifest.image_shape),
        "records": [dataclasses.asdict(r) for r in manifest.records],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
    try:
        records = tuple(ManifestRecord(**r) for r in doc["records"])
        manifest = DatasetManifest(
            split=doc["split"],
            scenario_kind=doc["scenario_kind"],
            nt=doc["nt"],
            nr=doc["nr"],
            modulation_set=tuple(doc["modulation_set"]),
            image_shape=tuple(doc["image_shape"]),
            records=records,
            root=str(path.parent),
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"manifest {path} is malformed: {exc}") from exc
    return manifest


def load_images(manifest: DatasetManifest):
    """Load every record's image into memory.

    Returns (images (N,H,W,C) float32, labels (N,), snrs (N,), bundles (N,),
    antennas (N,)) in manifest record order.
    """
    n = len(manifest.records)
    if n == 0:
        raise DataError("manifest has no records")
    h, w, c = manifest.image_shape
    images = np.empty((n, h, w, c), dtype=np.float32)
    labels = np.empty(n, dtype=np.int64)
    snrs = np.empty(n, dtype=np.float64)
    bundles = np.empty(n, dtype=np.int64)
    antennas = np.empty(n, dtype=np.int64)
    for i, rec in enumerate(manifest.records):
        path = Path(manifest.root) / rec.image_path
        if not path.exists():
            raise DataError(f"manifest references missing image {path}")
        img = tfa.read_raw_tensor(path)
        if img.shape != (h, w, c):
            raise DataError(
                f"{path}: image shape {img.shape} does not match manifest {manifest.image_shape}"
            )
        images[i] = img
        labels[i] = manifest.label_index(rec.label)
        snrs[i] = rec.snr_db
        bundles[i] = rec.bundle_index
        antennas[i] = rec.antenna_index
    return images, labels, snrs, bundles, antennas
