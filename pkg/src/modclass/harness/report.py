"""Metric exports: CSV files plus confusion-heatmap and accuracy-curve PNGs.

CSV is the canonical format; floats are written with enough digits to
round-trip exactly. File names are deterministic:
<scenario>_<set>_accuracy.csv, <scenario>_<set>_confusion_snr<tag>.csv, etc.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..errors import DataError
from .dataset import _snr_tag
from .evaluate import MetricsBundle


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def export_report(metrics: MetricsBundle, out_dir) -> list:
    """Write all metric files for one evaluation; returns the paths written."""
    if not metrics.confusion_per_snr or all(
        cm.total == 0 for cm in metrics.confusion_per_snr.values()
    ):
        raise DataError("refusing to export an empty metrics bundle")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = f"{metrics.scenario_kind}_{metrics.set_tag}"
    written = []

    acc_path = out_dir / f"{tag}_accuracy.csv"
    _write_accuracy_csv(metrics, acc_path)
    written.append(acc_path)

    for snr in metrics.snr_list_db:
        cm = metrics.confusion_per_snr[snr]
        base = out_dir / f"{tag}_confusion_snr{_snr_tag(snr)}"
        _write_confusion_csv(cm, base.with_suffix(".csv"))
        _write_confusion_png(cm, base.with_suffix(".png"), f"{tag} @ {snr:+g} dB")
        written.extend([base.with_suffix(".csv"), base.with_suffix(".png")])
        if metrics.fused_confusion_per_snr:
            fused = out_dir / f"{tag}_fused_confusion_snr{_snr_tag(snr)}"
            fcm = metrics.fused_confusion_per_snr[snr]
            _write_confusion_csv(fcm, fused.with_suffix(".csv"))
            _write_confusion_png(fcm, fused.with_suffix(".png"), f"{tag} fused @ {snr:+g} dB")
            written.extend([fused.with_suffix(".csv"), fused.with_suffix(".png")])

    plot_path = out_dir / f"{tag}_accuracy.png"
    _write_accuracy_plot(metrics, plot_path)
    written.append(plot_path)
    return written


def _write_accuracy_csv(metrics: MetricsBundle, path):
    acc = metrics.accuracy_per_snr
    fused = metrics.fused_accuracy_per_snr
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if fused:
            writer.writerow(["snr_db", "acc_no_fusion", "acc_fused"])
            for snr in metrics.snr_list_db:
                writer.writerow([_fmt(snr), _fmt(acc[snr]), _fmt(fused[snr])])
        else:
            writer.writerow(["snr_db", "accuracy"])
            for snr in metrics.snr_list_db:
                writer.writerow([_fmt(snr), _fmt(acc[snr])])


def read_accuracy_csv(path):
    """Parse an accuracy CSV back into {snr: {column: value}}."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            snr = float(row.pop("snr_db"))
            out[snr] = {k: float(v) for k, v in row.items()}
    return out


def _write_confusion_csv(cm, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["truth\\pred"] + list(cm.class_names))
        for name, row in zip(cm.class_names, cm.counts):
            writer.writerow([name] + [int(v) for v in row])


def read_confusion_csv(path):
    """Parse a confusion CSV back into (class_names, counts array)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    names = tuple(rows[0][1:])
    counts = np.array([[int(v) for v in row[1:]] for row in rows[1:]], dtype=np.int64)
    return names, counts


def _write_confusion_png(cm, path, title):
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.imshow(cm.row_normalized(), cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(cm.class_names)), cm.class_names, rotation=45, ha="right")
    ax.set_yticks(range(len(cm.class_names)), cm.class_names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("truth")
    ax.set_title(title)
    for i in range(len(cm.class_names)):
        for j in range(len(cm.class_names)):
            val = cm.row_normalized()[i, j]
            if val >= 0.005:
                ax.text(
                    j, i, f"{val:.2f}", ha="center", va="center",
                    color="white" if val > 0.5 else "black", fontsize=7,
                )
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _write_accuracy_plot(metrics: MetricsBundle, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    snrs = list(metrics.snr_list_db)
    acc = metrics.accuracy_per_snr
    ax.plot(snrs, [acc[s] for s in snrs], "o-", label="per-antenna")
    fused = metrics.fused_accuracy_per_snr
    if fused:
        ax.plot(snrs, [fused[s] for s in snrs], "s-", label="fused")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title(f"{metrics.scenario_kind} {metrics.set_tag}")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
