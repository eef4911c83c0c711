"""Command-line interface.

Subcommands: synth, spectrogram, dataset, train, eval, fuse-demo.
Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import tfa
from ..channel import add_awgn
from ..cnn import load_model
from ..errors import ConfigurationError, DataError, NumericError
from ..fusion import FusionRule, fuse
from ..sigsynth import ModulationScheme, SignalParams, generate_symbols, modulate
from .config import load_config
from .dataset import generate_dataset, load_manifest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modclass", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="synthesize a waveform and export it")
    p.add_argument("--scheme", required=True, help="modulation name, e.g. 2fsk or 16qam")
    p.add_argument("--snr", type=float, default=None, help="AWGN SNR in dB (omit for clean)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output .f32 file (JSON sidecar added)")
    p.add_argument("--num-symbols", type=int, default=14)
    p.add_argument("--sample-rate", type=float, default=16000.0)
    p.add_argument("--carrier", type=float, default=2000.0)
    p.add_argument("--symbol-rate", type=float, default=100.0)

    p = sub.add_parser("spectrogram", help="render one waveform to an image")
    p.add_argument("--in", dest="infile", required=True, help="raw float32 waveform")
    p.add_argument("--out", default=None, help="PNG output path")
    p.add_argument("--raw", default=None, help="TFA1 raw tensor output path")
    p.add_argument("--sample-rate", type=float, default=None, help="override sidecar rate")
    p.add_argument("--target", type=int, default=227)
    p.add_argument("--mode", choices=["resize", "crop-pad"], default="resize")
    p.add_argument("--grayscale", action="store_true")

    p = sub.add_parser("dataset", help="generate a train or test image dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--split", choices=["train", "test"], required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train", help="train the classifier on a generated dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True, help="dataset directory or manifest path")
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--history", default=None, help="optional training history CSV")

    p = sub.add_parser("eval", help="evaluate a trained model and export reports")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True, help="dataset directory or manifest path")
    p.add_argument("--model", required=True)
    p.add_argument("--report", required=True, help="output directory for metrics")

    p = sub.add_parser("fuse-demo", help="fuse a comma-separated list of labels")
    p.add_argument("--labels", required=True, help="e.g. 2psk,2psk,4psk,8psk")
    p.add_argument("--rule", default="majority", help="majority | n-out-of")
    p.add_argument("--n", type=int, default=None, help="n for the n-out-of rule")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_synth(args) -> int:
    scheme = ModulationScheme.from_name(args.scheme)
    params = SignalParams(
        sample_rate_hz=args.sample_rate,
        carrier_hz=args.carrier,
        symbol_rate_hz=args.symbol_rate,
        num_symbols=args.num_symbols,
    )
    rng = np.random.default_rng(args.seed)
    symbols = generate_symbols(scheme.order, params.num_symbols, rng)
    signal = modulate(scheme, symbols, params)
    if args.snr is not None:
        signal = add_awgn(signal, args.snr, rng)
    sidecar = {"scheme": scheme.name.lower(), "seed": args.seed}
    if args.snr is not None:
        sidecar["snr_db"] = args.snr
    tfa.write_signal_f32(args.out, signal, sidecar)
    print(f"wrote {len(signal)} samples to {args.out}")
    return EXIT_OK


def _cmd_spectrogram(args) -> int:
    if args.out is None and args.raw is None:
        raise ConfigurationError("need at least one of --out or --raw")
    signal = tfa.read_signal_f32(args.infile, sample_rate_hz=args.sample_rate)
    img = tfa.spectrogram(
        signal, tfa.StftConfig(), args.target, mode=args.mode, grayscale=args.grayscale
    )
    if args.raw:
        tfa.write_raw_tensor(args.raw, img.astype(np.float32))
        print(f"wrote raw tensor {args.raw}")
    if args.out:
        tfa.write_png(args.out, img)
        print(f"wrote image {args.out}")
    return EXIT_OK


def _cmd_dataset(args) -> int:
    cfg = load_config(args.config)
    manifest = generate_dataset(cfg, args.split, args.out_dir)
    print(
        f"generated {len(manifest.records)} images "
        f"({args.split}, {manifest.scenario_kind}) in {args.out_dir}"
    )
    return EXIT_OK


def _cmd_train(args) -> int:
    from .evaluate import run_training

    cfg = load_config(args.config)
    manifest = load_manifest(args.data)
    _, history = run_training(cfg, manifest, args.model, args.history)
    final = history[-1]
    print(
        f"trained {cfg.train.epochs} epochs: final loss {final.train_loss:.4f}, "
        f"val acc {final.val_acc:.4f}; model saved to {args.model}"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .evaluate import evaluate
    from .report import export_report

    cfg = load_config(args.config)
    manifest = load_manifest(args.data)
    model = load_model(args.model)
    metrics = evaluate(cfg, model, manifest)
    written = export_report(metrics, args.report)
    for snr in metrics.snr_list_db:
        line = f"snr {snr:+6.1f} dB: accuracy {metrics.accuracy_per_snr[snr]:.4f}"
        fused = metrics.fused_accuracy_per_snr
        if fused:
            line += f", fused {fused[snr]:.4f}"
        print(line)
    print(f"overall accuracy {metrics.overall_accuracy:.4f}")
    print(f"wrote {len(written)} report files to {args.report}")
    return EXIT_OK


def _cmd_fuse_demo(args) -> int:
    labels = [lab.strip().lower() for lab in args.labels.split(",") if lab.strip()]
    for lab in labels:
        ModulationScheme.from_name(lab)  # validate names
    rule_name = args.rule.strip().lower().replace("-", "_")
    if rule_name == "majority":
        rule = FusionRule("majority")
    elif rule_name == "n_out_of":
        if args.n is None:
            raise ConfigurationError("--rule n-out-of requires --n")
        rule = FusionRule("n_out_of", args.n)
    else:
        raise ConfigurationError(f"unknown fusion rule {args.rule!r}")
    outcome = fuse(labels, rule, np.random.default_rng(args.seed))
    print(
        json.dumps(
            {
                "final_label": outcome.final_label,
                "per_antenna_labels": list(outcome.per_antenna_labels),
                "tie_broken": outcome.tie_broken,
                "undecided": outcome.undecided,
            }
        )
    )
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "spectrogram": _cmd_spectrogram,
    "dataset": _cmd_dataset,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "fuse-demo": _cmd_fuse_demo,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"modclass: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"modclass: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"modclass: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"modclass: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
