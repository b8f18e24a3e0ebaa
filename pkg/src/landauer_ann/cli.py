"""Command-line entry point: ``landauer-ann {train,analyze,compare,synth,canny}``.

Every subcommand reads and writes plain files under ``--out-dir``; nothing is
carried between invocations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from .canny import canny
from .checkpoint import CheckpointError, atomic_write, load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig, resolve_config
from .data import (
    PRESETS,
    DataError,
    PatchDataset,
    extract_patches,
    load_image,
    save_image,
    synthetic_dataset,
)
from .dissipation import DeterminismError, compare_references
from .entropy import QuantizationError
from .experiment import (
    analysis_report,
    analyze,
    manifest_splits,
    parse_pattern,
    ranked,
    report_header,
    run_synthetic_suite,
    train_from_manifest,
    train_on,
)
from .netpbm import NetpbmError
from .nn import ContractError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def sample_manifest() -> Path:
    """Path of the manifest for the bundled sample images."""
    return Path(str(resources.files("landauer_ann") / "sample_data" / "manifest.csv"))


def _manifest_arg(value: str) -> Path:
    return sample_manifest() if value == "sample" else Path(value)


def _write_csv(path: Path, header: dict[str, str], columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    atomic_write(path, buf.getvalue())


def _write_json(path: Path, doc: dict) -> None:
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pattern(name: str, seed: int):
    try:
        return parse_pattern(name, seed)
    except DataError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------


def cmd_train(args: argparse.Namespace, config: RunConfig) -> int:
    if args.synthetic:
        train = val = synthetic_dataset(_pattern(args.synthetic, config.seed))
        ckpt = train_on(config, train, val)
    else:
        if not config.manifest:
            raise ConfigError("train needs --manifest (or --synthetic)")
        ckpt, _ = train_from_manifest(config, _manifest_arg(config.manifest))
    out = _out_dir(config)
    save_checkpoint(ckpt, out / "checkpoint.json")
    header = report_header(config, "n/a")
    _write_csv(
        out / "history.csv",
        header,
        ("epoch", "train_mse", "val_mse"),
        [(r.epoch, repr(r.train_mse), repr(r.val_mse)) for r in ckpt.history.records],
    )
    h = ckpt.history
    how = "early stopping" if h.early_stopped else "max epochs reached"
    print(f"stopped at epoch {h.stopped_epoch} ({how}); best val epoch {h.best_epoch}")
    print(f"wrote {out / 'checkpoint.json'} and {out / 'history.csv'}")
    return EXIT_OK


def _analysis_sets(args: argparse.Namespace, config: RunConfig, ckpt) -> tuple[PatchDataset, PatchDataset | None]:
    if args.synthetic:
        ds = synthetic_dataset(_pattern(args.synthetic, config.seed))
        training = ds
    elif config.manifest:
        training, _ = manifest_splits(config, _manifest_arg(config.manifest))
        if ckpt.train_ids and sorted(training.ids()) != sorted(ckpt.train_ids):
            raise ConfigError("manifest/seed give a different training split than the checkpoint was trained on")
    else:
        raise ConfigError("analyze needs --manifest or --synthetic")
    task = None
    if args.image:
        if not args.gt:
            raise ConfigError("--image needs --gt")
        task = extract_patches(load_image(args.image), load_image(args.gt), Path(args.image).stem)
    return training, task


def cmd_analyze(args: argparse.Namespace, config: RunConfig) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    if vars(ckpt.net.topology) != vars(config.topology()):
        raise ConfigError(f"checkpoint topology {vars(ckpt.net.topology)} differs from config {vars(config.topology())}")
    if not ckpt.history.records:
        raise DataError("checkpoint has no epoch snapshots")
    training, task = _analysis_sets(args, config, ckpt)
    analysis = analyze(ckpt, training, config, task, args.epochs or config.ledger_epochs)
    out = _out_dir(config)
    header = report_header(config, analysis.schemes.descriptor())
    atomic_write(out / "ledger.csv", analysis.ledger.to_csv(header))
    report = analysis_report(analysis, config)
    _write_json(out / "report.json", report)
    print(
        f"task bits {analysis.task_bits:.4f} ({report['task_joules']:.4e} J at {config.temperature:g} K); "
        f"training bits over {report['training_epochs']} epochs {analysis.training_bits:.4f}; "
        f"ratio {analysis.training_to_task_ratio:.2f}"
    )
    print(f"reference ANN bound {report['reference_ann_bits']} bits; scheme {analysis.schemes.descriptor()}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, config: RunConfig) -> int:
    if args.bits is not None:
        bits = args.bits
        source = "command line"
    elif args.report:
        try:
            bits = float(json.loads(Path(args.report).read_text())["task_bits"])
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"{args.report} has no usable task_bits field") from exc
        source = str(args.report)
    else:
        raise ConfigError("compare needs --bits or --report")
    if not bits > 0:
        raise ConfigError(f"ANN bits must be positive, got {bits}")
    report = compare_references(bits)
    doc = {"source": source, **report.to_dict()}
    _write_json(_out_dir(config) / "comparison.json", doc)
    print(f"vNp/ANN = {report.ratio_vnp:.1f}, CAP/ANN = {report.ratio_cap:.2f}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace, config: RunConfig) -> int:
    names = [n.strip() for n in args.presets.split(",") if n.strip()]
    if len(names) < 2:
        raise ConfigError("synth needs at least two presets")
    for n in names:
        _pattern(n, config.seed)
    results = run_synthetic_suite(names, config)
    out = _out_dir(config)
    for r in results:
        header = report_header(config, r.analysis.schemes.descriptor()) | {"preset": r.name}
        atomic_write(out / f"synth_{r.name}_ledger.csv", r.analysis.ledger.to_csv(header))
    rows = [
        (rank, r.name, repr(r.separation), repr(r.cumulative_bits), repr(r.task_bits), r.checkpoint.history.stopped_epoch)
        for rank, r in enumerate(ranked(results), start=1)
    ]
    _write_csv(
        out / "synth_summary.csv",
        report_header(config, results[0].analysis.schemes.descriptor()),
        ("rank", "preset", "mean_separation", "cumulative_bits", "task_bits", "stopped_epoch"),
        rows,
    )
    for row in rows:
        print(f"{row[0]}. {row[1]:<12} cumulative {float(row[3]):8.4f} bits")
    return EXIT_OK


def cmd_canny(args: argparse.Namespace, config: RunConfig) -> int:
    edges = canny(load_image(args.image), sigma=args.sigma, low=args.low, high=args.high)
    out = Path(args.output) if args.output else _out_dir(config) / (Path(args.image).stem + "_canny.pbm")
    save_image(edges, out)
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--scheme-bins", type=int, dest="hidden_bins", help="uniform bins per hidden neuron")
    common.add_argument("--temperature", type=float, help="kelvin")
    common.add_argument("--out-dir", dest="out_dir")

    p = argparse.ArgumentParser(prog="landauer-ann", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", parents=[common], help="train the 9-12-1 edge detector")
    t.add_argument("--manifest", help="CSV manifest, or 'sample' for the bundled images")
    t.add_argument("--synthetic", help="train on one synthetic 8x8 preset instead")
    t.add_argument("--epochs", type=int, dest="max_epochs")
    t.add_argument("--patience", type=int)
    t.add_argument("--batch-size", type=int, dest="batch_size")
    t.add_argument("--lr", type=float)
    t.set_defaults(func=cmd_train)

    a = sub.add_parser("analyze", parents=[common], help="dissipation ledger for a checkpoint")
    a.add_argument("--checkpoint", required=True)
    a.add_argument("--manifest")
    a.add_argument("--synthetic")
    a.add_argument("--image", help="analysis image for the task-level bound (default: training set)")
    a.add_argument("--gt", help="ground-truth edge map for --image")
    a.add_argument("--epochs", type=int, help="number of leading epochs in the ledger")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", parents=[common], help="ratios against vNp and CAP bounds")
    c.add_argument("--bits", type=float)
    c.add_argument("--report", help="report.json written by analyze")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", parents=[common], help="synthetic-structure experiment")
    s.add_argument("--presets", default=",".join(PRESETS), help="comma list; also gapN")
    s.add_argument("--epochs", type=int, dest="max_epochs")
    s.set_defaults(func=cmd_synth)

    k = sub.add_parser("canny", parents=[common], help="Canny baseline on a PGM/PBM image")
    k.add_argument("--image", required=True)
    k.add_argument("--output")
    k.add_argument("--sigma", type=float, default=1.0)
    k.add_argument("--low", type=float, default=0.1)
    k.add_argument("--high", type=float, default=0.2)
    k.set_defaults(func=cmd_canny)
    return p


_CONFIG_KEYS = ("seed", "hidden_bins", "temperature", "out_dir", "manifest", "max_epochs", "patience", "batch_size", "lr")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
        config = resolve_config(args.config, overrides)
        return args.func(args, config)
    except (ConfigError, ContractError, QuantizationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, NetpbmError, CheckpointError, DeterminismError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
