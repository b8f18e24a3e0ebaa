"""End-to-end pipelines shared by the command line and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .checkpoint import Checkpoint
from .config import VERSION, RunConfig
from .data import (
    DataError,
    PatchDataset,
    SyntheticPattern,
    load_manifest_datasets,
    mean_pairwise_separation,
    read_manifest,
    spread_pattern,
    split_by_image,
    synthetic_dataset,
)
from .dissipation import (
    ACCOUNTING_NOTE,
    AnalysisSchemes,
    DissipationLedger,
    TransitionRecord,
    epoch_ledger,
    inference_records,
)
from .entropy import landauer_energy
from .nn import fit, he_init

# Reference value for the trained edge detector's inference bound, in bits.
PUBLISHED_ANN_BITS = 2.0574


def report_header(config: RunConfig, scheme: str) -> dict[str, str]:
    return {
        "artifact_version": VERSION,
        "config_hash": config.config_hash(),
        "seed": str(config.seed),
        "scheme": scheme,
        "accounting": ACCOUNTING_NOTE,
    }


def train_on(config: RunConfig, train: PatchDataset, val: PatchDataset) -> Checkpoint:
    net = he_init(config.topology(), config.seed)
    history = fit(
        net, train, val,
        max_epochs=config.max_epochs,
        patience=config.patience,
        optimizer=config.optimizer(),
        batch_size=config.batch_size,
        seed=config.seed,
    )
    return Checkpoint(
        history.best_net, history, config.seed, config.experiment_dict(),
        sorted(train.ids()), sorted(val.ids()),
    )


def manifest_splits(config: RunConfig, manifest: str | Path) -> tuple[PatchDataset, PatchDataset]:
    """Train/val sets from a manifest: explicit roles if every row has one, else a seeded split."""
    entries = read_manifest(manifest)
    if len(entries) < 2:
        raise DataError(f"manifest {manifest} lists {len(entries)} image(s); need at least 2")
    loaded = load_manifest_datasets(entries)
    if all(e.role for e in entries):
        train = [d for e, d in loaded if e.role == "train"]
        val = [d for e, d in loaded if e.role == "val"]
        if not train or not val:
            raise DataError("manifest roles must include at least one train and one val image")
        return PatchDataset.concat(train), PatchDataset.concat(val)
    return split_by_image(
        [(e.image_id, d) for e, d in loaded], config.train_count, config.val_count, config.seed
    )


def train_from_manifest(config: RunConfig, manifest: str | Path) -> tuple[Checkpoint, PatchDataset]:
    train, val = manifest_splits(config, manifest)
    return train_on(config, train, val), train


@dataclass
class Analysis:
    ledger: DissipationLedger
    task_records: tuple[TransitionRecord, TransitionRecord]
    schemes: AnalysisSchemes

    @property
    def task_bits(self) -> float:
        return self.task_records[0].h_x_given_y + self.task_records[1].h_x_given_y

    @property
    def training_bits(self) -> float:
        return self.ledger.cumulative_bits

    @property
    def training_to_task_ratio(self) -> float:
        return self.training_bits / self.task_bits if self.task_bits > 0 else float("inf")


def analyze(
    ckpt: Checkpoint,
    training_set: PatchDataset,
    config: RunConfig,
    analysis_set: PatchDataset | None = None,
    n_epochs: int | None = None,
) -> Analysis:
    """Training ledger over the first epochs plus the early-stopped net's task bound."""
    analysis_set = analysis_set if analysis_set is not None else training_set
    schemes = config.schemes(binary_inputs=_binary(training_set) and _binary(analysis_set))
    ledger = epoch_ledger(ckpt.history, training_set, schemes, n_epochs or config.ledger_epochs)
    return Analysis(ledger, inference_records(ckpt.net, analysis_set, schemes), schemes)


def _binary(ds: PatchDataset) -> bool:
    return bool(((ds.patches == 0.0) | (ds.patches == 1.0)).all())


def analysis_report(analysis: Analysis, config: RunConfig) -> dict:
    consts = config.constants()
    return {
        **report_header(config, analysis.schemes.descriptor()),
        "config": config.to_dict(),
        "schemes": analysis.schemes.to_dict(),
        "temperature_kelvin": consts.temperature,
        "joules_per_bit": consts.joules_per_bit,
        "task_bits": analysis.task_bits,
        "task_joules": landauer_energy(analysis.task_bits, consts),
        "task_records": [_record_dict(r) for r in analysis.task_records],
        "training_cumulative_bits": analysis.training_bits,
        "training_cumulative_joules": landauer_energy(analysis.training_bits, consts),
        "training_epochs": len(analysis.ledger.entries),
        "training_to_task_ratio": analysis.training_to_task_ratio,
        "reference_ann_bits": PUBLISHED_ANN_BITS,
        "ledger": analysis.ledger.to_dict(),
    }


def _record_dict(r: TransitionRecord) -> dict:
    return {
        "transition": r.transition.value,
        "h_x_bits": r.h_x,
        "h_y_bits": r.h_y,
        "h_x_given_y_bits": r.h_x_given_y,
        "sample_count": r.sample_count,
        "scheme": r.scheme,
    }


# ---------------------------------------------------------------------------
# synthetic-structure experiment


def parse_pattern(name: str, seed: int = 0) -> SyntheticPattern:
    """``merged``, ``separated``, ``random1..3`` or ``gapN`` (four squares N pixels apart)."""
    if name.startswith("gap") and name[3:].isdigit():
        return spread_pattern(int(name[3:]))
    return SyntheticPattern(preset=name, seed=seed)


@dataclass
class SynthResult:
    name: str
    pattern: SyntheticPattern
    separation: float
    checkpoint: Checkpoint
    analysis: Analysis

    @property
    def cumulative_bits(self) -> float:
        return self.analysis.training_bits

    @property
    def task_bits(self) -> float:
        return self.analysis.task_bits


def run_synthetic(name: str, config: RunConfig) -> SynthResult:
    """Train on one synthetic image (it doubles as the validation set) and account for it."""
    pattern = parse_pattern(name, config.seed)
    dataset = synthetic_dataset(pattern)
    ckpt = train_on(config, dataset, dataset)
    return SynthResult(name, pattern, mean_pairwise_separation(pattern), ckpt, analyze(ckpt, dataset, config))


def run_synthetic_suite(names: Sequence[str], config: RunConfig) -> list[SynthResult]:
    """Every preset starts from the same initial weights and shuffle seeds."""
    if len(names) < 2:
        raise ValueError("the comparison needs at least two presets")
    return [run_synthetic(n, config) for n in names]


def ranked(results: Sequence[SynthResult]) -> list[SynthResult]:
    return sorted(results, key=lambda r: (r.cumulative_bits, r.name))
