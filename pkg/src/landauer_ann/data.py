"""Images, 3x3 patch datasets, train/val splitting and synthetic 8x8 patterns."""

from __future__ import annotations

import csv
import itertools
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .netpbm import encode_pbm, encode_pgm, read_netpbm

PATCH = 3
SYNTH_SIZE = 8
PRESETS = ("merged", "separated", "random1", "random2", "random3")


class DataError(ValueError):
    """Invalid or inconsistent input data."""


@dataclass(frozen=True)
class Image:
    """Gray-scale image with intensities in [0, 1]; ``pixels`` has shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.pixels, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise DataError(f"image must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise DataError("pixel values must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def is_binary(self) -> bool:
        return bool(np.all((self.pixels == 0.0) | (self.pixels == 1.0)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None  # type: ignore[assignment]


def load_image(path: str | os.PathLike) -> Image:
    """Read a PGM (P2/P5) or PBM (P1/P4) file; PBM 1-bits (black) become 0.0."""
    return Image(read_netpbm(path))


def save_image(image: Image, path: str | os.PathLike, binary: bool = True) -> None:
    """Write ``image`` as PBM when the suffix is ``.pbm``, otherwise as PGM."""
    path = Path(path)
    if path.suffix.lower() == ".pbm":
        payload = encode_pbm(image.pixels, binary=binary)
    else:
        payload = encode_pgm(image.pixels, binary=binary)
    path.write_bytes(payload)


@dataclass
class PatchDataset:
    """Flattened 3x3 windows, binary centre labels, and (image id, row, col) provenance."""

    patches: np.ndarray
    labels: np.ndarray
    image_ids: list[str] = field(default_factory=list)
    rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    cols: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        self.patches = np.asarray(self.patches, dtype=np.float64).reshape(-1, PATCH * PATCH)
        self.labels = np.asarray(self.labels, dtype=np.float64).reshape(-1)
        n = len(self.patches)
        if len(self.labels) != n:
            raise DataError(f"{n} patches but {len(self.labels)} labels")
        if not self.image_ids:
            self.image_ids = [""] * n
            self.rows = np.zeros(n, dtype=np.int64)
            self.cols = np.zeros(n, dtype=np.int64)
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        if not (len(self.image_ids) == len(self.rows) == len(self.cols) == n):
            raise DataError("provenance length does not match patch count")

    def __len__(self) -> int:
        return len(self.patches)

    def window(self, i: int) -> np.ndarray:
        return self.patches[i].reshape(PATCH, PATCH)

    @property
    def provenance(self) -> list[tuple[str, int, int]]:
        return [(img, int(r), int(c)) for img, r, c in zip(self.image_ids, self.rows, self.cols)]

    def ids(self) -> set[str]:
        return set(self.image_ids)

    @classmethod
    def concat(cls, parts: Sequence[PatchDataset]) -> PatchDataset:
        if not parts:
            raise DataError("nothing to concatenate")
        return cls(
            patches=np.concatenate([p.patches for p in parts]),
            labels=np.concatenate([p.labels for p in parts]),
            image_ids=[i for p in parts for i in p.image_ids],
            rows=np.concatenate([p.rows for p in parts]),
            cols=np.concatenate([p.cols for p in parts]),
        )


def interior_windows(pixels: np.ndarray) -> np.ndarray:
    """All 3x3 windows centred on interior pixels, row-major, shape ((h-2)*(w-2), 9)."""
    h, w = pixels.shape
    if h < PATCH or w < PATCH:
        raise DataError(f"image must be at least 3x3, got {h}x{w}")
    win = np.lib.stride_tricks.sliding_window_view(pixels, (PATCH, PATCH))
    return win.reshape(-1, PATCH * PATCH).copy()


def extract_patches(image: Image, ground_truth: Image, image_id: str = "") -> PatchDataset:
    """One sample per interior pixel, labelled by the ground truth at the window centre."""
    if image.shape != ground_truth.shape:
        raise DataError(f"image {image.shape} and ground truth {ground_truth.shape} differ in size")
    patches = interior_windows(image.pixels)
    h, w = image.shape
    rows, cols = np.meshgrid(np.arange(1, h - 1), np.arange(1, w - 1), indexing="ij")
    labels = (ground_truth.pixels[1:-1, 1:-1] >= 0.5).astype(np.float64).ravel()
    return PatchDataset(
        patches=patches,
        labels=labels,
        image_ids=[image_id] * len(patches),
        rows=rows.ravel(),
        cols=cols.ravel(),
    )


def split_by_image(
    datasets: Sequence[tuple[str, PatchDataset]],
    train_count: int = 16,
    val_count: int = 4,
    seed: int = 0,
) -> tuple[PatchDataset, PatchDataset]:
    """Split whole images into train/val sets.

    With ``train_count + val_count`` images the split is exact; any other
    number of images keeps the val fraction (rounded, at least one image).
    """
    n = len(datasets)
    if n < val_count or n < 2:
        raise DataError(f"need at least {max(val_count, 2)} images to split, got {n}")
    ids = [image_id for image_id, _ in datasets]
    if len(set(ids)) != n:
        raise DataError("image ids must be unique")
    if n == train_count + val_count:
        n_val = val_count
    else:
        n_val = max(1, round(n * val_count / (train_count + val_count)))
        n_val = min(n_val, n - 1)
    order = np.random.default_rng(_u64(seed)).permutation(n)
    val_idx = set(order[:n_val].tolist())
    train = [d for i, (_, d) in enumerate(datasets) if i not in val_idx]
    val = [d for i, (_, d) in enumerate(datasets) if i in val_idx]
    return PatchDataset.concat(train), PatchDataset.concat(val)


def _u64(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


# ---------------------------------------------------------------------------
# synthetic 64-pixel images


@dataclass(frozen=True)
class SyntheticPattern:
    """Four square blobs on an 8x8 white canvas.

    ``preset`` selects a named layout; ``squares`` (top-left corners) overrides
    it with an explicit placement.
    """

    preset: str | None = "merged"
    squares: tuple[tuple[int, int], ...] | None = None
    square_size: int = 2
    image_size: int = SYNTH_SIZE
    seed: int = 0
    max_attempts: int = 10_000

    def __post_init__(self) -> None:
        if self.squares is None and self.preset not in PRESETS:
            raise DataError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.square_size < 1 or self.image_size < self.square_size:
            raise DataError("square_size must fit inside the image")

    @property
    def name(self) -> str:
        if self.squares is not None:
            return "custom:" + ";".join(f"{r},{c}" for r, c in self.squares)
        return str(self.preset)


def spread_pattern(gap: int, square_size: int = 2, image_size: int = SYNTH_SIZE) -> SyntheticPattern:
    """Four squares on a centred 2x2 grid with ``gap`` white pixels between them.

    Increasing ``gap`` increases the mean pairwise separation; ``gap=0`` is the
    merged block.
    """
    span = 2 * square_size + gap
    if gap < 0 or span > image_size:
        raise DataError(f"gap {gap} does not fit in a {image_size}x{image_size} image")
    a = (image_size - span) // 2
    b = a + square_size + gap
    return SyntheticPattern(
        preset=None,
        squares=((a, a), (a, b), (b, a), (b, b)),
        square_size=square_size,
        image_size=image_size,
    )


def square_placements(pattern: SyntheticPattern) -> tuple[tuple[int, int], ...]:
    """Top-left corners of the pattern's squares."""
    s, n = pattern.square_size, pattern.image_size
    if pattern.squares is not None:
        placed = tuple((int(r), int(c)) for r, c in pattern.squares)
    elif pattern.preset == "merged":
        # one 2s x 2s block, i.e. four squares tiled together
        a = (n - 2 * s) // 2
        placed = ((a, a), (a, a + s), (a + s, a), (a + s, a + s))
    elif pattern.preset == "separated":
        lo, hi = 1, n - 1 - s
        placed = ((lo, lo), (lo, hi), (hi, lo), (hi, hi))
    else:
        index = PRESETS.index(pattern.preset) - 1  # random1 -> 1
        rng = np.random.default_rng([index, _u64(pattern.seed)])
        found: list[tuple[int, int]] = []
        for _ in range(pattern.max_attempts):
            r, c = (int(v) for v in rng.integers(0, n - s + 1, size=2))
            if all(abs(r - pr) >= s or abs(c - pc) >= s for pr, pc in found):
                found.append((r, c))
                if len(found) == 4:
                    break
        if len(found) < 4:
            raise DataError(f"could not place four squares after {pattern.max_attempts} attempts")
        placed = tuple(found)
    for r, c in placed:
        if not (0 <= r <= n - s and 0 <= c <= n - s):
            raise DataError(f"square at ({r}, {c}) lies outside the {n}x{n} image")
    for (r1, c1), (r2, c2) in itertools.combinations(placed, 2):
        if abs(r1 - r2) < s and abs(c1 - c2) < s:
            raise DataError(f"squares at ({r1}, {c1}) and ({r2}, {c2}) overlap")
    return placed


def mean_pairwise_separation(pattern: SyntheticPattern) -> float:
    """Mean Euclidean distance between square corners."""
    placed = square_placements(pattern)
    return float(np.mean([math.dist(a, b) for a, b in itertools.combinations(placed, 2)]))


def generate_synthetic(pattern: SyntheticPattern) -> tuple[Image, Image]:
    """Render the pattern (black squares = 0.0 on white 1.0) and its edge map."""
    n, s = pattern.image_size, pattern.square_size
    pixels = np.ones((n, n))
    for r, c in square_placements(pattern):
        pixels[r : r + s, c : c + s] = 0.0
    image = Image(pixels)
    return image, synthetic_ground_truth(image)


def synthetic_ground_truth(binary: Image) -> Image:
    """Black pixels with a white 4-neighbour, or on the image border, are edges (1.0)."""
    if not binary.is_binary():
        raise DataError("ground truth needs a binary image")
    black = binary.pixels == 0.0
    # outside the image counts as white
    padded = np.pad(~black, 1, constant_values=True)
    white_nb = padded[:-2, 1:-1] | padded[2:, 1:-1] | padded[1:-1, :-2] | padded[1:-1, 2:]
    return Image((black & white_nb).astype(np.float64))


def synthetic_dataset(pattern: SyntheticPattern) -> PatchDataset:
    image, truth = generate_synthetic(pattern)
    return extract_patches(image, truth, image_id=pattern.name)


# ---------------------------------------------------------------------------
# manifests


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    path: Path
    gt_path: Path
    role: str = ""


def read_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Read a CSV manifest with columns ``image_id,path,gt_path[,role]``.

    Relative paths resolve against the manifest's directory; ``role`` is
    ``train``, ``val`` or empty.
    """
    path = Path(path)
    base = path.parent
    entries = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        missing = {"image_id", "path", "gt_path"} - set(reader.fieldnames or ())
        if missing:
            raise DataError(f"manifest {path} lacks columns {sorted(missing)}")
        for row in reader:
            role = (row.get("role") or "").strip()
            if role not in ("", "train", "val"):
                raise DataError(f"manifest row {row['image_id']!r}: unknown role {role!r}")
            entries.append(
                ManifestEntry(row["image_id"], base / row["path"], base / row["gt_path"], role)
            )
    return entries


def write_manifest(entries: Sequence[ManifestEntry], path: str | os.PathLike) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image_id", "path", "gt_path", "role"])
        for e in entries:
            writer.writerow([e.image_id, _relative(e.path, path.parent), _relative(e.gt_path, path.parent), e.role])


def _relative(p: Path, base: Path) -> str:
    try:
        return str(Path(p).resolve().relative_to(base.resolve()))
    except ValueError:
        return str(p)


def load_manifest_datasets(entries: Sequence[ManifestEntry]) -> list[tuple[ManifestEntry, PatchDataset]]:
    out = []
    for e in entries:
        out.append((e, extract_patches(load_image(e.path), load_image(e.gt_path), e.image_id)))
    return out
