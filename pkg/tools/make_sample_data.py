"""Regenerate the bundled sample images (small gray-scale scenes + edge maps).

    python tools/make_sample_data.py src/landauer_ann/sample_data
"""

import sys
from pathlib import Path

import numpy as np

from landauer_ann.data import Image, ManifestEntry, save_image, synthetic_ground_truth, write_manifest

SIZE = 24


def scene(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[:SIZE, :SIZE]
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    for _ in range(rng.integers(1, 4)):
        if rng.random() < 0.5:
            r, c = rng.integers(2, SIZE - 10, size=2)
            h, w = rng.integers(4, 9, size=2)
            mask[r : r + h, c : c + w] = True
        else:
            cy, cx = rng.integers(6, SIZE - 6, size=2)
            mask |= (yy - cy) ** 2 + (xx - cx) ** 2 <= rng.integers(9, 26)
    fg, bg = sorted(rng.uniform(0.1, 0.9, size=2))
    gray = np.where(mask, fg, bg) + rng.normal(0, 0.03, size=mask.shape)
    return np.clip(np.rint(gray * 255) / 255, 0, 1), mask


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)
    entries = []
    for i in range(5):
        gray, mask = scene(rng)
        edges = synthetic_ground_truth(Image(np.where(mask, 0.0, 1.0)))
        img_path, gt_path = out / f"scene{i}.pgm", out / f"scene{i}_gt.pbm"
        save_image(Image(gray), img_path)
        save_image(edges, gt_path)
        entries.append(ManifestEntry(f"scene{i}", img_path, gt_path))
    write_manifest(entries, out / "manifest.csv")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "src/landauer_ann/sample_data"))
