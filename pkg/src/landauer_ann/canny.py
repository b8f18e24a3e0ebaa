"""Classical Canny edge detector (blur, Sobel, NMS, double threshold, hysteresis)."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .data import DataError, Image

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

# neighbour offsets (drow, dcol) along each quantised gradient direction
_STEP = {0: (0, 1), 45: (1, 1), 90: (1, 0), 135: (1, -1)}


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray  # degrees, one of 0/45/90/135


def _pixels(image) -> np.ndarray:
    return image.pixels if isinstance(image, Image) else np.asarray(image, dtype=np.float64)


def gaussian_kernel(sigma: float, truncate: float = 3.0) -> np.ndarray:
    """Normalised 1-D Gaussian with radius ceil(truncate * sigma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not truncate > 0:
        raise ValueError(f"truncate must be positive, got {truncate}")
    r = math.ceil(truncate * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2 * sigma**2))
    return k / k.sum()


def _convolve_rows(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    r = len(k) // 2
    padded = np.pad(a, ((0, 0), (r, r)), mode="reflect")
    out = np.zeros_like(a)
    for i, w in enumerate(k):
        out += w * padded[:, i : i + a.shape[1]]
    return out


def gaussian_blur(image, sigma: float, truncate: float = 3.0):
    """Separable Gaussian blur with radius ceil(truncate*sigma) and reflected borders.

    Returns the same type it was given (``Image`` or array).
    """
    a = _pixels(image)
    k = gaussian_kernel(sigma, truncate)
    out = _convolve_rows(_convolve_rows(a, k).T, k).T
    return Image(np.clip(out, 0.0, 1.0)) if isinstance(image, Image) else out


def _sobel_x(a: np.ndarray) -> np.ndarray:
    """Correlation with SOBEL_X, as [1,2,1] smoothing down columns then a central difference.

    Both halves of the difference are summed in the same order, so flat regions give exactly 0.
    """
    p = np.pad(a, 1, mode="reflect")
    s = p[:-2, :] + 2.0 * p[1:-1, :] + p[2:, :]
    return s[:, 2:] - s[:, :-2]


def quantize_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    return (np.rint(angle / 45.0).astype(np.int64) % 4) * 45


def sobel_gradients(image) -> GradientField:
    a = _pixels(image)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise DataError(f"Sobel needs at least a 3x3 image, got {a.shape}")
    gx = _sobel_x(a)
    gy = _sobel_x(a.T).T
    return GradientField(gx, gy, np.hypot(gx, gy), quantize_direction(gx, gy))


def non_maximum_suppression(field: GradientField) -> np.ndarray:
    """Keep magnitudes that peak along their gradient direction; zero the border.

    Ties are broken towards the lower-index neighbour so a symmetric ridge two
    pixels wide thins to one pixel.
    """
    mag = field.magnitude
    h, w = mag.shape
    out = np.zeros_like(mag)
    if h < 3 or w < 3:
        return out
    centre = mag[1:-1, 1:-1]
    keep = np.zeros(centre.shape, dtype=bool)
    for angle, (dr, dc) in _STEP.items():
        ahead = mag[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        behind = mag[1 - dr : h - 1 - dr, 1 - dc : w - 1 - dc]
        sel = field.direction[1:-1, 1:-1] == angle
        keep |= sel & (centre > behind) & (centre >= ahead)
    out[1:-1, 1:-1] = np.where(keep, centre, 0.0)
    return out


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Strong pixels plus weak pixels 8-connected to them through weak pixels."""
    h, w = strong.shape
    edges = strong.copy()
    queue = deque(zip(*np.nonzero(strong)))
    while queue:
        r, c = queue.popleft()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and weak[rr, cc] and not edges[rr, cc]:
                    edges[rr, cc] = True
                    queue.append((rr, cc))
    return edges


def canny(image, sigma: float = 1.0, low: float = 0.1, high: float = 0.2) -> Image:
    """Binary Canny edge map; ``low``/``high`` are fractions of the peak gradient."""
    if not 0 < low < high:
        raise ValueError(f"thresholds must satisfy 0 < low < high, got low={low}, high={high}")
    field = sobel_gradients(gaussian_blur(_pixels(image), sigma))
    nms = non_maximum_suppression(field)
    peak = field.magnitude.max()
    if peak <= 0:
        return Image(np.zeros(field.magnitude.shape))
    weak = (nms > 0) & (nms >= low * peak)
    strong = nms >= high * peak
    return Image(hysteresis(strong, weak).astype(np.float64))
