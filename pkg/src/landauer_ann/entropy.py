"""Discretisation of layer states and plug-in Shannon entropies (in bits).

Entropies are raw empirical (plug-in) estimates with no bias correction.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Hashable, Iterable

import numpy as np

IDENTITY = "identity"
THRESHOLD = "binary-threshold"
UNIFORM = "uniform-bins"
KINDS = (IDENTITY, THRESHOLD, UNIFORM)

OBSERVED = "observed"
FIXED = "fixed"

K_B = 1.380649e-23  # J/K, exact SI value

StateSymbol = tuple[int, ...]


class QuantizationError(ValueError):
    pass


@dataclass(frozen=True)
class QuantizationScheme:
    """How one layer's real-valued vector becomes a tuple of bin indices.

    ``identity`` accepts only 0/1 entries; ``binary-threshold`` maps
    x >= threshold to 1; ``uniform-bins`` splits [lo, hi] (fixed) or each
    dimension's observed [min, max] into ``bins`` equal cells.
    """

    kind: str = UNIFORM
    bins: int = 16
    range_policy: str = OBSERVED
    lo: float = 0.0
    hi: float = 1.0
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise QuantizationError(f"unknown quantization kind {self.kind!r}")
        if self.kind == UNIFORM:
            if self.bins < 2:
                raise QuantizationError("uniform-bins needs at least 2 bins")
            if self.range_policy not in (OBSERVED, FIXED):
                raise QuantizationError(f"unknown range policy {self.range_policy!r}")
            if self.range_policy == FIXED and not self.lo < self.hi:
                raise QuantizationError("fixed range needs lo < hi")

    @classmethod
    def identity(cls) -> QuantizationScheme:
        return cls(kind=IDENTITY, bins=2)

    @classmethod
    def binary_threshold(cls, threshold: float = 0.5) -> QuantizationScheme:
        return cls(kind=THRESHOLD, bins=2, threshold=threshold)

    @classmethod
    def uniform(cls, bins: int = 16, lo: float | None = None, hi: float | None = None) -> QuantizationScheme:
        if lo is None and hi is None:
            return cls(kind=UNIFORM, bins=bins, range_policy=OBSERVED)
        return cls(kind=UNIFORM, bins=bins, range_policy=FIXED, lo=float(lo), hi=float(hi))

    def descriptor(self) -> str:
        if self.kind == IDENTITY:
            return "identity"
        if self.kind == THRESHOLD:
            return f"threshold({self.threshold:g})"
        if self.range_policy == OBSERVED:
            return f"uniform({self.bins},observed)"
        return f"uniform({self.bins},[{self.lo:g},{self.hi:g}])"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> QuantizationScheme:
        return cls(**d)


def observe_ranges(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension (min, max) over the rows of ``samples``."""
    samples = np.asarray(samples, dtype=np.float64)
    return samples.min(axis=0), samples.max(axis=0)


def quantize_batch(
    samples,
    scheme: QuantizationScheme,
    ranges: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Quantise each row of ``samples`` into integer bin indices.

    For the observed range policy, ``ranges`` defaults to the batch's own
    per-dimension min/max. A dimension whose range is empty falls into bin 0.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise QuantizationError(f"expected a 2-D sample array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise QuantizationError("cannot quantise non-finite values")
    if scheme.kind == IDENTITY:
        if not np.all((x == 0.0) | (x == 1.0)):
            raise QuantizationError("identity quantisation needs binary (0/1) values")
        return x.astype(np.int64)
    if scheme.kind == THRESHOLD:
        return (x >= scheme.threshold).astype(np.int64)

    if scheme.range_policy == FIXED:
        lo = np.full(x.shape[1], scheme.lo)
        hi = np.full(x.shape[1], scheme.hi)
    else:
        lo, hi = ranges if ranges is not None else observe_ranges(x)
        lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (x.shape[1],))
        hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (x.shape[1],))
    width = hi - lo
    live = width > 0
    scaled = np.zeros_like(x)
    scaled[:, live] = (x[:, live] - lo[live]) / width[live] * scheme.bins
    return np.clip(np.floor(scaled), 0, scheme.bins - 1).astype(np.int64)


def resolve_ranges(samples, scheme: QuantizationScheme) -> tuple[np.ndarray, np.ndarray] | None:
    """Per-dimension ranges an observed-range scheme would use on ``samples``."""
    if scheme.kind == UNIFORM and scheme.range_policy == OBSERVED:
        return observe_ranges(samples)
    return None


def dequantize(
    codes: np.ndarray,
    scheme: QuantizationScheme,
    ranges: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Representative value of each bin: the cell centre, or the code for 0/1 schemes.

    Degenerate (zero-width) dimensions reconstruct to their single observed value.
    """
    codes = np.asarray(codes, dtype=np.int64)
    if scheme.kind != UNIFORM:
        return codes.astype(np.float64)
    if scheme.range_policy == FIXED:
        lo = np.full(codes.shape[1], scheme.lo)
        hi = np.full(codes.shape[1], scheme.hi)
    else:
        if ranges is None:
            raise QuantizationError("observed-range dequantisation needs ranges")
        lo, hi = (np.asarray(r, dtype=np.float64) for r in ranges)
    width = (hi - lo) / scheme.bins
    return lo + (codes + 0.5) * width * (hi > lo)


def quantize(vector, scheme: QuantizationScheme, ranges=None) -> StateSymbol:
    """Quantise one vector; observed-range schemes need explicit ``ranges``."""
    x = np.asarray(vector, dtype=np.float64).reshape(1, -1)
    if scheme.kind == UNIFORM and scheme.range_policy == OBSERVED and ranges is None:
        raise QuantizationError("observed-range quantisation of a single vector needs ranges")
    return encode_symbol(quantize_batch(x, scheme, ranges)[0])


def encode_symbol(indices: Iterable[int]) -> StateSymbol:
    return tuple(int(i) for i in indices)


def decode_symbol(symbol: StateSymbol) -> list[int]:
    return list(symbol)


def symbol_str(symbol: Hashable) -> str:
    if isinstance(symbol, tuple):
        return "-".join(str(s) for s in symbol)
    return str(symbol)


@dataclass
class Distribution:
    """Sparse empirical counts over symbols."""

    counts: Counter = field(default_factory=Counter)

    @classmethod
    def from_symbols(cls, symbols: Iterable[Hashable]) -> Distribution:
        return cls(Counter(symbols))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, symbol: Hashable, count: int = 1) -> None:
        self.counts[symbol] += count

    def merge(self, other: Distribution) -> Distribution:
        return Distribution(self.counts + other.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def to_csv(self, header: dict[str, str] | None = None) -> str:
        buf = io.StringIO()
        for key, value in (header or {}).items():
            buf.write(f"# {key}: {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["symbol", "count"])
        for sym, n in sorted(self.counts.items(), key=lambda kv: symbol_str(kv[0])):
            w.writerow([symbol_str(sym), n])
        return buf.getvalue()


@dataclass
class JointDistribution:
    """Sparse counts over (x, y) symbol pairs."""

    counts: Counter = field(default_factory=Counter)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Hashable, Hashable]]) -> JointDistribution:
        return cls(Counter(pairs))

    @classmethod
    def from_codes(cls, x_codes: np.ndarray, y_codes: np.ndarray) -> JointDistribution:
        """Count rows of two aligned integer code arrays."""
        x_codes = np.asarray(x_codes, dtype=np.int64)
        y_codes = np.asarray(y_codes, dtype=np.int64)
        if len(x_codes) != len(y_codes):
            raise ValueError("x and y code arrays differ in length")
        if len(x_codes) == 0:
            return cls()
        dx = x_codes.shape[1]
        rows, n = np.unique(np.hstack([x_codes, y_codes]), axis=0, return_counts=True)
        return cls(
            Counter({(encode_symbol(r[:dx]), encode_symbol(r[dx:])): int(c) for r, c in zip(rows, n)})
        )

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, x: Hashable, y: Hashable, count: int = 1) -> None:
        self.counts[(x, y)] += count

    def merge(self, other: JointDistribution) -> JointDistribution:
        return JointDistribution(self.counts + other.counts)

    def marginal_x(self) -> Distribution:
        out: Counter = Counter()
        for (x, _), n in self.counts.items():
            out[x] += n
        return Distribution(out)

    def marginal_y(self) -> Distribution:
        out: Counter = Counter()
        for (_, y), n in self.counts.items():
            out[y] += n
        return Distribution(out)


def _entropy_of_counts(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        raise ValueError("entropy of an empty distribution is undefined")
    return max(0.0, -math.fsum(c / total * math.log2(c / total) for c in counts))


def entropy(dist: Distribution) -> float:
    """Shannon entropy in bits."""
    return _entropy_of_counts(dist.counts.values())


def joint_entropy(joint: JointDistribution) -> float:
    return _entropy_of_counts(joint.counts.values())


def conditional_entropy(joint: JointDistribution) -> float:
    """H(X|Y) = H(X,Y) - H(Y) in bits."""
    return max(0.0, joint_entropy(joint) - entropy(joint.marginal_y()))


@dataclass(frozen=True)
class PhysicalConstants:
    k_B: float = K_B
    temperature: float = 300.0

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @property
    def joules_per_bit(self) -> float:
        return self.k_B * self.temperature * math.log(2.0)


def landauer_energy(bits: float, constants: PhysicalConstants | None = None) -> float:
    """Minimum heat, in joules, for irreversibly erasing ``bits`` of information."""
    if bits < 0:
        raise ValueError("information loss cannot be negative")
    return bits * (constants or PhysicalConstants()).joules_per_bit
