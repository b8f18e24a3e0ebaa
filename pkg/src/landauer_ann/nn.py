"""A fixed-topology 9-12-1 perceptron: ReLU hidden layer, sigmoid output,
MSE loss, hand-derived backpropagation and Adam.

Everything runs in float64 on numpy and is deterministic given a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import DataError, Image, PatchDataset, interior_windows

PARAM_NAMES = ("w1", "b1", "w2", "b2")


class ContractError(ValueError):
    """Shape or precondition violation on network inputs."""


@dataclass(frozen=True)
class NetworkTopology:
    input_size: int = 9
    hidden_size: int = 12
    output_size: int = 1

    def __post_init__(self) -> None:
        for name in ("input_size", "hidden_size", "output_size"):
            if int(getattr(self, name)) < 1:
                raise ContractError(f"{name} must be >= 1")


@dataclass
class Mlp:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self) -> None:
        for name in PARAM_NAMES:
            setattr(self, name, np.array(getattr(self, name), dtype=np.float64))
        h, i = self.w1.shape
        o, h2 = self.w2.shape
        if h2 != h or self.b1.shape != (h,) or self.b2.shape != (o,):
            raise ContractError(
                f"inconsistent parameter shapes w1{self.w1.shape} b1{self.b1.shape} "
                f"w2{self.w2.shape} b2{self.b2.shape}"
            )

    @classmethod
    def zeros(cls, topology: NetworkTopology | None = None) -> Mlp:
        t = topology or NetworkTopology()
        return cls(
            np.zeros((t.hidden_size, t.input_size)),
            np.zeros(t.hidden_size),
            np.zeros((t.output_size, t.hidden_size)),
            np.zeros(t.output_size),
        )

    @property
    def topology(self) -> NetworkTopology:
        return NetworkTopology(self.w1.shape[1], self.w1.shape[0], self.w2.shape[0])

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> Mlp:
        return Mlp(*(getattr(self, name).copy() for name in PARAM_NAMES))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params().values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mlp):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in PARAM_NAMES)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ForwardTrace:
    input: np.ndarray
    hidden_pre: np.ndarray
    hidden_post: np.ndarray
    output_pre: np.ndarray
    output: np.ndarray


@dataclass
class Gradients:
    dw1: np.ndarray
    db1: np.ndarray
    dw2: np.ndarray
    db2: np.ndarray

    def by_param(self) -> dict[str, np.ndarray]:
        return {"w1": self.dw1, "b1": self.db1, "w2": self.dw2, "b2": self.db2}


def relu(z):
    return np.maximum(0.0, z) if isinstance(z, np.ndarray) else max(0.0, float(z))


def sigmoid(z):
    """Logistic function, computed without overflow for large |z|."""
    if not isinstance(z, np.ndarray):
        z = float(z)
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def he_init(topology: NetworkTopology | None = None, seed: int = 0) -> Mlp:
    """Gaussian He initialisation (variance 2/fan_in) with zero biases."""
    t = topology or NetworkTopology()
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    w1 = rng.normal(0.0, math.sqrt(2.0 / t.input_size), size=(t.hidden_size, t.input_size))
    w2 = rng.normal(0.0, math.sqrt(2.0 / t.hidden_size), size=(t.output_size, t.hidden_size))
    return Mlp(w1, np.zeros(t.hidden_size), w2, np.zeros(t.output_size))


def _check_inputs(net: Mlp, x: np.ndarray) -> None:
    if x.shape[-1] != net.w1.shape[1]:
        raise ContractError(f"expected {net.w1.shape[1]} inputs, got {x.shape[-1]}")


def forward(net: Mlp, patch) -> ForwardTrace:
    x = np.asarray(patch, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError(f"forward takes one flattened patch, got shape {x.shape}")
    _check_inputs(net, x)
    hidden_pre = net.w1 @ x + net.b1
    hidden_post = relu(hidden_pre)
    output_pre = net.w2 @ hidden_post + net.b2
    return ForwardTrace(x, hidden_pre, hidden_post, output_pre, sigmoid(output_pre))


def forward_batch(net: Mlp, patches) -> ForwardTrace:
    """Row-wise forward pass; every trace field gains a leading sample axis."""
    x = np.asarray(patches, dtype=np.float64)
    if x.ndim != 2:
        raise ContractError(f"forward_batch takes an (n, inputs) array, got shape {x.shape}")
    _check_inputs(net, x)
    hidden_pre = x @ net.w1.T + net.b1
    hidden_post = relu(hidden_pre)
    output_pre = hidden_post @ net.w2.T + net.b2
    return ForwardTrace(x, hidden_pre, hidden_post, output_pre, sigmoid(output_pre))


def mse_loss(pred, target) -> float:
    """Squared error for one prediction; for arrays, the mean over all entries."""
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    return float(np.mean(diff**2))


def backward(net: Mlp, trace: ForwardTrace, target) -> Gradients:
    """Exact gradients of ``mse_loss(trace.output, target)`` for a single sample."""
    out = trace.output
    t = np.broadcast_to(np.asarray(target, dtype=np.float64), out.shape)
    d_out = 2.0 * (out - t) / out.size * out * (1.0 - out)
    d_hidden = (net.w2.T @ d_out) * (trace.hidden_pre > 0)
    return Gradients(
        dw1=np.outer(d_hidden, trace.input),
        db1=d_hidden,
        dw2=np.outer(d_out, trace.hidden_post),
        db2=d_out,
    )


def batch_gradients(net: Mlp, patches, targets) -> tuple[Gradients, float]:
    """Mean per-sample gradients and mean loss over a batch."""
    tr = forward_batch(net, patches)
    n, o = tr.output.shape
    t = np.asarray(targets, dtype=np.float64).reshape(n, -1)
    err = tr.output - t
    loss = float(np.mean(err**2))
    d_out = 2.0 * err / (o * n) * tr.output * (1.0 - tr.output)
    d_hidden = (d_out @ net.w2) * (tr.hidden_pre > 0)
    grads = Gradients(
        dw1=d_hidden.T @ tr.input,
        db1=d_hidden.sum(axis=0),
        dw2=d_out.T @ tr.hidden_post,
        db2=d_out.sum(axis=0),
    )
    return grads, loss


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ContractError("step counter must be non-negative")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ContractError("beta1 and beta2 must lie in [0, 1)")

    def copy(self) -> AdamState:
        return AdamState(
            self.lr, self.beta1, self.beta2, self.epsilon, self.t,
            {k: a.copy() for k, a in self.m.items()},
            {k: a.copy() for k, a in self.v.items()},
        )


def adam_step(state: AdamState, net: Mlp, grads: Gradients) -> tuple[AdamState, Mlp]:
    """One bias-corrected Adam update, applied to ``net`` and ``state`` in place."""
    state.t += 1
    c1 = 1.0 - state.beta1**state.t
    c2 = 1.0 - state.beta2**state.t
    for name, g in grads.by_param().items():
        p = getattr(net, name)
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m = state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return state, net


def epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    """Generator for one epoch's shuffle, reproducible from (seed, epoch) alone."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(epoch)]))


def train_epoch(
    net: Mlp,
    optimizer: AdamState,
    dataset: PatchDataset,
    batch_size: int = 128,
    seed: int = 0,
    epoch: int = 0,
) -> float:
    """Shuffle, then one Adam step per mini-batch. Returns the pass's mean sample MSE."""
    n = len(dataset)
    if n == 0:
        raise DataError("cannot train on an empty dataset")
    if batch_size < 1:
        raise ContractError("batch_size must be >= 1")
    order = epoch_rng(seed, epoch).permutation(n)
    total = 0.0
    for start in range(0, n, batch_size):
        idx = order[start : start + batch_size]
        grads, loss = batch_gradients(net, dataset.patches[idx], dataset.labels[idx])
        total += loss * len(idx)
        adam_step(optimizer, net, grads)
        if not net.is_finite():
            raise FloatingPointError(f"non-finite parameters after step {optimizer.t}")
    return total / n


def evaluate_mse(net: Mlp, dataset: PatchDataset) -> float:
    if len(dataset) == 0:
        raise DataError("cannot evaluate on an empty dataset")
    out = forward_batch(net, dataset.patches).output
    return mse_loss(out, dataset.labels.reshape(-1, 1))


@dataclass
class EpochRecord:
    epoch: int
    train_mse: float
    val_mse: float
    snapshot: Mlp


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    early_stopped: bool = False

    @property
    def snapshots(self) -> list[Mlp]:
        return [r.snapshot for r in self.records]

    @property
    def best_net(self) -> Mlp:
        """Snapshot at the lowest validation error; what early stopping keeps."""
        return self.records[self.best_epoch - 1].snapshot

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrainingHistory):
            return NotImplemented
        return (
            (self.stopped_epoch, self.best_epoch, self.early_stopped)
            == (other.stopped_epoch, other.best_epoch, other.early_stopped)
            and self.records == other.records
        )


def fit(
    net: Mlp,
    train: PatchDataset,
    val: PatchDataset,
    max_epochs: int = 100,
    patience: int = 5,
    optimizer: AdamState | None = None,
    batch_size: int = 128,
    seed: int = 0,
) -> TrainingHistory:
    """Train a copy of ``net`` with early stopping on validation MSE.

    An epoch counts as an improvement only if its val MSE is strictly below
    the best so far; training stops after ``patience`` epochs without one.
    """
    if len(train) == 0 or len(val) == 0:
        raise DataError("train and val sets must be non-empty")
    if patience < 1:
        raise ContractError("patience must be >= 1")
    net = net.copy()
    optimizer = optimizer if optimizer is not None else AdamState()
    history = TrainingHistory()
    best = math.inf
    stale = 0
    for epoch in range(1, max_epochs + 1):
        train_mse = train_epoch(net, optimizer, train, batch_size, seed, epoch)
        val_mse = evaluate_mse(net, val)
        history.records.append(EpochRecord(epoch, train_mse, val_mse, net.copy()))
        history.stopped_epoch = epoch
        if val_mse < best:
            best, stale = val_mse, 0
            history.best_epoch = epoch
        else:
            stale += 1
            if stale >= patience:
                history.early_stopped = True
                break
    return history


def predict_edge_map(net: Mlp, image: Image, threshold: float = 0.5) -> Image:
    """Slide the net over every interior 3x3 window; borders are left at 0."""
    if image.height < 3 or image.width < 3:
        raise DataError(f"image must be at least 3x3, got {image.height}x{image.width}")
    out = forward_batch(net, interior_windows(image.pixels)).output[:, 0]
    edges = np.zeros(image.shape)
    edges[1:-1, 1:-1] = (out >= threshold).reshape(image.height - 2, image.width - 2)
    return Image(edges)
