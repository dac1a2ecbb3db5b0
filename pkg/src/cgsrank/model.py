"""The fixed conv + graph-aggregation regressor, trained with manual backprop.

Architecture, per node: the 2-feature row [degree, average neighbor degree]
is a 1-channel signal of length 2. Two 1D convolutions (1->16 and 16->32
channels, kernel 3, padding 1, stride 1, ReLU after each) produce a 32-channel
length-2 signal, average-pooled over the length axis into z in R^32. Two
graph layers then compute h' = ReLU(W . mean({h_v} union {h_u : u in N(v)}))
with widths 32->64 and 64->64 and no bias, and a scalar head gives
y_hat = w . h + b. Training is full-batch MSE under Adam.

Gradients are derived by hand for exactly this architecture; there is no
general autodiff here. The mean aggregation is shared across nodes, so the
backward pass routes each node's upstream gradient back through itself and
its neighbors (the aggregation matrix is symmetric up to the degree scaling).
"""
from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .centrality import CentralityScores
from .errors import NumericError, WeightFormatError
from .graph import Graph
from .validation import check_positive_int, check_scores

__all__ = [
    "ModelWeights",
    "Gradients",
    "TrainConfig",
    "AdamState",
    "init_weights",
    "encode",
    "sage_layer",
    "forward",
    "mse_loss",
    "backward",
    "adam_step",
    "init_adam_state",
    "train",
    "predict",
    "save_weights",
    "load_weights",
]

WEIGHTS_MAGIC = "cgsrank-weights"
WEIGHTS_FORMAT_VERSION = 1

# (field, shape); the fixed architecture's full parameter table
TENSOR_SHAPES = (
    ("conv1_kernel", (16, 1, 3)),
    ("conv1_bias", (16,)),
    ("conv2_kernel", (32, 16, 3)),
    ("conv2_bias", (32,)),
    ("sage1_W", (64, 32)),
    ("sage2_W", (64, 64)),
    ("head_w", (64,)),
    ("head_b", (1,)),
)


@dataclass(frozen=True)
class ModelWeights:
    """All learnable parameters, plus persisted feature-normalization stats.

    ``feature_min``/``feature_max`` are the per-column minima/maxima of the
    training features; they are None until :func:`train` sets them and are
    required by :func:`predict`.
    """

    conv1_kernel: np.ndarray
    conv1_bias: np.ndarray
    conv2_kernel: np.ndarray
    conv2_bias: np.ndarray
    sage1_W: np.ndarray
    sage2_W: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray
    feature_min: np.ndarray | None = None
    feature_max: np.ndarray | None = None

    def __post_init__(self):
        for name, shape in TENSOR_SHAPES:
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")


@dataclass(frozen=True)
class Gradients:
    """Loss gradients, field-for-field mirror of the weight tensors."""

    conv1_kernel: np.ndarray
    conv1_bias: np.ndarray
    conv2_kernel: np.ndarray
    conv2_bias: np.ndarray
    sage1_W: np.ndarray
    sage2_W: np.ndarray
    head_w: np.ndarray
    head_b: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow the pinned recipe."""

    learning_rate: float = 0.005
    epochs: int = 3000
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        check_positive_int(self.epochs, "epochs")


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: Gradients
    v: Gradients
    t: int = 0


def _tensor_names():
    return [name for name, _ in TENSOR_SHAPES]


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_weights(seed: int) -> ModelWeights:
    """Glorot-uniform weights, zero biases, deterministic in ``seed``.

    Draw order is fixed: conv1 kernel, conv2 kernel, sage1, sage2, head.
    Conv fans count kernel taps (fan_in = in_channels*3, fan_out =
    out_channels*3).
    """
    rng = np.random.default_rng(int(seed))
    return ModelWeights(
        conv1_kernel=_glorot(rng, (16, 1, 3), 1 * 3, 16 * 3),
        conv1_bias=np.zeros(16),
        conv2_kernel=_glorot(rng, (32, 16, 3), 16 * 3, 32 * 3),
        conv2_bias=np.zeros(32),
        sage1_W=_glorot(rng, (64, 32), 32, 64),
        sage2_W=_glorot(rng, (64, 64), 64, 64),
        head_w=_glorot(rng, (64,), 64, 1),
        head_b=np.zeros(1),
    )


def _check_features(features: np.ndarray) -> np.ndarray:
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"features must have shape (n, 2), got {arr.shape}")
    return arr


def _conv_pair(x0, x1, kernel, bias):
    """Length-2 conv with kernel 3, padding 1: (pre0, pre1) for both positions.

    With padded signal [0, x0, x1, 0], output position 0 sees taps (1, 2) and
    position 1 sees taps (0, 1).
    """
    pre0 = x0 @ kernel[:, :, 1].T + x1 @ kernel[:, :, 2].T + bias
    pre1 = x0 @ kernel[:, :, 0].T + x1 @ kernel[:, :, 1].T + bias
    return pre0, pre1


def encode(features: np.ndarray, w: ModelWeights) -> np.ndarray:
    """Per-node 32-vector: conv(1->16) -> ReLU -> conv(16->32) -> ReLU -> mean pool."""
    x = _check_features(features)
    x0 = x[:, :1]
    x1 = x[:, 1:]
    p10, p11 = _conv_pair(x0, x1, w.conv1_kernel, w.conv1_bias)
    a10, a11 = np.maximum(p10, 0.0), np.maximum(p11, 0.0)
    p20, p21 = _conv_pair(a10, a11, w.conv2_kernel, w.conv2_bias)
    a20, a21 = np.maximum(p20, 0.0), np.maximum(p21, 0.0)
    return 0.5 * (a20 + a21)


def _aggregate(g: Graph, h: np.ndarray) -> np.ndarray:
    """Row-wise mean over {h_v} union {h_u : u in N(v)}."""
    dinv = 1.0 / (1.0 + g.degrees.astype(np.float64))
    agg = h + (g.adjacency_csr() @ h if g.m else 0.0)
    return dinv[:, None] * agg


def _aggregate_back(g: Graph, grad: np.ndarray) -> np.ndarray:
    """Transpose of :func:`_aggregate` (A symmetric, degree scaling on rows)."""
    dinv = 1.0 / (1.0 + g.degrees.astype(np.float64))
    tmp = dinv[:, None] * grad
    return tmp + (g.adjacency_csr() @ tmp if g.m else 0.0)


def sage_layer(h: np.ndarray, g: Graph, W: np.ndarray) -> np.ndarray:
    """h'_v = ReLU(W . mean({h_v} union {h_u : u in N(v)})).

    The self embedding participates in the mean; an isolated node reduces to
    ReLU(W . h_v). No bias term.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != g.n:
        raise ValueError(f"h must have shape (n={g.n}, d), got {h.shape}")
    if W.ndim != 2 or W.shape[1] != h.shape[1]:
        raise ValueError(f"W shape {W.shape} incompatible with h shape {h.shape}")
    return np.maximum(_aggregate(g, h) @ W.T, 0.0)


def _forward_cache(g: Graph, features: np.ndarray, w: ModelWeights) -> dict:
    x = _check_features(features)
    if x.shape[0] != g.n:
        raise ValueError(f"features rows {x.shape[0]} != graph nodes {g.n}")
    x0, x1 = x[:, :1], x[:, 1:]
    p10, p11 = _conv_pair(x0, x1, w.conv1_kernel, w.conv1_bias)
    a10, a11 = np.maximum(p10, 0.0), np.maximum(p11, 0.0)
    p20, p21 = _conv_pair(a10, a11, w.conv2_kernel, w.conv2_bias)
    a20, a21 = np.maximum(p20, 0.0), np.maximum(p21, 0.0)
    z = 0.5 * (a20 + a21)
    m1 = _aggregate(g, z)
    s1 = m1 @ w.sage1_W.T
    h1 = np.maximum(s1, 0.0)
    m2 = _aggregate(g, h1)
    s2 = m2 @ w.sage2_W.T
    h2 = np.maximum(s2, 0.0)
    y = h2 @ w.head_w + w.head_b[0]
    return dict(
        x0=x0, x1=x1, p10=p10, p11=p11, a10=a10, a11=a11,
        p20=p20, p21=p21, a20=a20, a21=a21, z=z,
        m1=m1, s1=s1, h1=h1, m2=m2, s2=s2, h2=h2, y=y,
    )


def forward(g: Graph, features: np.ndarray, w: ModelWeights) -> np.ndarray:
    """Per-node predicted influence scores (length n)."""
    return _forward_cache(g, features, w)["y"]


def mse_loss(pred: np.ndarray, labels: np.ndarray) -> float:
    """(1/n) * sum((labels - pred)^2)."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if pred.shape != labels.shape:
        raise ValueError(f"length mismatch: pred {pred.shape} vs labels {labels.shape}")
    diff = pred - labels
    return float(diff @ diff / pred.shape[0])


def backward(g: Graph, features: np.ndarray, labels: np.ndarray, w: ModelWeights):
    """Loss and exact analytic gradients for every weight tensor.

    Returns
    -------
    (float, Gradients)
    """
    c = _forward_cache(g, features, w)
    labels = check_scores(labels, g.n, name="labels")
    n = g.n
    resid = c["y"] - labels
    loss = float(resid @ resid / n)
    dy = 2.0 * resid / n

    g_head_w = c["h2"].T @ dy
    g_head_b = np.array([dy.sum()])
    dh2 = np.outer(dy, w.head_w)
    ds2 = dh2 * (c["s2"] > 0)
    g_sage2 = ds2.T @ c["m2"]
    dh1 = _aggregate_back(g, ds2 @ w.sage2_W)
    ds1 = dh1 * (c["s1"] > 0)
    g_sage1 = ds1.T @ c["m1"]
    dz = _aggregate_back(g, ds1 @ w.sage1_W)

    da20 = 0.5 * dz
    da21 = 0.5 * dz
    dp20 = da20 * (c["p20"] > 0)
    dp21 = da21 * (c["p21"] > 0)
    g_k2 = np.empty((32, 16, 3))
    g_k2[:, :, 0] = dp21.T @ c["a10"]
    g_k2[:, :, 1] = dp20.T @ c["a10"] + dp21.T @ c["a11"]
    g_k2[:, :, 2] = dp20.T @ c["a11"]
    g_b2 = dp20.sum(axis=0) + dp21.sum(axis=0)

    da10 = dp20 @ w.conv2_kernel[:, :, 1] + dp21 @ w.conv2_kernel[:, :, 0]
    da11 = dp20 @ w.conv2_kernel[:, :, 2] + dp21 @ w.conv2_kernel[:, :, 1]
    dp10 = da10 * (c["p10"] > 0)
    dp11 = da11 * (c["p11"] > 0)
    g_k1 = np.empty((16, 1, 3))
    g_k1[:, 0, 0] = dp11.T @ c["x0"][:, 0]
    g_k1[:, 0, 1] = dp10.T @ c["x0"][:, 0] + dp11.T @ c["x1"][:, 0]
    g_k1[:, 0, 2] = dp10.T @ c["x1"][:, 0]
    g_b1 = dp10.sum(axis=0) + dp11.sum(axis=0)

    grads = Gradients(
        conv1_kernel=g_k1, conv1_bias=g_b1,
        conv2_kernel=g_k2, conv2_bias=g_b2,
        sage1_W=g_sage1, sage2_W=g_sage2,
        head_w=g_head_w, head_b=g_head_b,
    )
    return loss, grads


def init_adam_state() -> AdamState:
    """Fresh zeroed accumulators."""
    zeros = {name: np.zeros(shape) for name, shape in TENSOR_SHAPES}
    return AdamState(m=Gradients(**zeros), v=Gradients(**{k: v.copy() for k, v in zeros.items()}), t=0)


def adam_step(w: ModelWeights, grads: Gradients, state: AdamState, cfg: TrainConfig):
    """One bias-corrected Adam update; returns new (weights, state)."""
    t = state.t + 1
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    new_w = {}
    new_m = {}
    new_v = {}
    for name in _tensor_names():
        gr = getattr(grads, name)
        m = b1 * getattr(state.m, name) + (1.0 - b1) * gr
        v = b2 * getattr(state.v, name) + (1.0 - b2) * gr ** 2
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_w[name] = getattr(w, name) - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        new_m[name] = m
        new_v[name] = v
    weights = replace(w, **new_w)
    return weights, AdamState(m=Gradients(**new_m), v=Gradients(**new_v), t=t)


def train(g: Graph, features: np.ndarray, labels: np.ndarray, cfg: TrainConfig):
    """Full-batch training; returns (weights, per-epoch loss curve).

    Features are min-max normalized per column before training and the
    statistics are stored on the returned weights for reuse at prediction.
    The regression target is likewise min-max scaled internally for the
    optimizer's benefit, and the affine transform is folded back into the
    linear head on exit, exactly; returned weights predict in raw label units
    and the loss curve is reported in raw label units.

    Raises
    ------
    NumericError
        If the loss stops being finite.
    """
    x = _check_features(features)
    labels = check_scores(labels, g.n, name="labels")
    fmin = x.min(axis=0)
    fmax = x.max(axis=0)
    span = np.where(fmax > fmin, fmax - fmin, 1.0)
    xn = (x - fmin) / span

    y_lo = float(labels.min())
    y_scale = float(labels.max() - y_lo)
    if y_scale == 0.0:
        y_scale = 1.0
    ys = (labels - y_lo) / y_scale

    w = init_weights(cfg.seed)
    state = init_adam_state()
    losses = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        loss, grads = backward(g, xn, ys, w)
        if not np.isfinite(loss):
            raise NumericError(
                f"non-finite training loss at epoch {epoch} "
                f"(lr={cfg.learning_rate}, seed={cfg.seed})"
            )
        losses[epoch] = loss * y_scale ** 2  # raw label units
        w, state = adam_step(w, grads, state, cfg)

    head_w = w.head_w * y_scale
    head_b = w.head_b * y_scale + y_lo
    w = replace(w, head_w=head_w, head_b=head_b, feature_min=fmin, feature_max=fmax)
    return w, losses


def predict(g: Graph, features: np.ndarray, w: ModelWeights) -> CentralityScores:
    """Forward-pass scores on normalized features, tagged "1D-CGS".

    The normalization statistics persisted at training time are applied to
    this graph's features; weights without statistics (never trained) are
    rejected.
    """
    if w.feature_min is None or w.feature_max is None:
        raise ValueError("weights carry no normalization statistics; train first")
    x = _check_features(features)
    span = np.where(w.feature_max > w.feature_min, w.feature_max - w.feature_min, 1.0)
    xn = (x - w.feature_min) / span
    return CentralityScores(method="1D-CGS", values=forward(g, xn, w))


def _encode_array(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(arr.shape),
        "dtype": "<f8",
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict, expect_shape=None) -> np.ndarray:
    try:
        shape = tuple(obj["shape"])
        raw = base64.b64decode(obj["data"].encode("ascii"), validate=True)
        arr = np.frombuffer(raw, dtype=obj["dtype"]).reshape(shape).astype(np.float64)
    except (KeyError, ValueError, TypeError) as exc:
        raise WeightFormatError(f"malformed array record: {exc}") from exc
    if expect_shape is not None and arr.shape != expect_shape:
        raise WeightFormatError(f"array has shape {arr.shape}, expected {expect_shape}")
    return arr


def save_weights(w: ModelWeights, path) -> None:
    """Persist weights as a versioned, self-describing JSON container.

    Coefficients are stored as base64 little-endian float64, so a round trip
    is bit-exact.
    """
    doc = {
        "magic": WEIGHTS_MAGIC,
        "format_version": WEIGHTS_FORMAT_VERSION,
        "arrays": {name: _encode_array(getattr(w, name)) for name in _tensor_names()},
        "feature_min": None if w.feature_min is None else _encode_array(w.feature_min),
        "feature_max": None if w.feature_max is None else _encode_array(w.feature_max),
    }
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_weights(path) -> ModelWeights:
    """Load a weight container written by :func:`save_weights`.

    Raises
    ------
    WeightFormatError
        On truncated or malformed files, wrong magic, unknown future format
        versions, or shape-table mismatches.
    """
    try:
        with open(os.fspath(path), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(f"weight file is not valid JSON (truncated?): {exc}") from exc
    if not isinstance(doc, dict) or doc.get("magic") != WEIGHTS_MAGIC:
        raise WeightFormatError("not a weights file (bad magic string)")
    version = doc.get("format_version")
    if version != WEIGHTS_FORMAT_VERSION:
        raise WeightFormatError(
            f"unsupported weights format version {version!r} "
            f"(this build reads version {WEIGHTS_FORMAT_VERSION})"
        )
    arrays = doc.get("arrays")
    if not isinstance(arrays, dict):
        raise WeightFormatError("missing array table")
    tensors = {}
    for name, shape in TENSOR_SHAPES:
        if name not in arrays:
            raise WeightFormatError(f"missing array {name!r}")
        tensors[name] = _decode_array(arrays[name], expect_shape=shape)
    fmin = doc.get("feature_min")
    fmax = doc.get("feature_max")
    return ModelWeights(
        **tensors,
        feature_min=None if fmin is None else _decode_array(fmin, expect_shape=(2,)),
        feature_max=None if fmax is None else _decode_array(fmax, expect_shape=(2,)),
    )
