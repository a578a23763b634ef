"""A small fully connected network over the 6-D motion tuple, written by hand.

The model maps (x, y, t, vx, vy, omega) to a predicted intensity change in
(-1, 1). Inputs are affinely normalized per dimension; optionally the
normalized x and y are expanded into sin/cos features over octave-spaced
frequencies. Hidden and output layers all use tanh.

Both the weight gradients used for fitting and the input gradients used by the
tracker are computed by explicit reverse-mode passes in this module; no
autodiff framework is involved. forward() and forward_batch() are bitwise
consistent: evaluating inputs one at a time gives exactly the rows of the
batched call.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import FileFormatError, NumericalDivergenceError
from .synth import TrainingSample

__all__ = [
    "IegModel",
    "AdamState",
    "init_model",
    "ranges_from_samples",
    "samples_to_arrays",
    "forward",
    "forward_batch",
    "grad_input",
    "grad_input_batch",
    "grad_weights",
    "evaluate_mse",
    "train",
    "save_model",
    "load_model",
]

MODEL_MAGIC = b"IEGM"
MODEL_VERSION = 1
_ACTIVATION_TAGS = {"tanh": 0}
_BASE_INPUTS = 6


@dataclass(frozen=True)
class IegModel:
    """Frozen network parameters plus the input normalization that trained them.

    layer_dims[0] must equal 6 + 4 * fourier_octaves; normalization maps raw
    inputs to (x - input_offset) / input_scale before any feature expansion.
    """

    layer_dims: tuple[int, ...]
    weights: tuple[np.ndarray, ...] = field(repr=False)
    biases: tuple[np.ndarray, ...] = field(repr=False)
    input_offset: np.ndarray = field(repr=False)
    input_scale: np.ndarray = field(repr=False)
    activation: str = "tanh"
    fourier_octaves: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        object.__setattr__(self, "layer_dims", dims)
        if len(dims) < 2:
            raise ValueError("need at least an input and an output layer")
        if dims[-1] != 1:
            raise ValueError("output layer must have one unit")
        if self.activation not in _ACTIVATION_TAGS:
            raise ValueError(f"unsupported activation {self.activation!r}")
        if self.fourier_octaves < 0:
            raise ValueError("fourier_octaves must be >= 0")
        if dims[0] != _BASE_INPUTS + 4 * self.fourier_octaves:
            raise ValueError(
                f"layer_dims[0]={dims[0]} inconsistent with "
                f"fourier_octaves={self.fourier_octaves}"
            )
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise ValueError("one weight matrix and bias per layer transition")
        ws, bs = [], []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            w = np.ascontiguousarray(w, dtype=np.float64)
            b = np.ascontiguousarray(b, dtype=np.float64)
            if w.shape != (dims[i], dims[i + 1]):
                raise ValueError(
                    f"weights[{i}] has shape {w.shape}, expected {(dims[i], dims[i + 1])}"
                )
            if b.shape != (dims[i + 1],):
                raise ValueError(f"biases[{i}] has shape {b.shape}, expected ({dims[i + 1]},)")
            w.flags.writeable = False
            b.flags.writeable = False
            ws.append(w)
            bs.append(b)
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))
        off = np.ascontiguousarray(self.input_offset, dtype=np.float64)
        sc = np.ascontiguousarray(self.input_scale, dtype=np.float64)
        if off.shape != (_BASE_INPUTS,) or sc.shape != (_BASE_INPUTS,):
            raise ValueError("input_offset and input_scale must have shape (6,)")
        if not np.all(np.isfinite(off)) or not np.all(np.isfinite(sc)):
            raise ValueError("input normalization must be finite")
        if not np.all(sc > 0.0):
            raise ValueError("input_scale entries must be > 0")
        off.flags.writeable = False
        sc.flags.writeable = False
        object.__setattr__(self, "input_offset", off)
        object.__setattr__(self, "input_scale", sc)


def _matmul_rows(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Row i of the result must be bitwise independent of the batch size, so
    # that forward() equals the matching forward_batch() row. Two BLAS paths
    # break that: single-column products (matrix-vector) round differently
    # for different N, so they go through a per-row reduction instead, and
    # single-row products differ from batched ones, so they are padded to two
    # rows. Multi-row, multi-column products are row-stable as used here.
    if w.shape[1] == 1:
        return (a * w[:, 0]).sum(axis=1, keepdims=True)
    if a.shape[0] == 1:
        return (np.vstack((a, a)) @ w)[:1]
    return a @ w


def _encode(model: IegModel, x: np.ndarray) -> np.ndarray:
    """Normalize a raw (N, 6) batch and append the sin/cos feature columns."""
    z = (x - model.input_offset) / model.input_scale
    if model.fourier_octaves == 0:
        return z
    cols = [z]
    for j in range(model.fourier_octaves):
        f = math.pi * (2.0**j)
        cols.append(np.sin(f * z[:, 0:1]))
        cols.append(np.cos(f * z[:, 0:1]))
        cols.append(np.sin(f * z[:, 1:2]))
        cols.append(np.cos(f * z[:, 1:2]))
    return np.concatenate(cols, axis=1)


def _encode_backward(model: IegModel, enc: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Map a gradient w.r.t. the encoded batch back to the raw inputs."""
    dz = g[:, :_BASE_INPUTS].copy()
    for j in range(model.fourier_octaves):
        f = math.pi * (2.0**j)
        k = _BASE_INPUTS + 4 * j
        # enc columns are sin/cos themselves, so they serve as the derivative cache
        dz[:, 0] += f * (g[:, k] * enc[:, k + 1] - g[:, k + 1] * enc[:, k])
        dz[:, 1] += f * (g[:, k + 2] * enc[:, k + 3] - g[:, k + 3] * enc[:, k + 2])
    return dz / model.input_scale


def _forward_cached(model: IegModel, x: np.ndarray):
    zs = [_encode(model, x)]
    for w, b in zip(model.weights, model.biases):
        zs.append(np.tanh(_matmul_rows(zs[-1], w) + b))
    return zs[-1][:, 0], zs


def forward_batch(model: IegModel, x: np.ndarray) -> np.ndarray:
    """Predicted change for an (N, 6) batch of raw inputs, shape (N,)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != _BASE_INPUTS:
        raise ValueError(f"expected an (N, 6) batch, got shape {x.shape}")
    return _forward_cached(model, x)[0]


def forward(model: IegModel, x) -> float:
    """Predicted change for one raw 6-vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (_BASE_INPUTS,):
        raise ValueError(f"expected a 6-vector, got shape {x.shape}")
    return float(forward_batch(model, x[None, :])[0])


def _backprop(model: IegModel, zs, dl_dy: np.ndarray):
    """Shared reverse pass. dl_dy has shape (N,).

    Returns (weight grads, bias grads, gradient w.r.t. the encoded input).
    """
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    delta = dl_dy[:, None]
    for l in range(len(model.weights) - 1, -1, -1):
        delta = delta * (1.0 - zs[l + 1] ** 2)  # tanh'
        grads_w[l] = zs[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        delta = delta @ model.weights[l].T
    return grads_w, grads_b, delta


def grad_input_batch(model: IegModel, x: np.ndarray, dl_dy: np.ndarray) -> np.ndarray:
    """Per-sample gradient of dl_dy . y w.r.t. the raw inputs, shape (N, 6)."""
    x = np.asarray(x, dtype=np.float64)
    dl_dy = np.asarray(dl_dy, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != _BASE_INPUTS:
        raise ValueError(f"expected an (N, 6) batch, got shape {x.shape}")
    if dl_dy.shape != (x.shape[0],):
        raise ValueError("dl_dy must have one entry per row of x")
    _, zs = _forward_cached(model, x)
    _, _, denc = _backprop(model, zs, dl_dy)
    return _encode_backward(model, zs[0], denc)


def grad_input(model: IegModel, x) -> np.ndarray:
    """Gradient of the prediction itself w.r.t. one raw 6-vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (_BASE_INPUTS,):
        raise ValueError(f"expected a 6-vector, got shape {x.shape}")
    return grad_input_batch(model, x[None, :], np.ones(1))[0]


def grad_weights(model: IegModel, x: np.ndarray, targets: np.ndarray):
    """Gradients of the mean squared error over a batch.

    Returns (weight grads, bias grads, mean loss).
    """
    x = np.asarray(x, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != _BASE_INPUTS:
        raise ValueError(f"expected an (N, 6) batch, got shape {x.shape}")
    if targets.shape != (x.shape[0],):
        raise ValueError("targets must have one entry per row of x")
    y, zs = _forward_cached(model, x)
    err = y - targets
    loss = float(np.mean(err**2))
    dl_dy = 2.0 * err / len(err)
    gw, gb, _ = _backprop(model, zs, dl_dy)
    return gw, gb, loss


def init_model(
    hidden_dims,
    seed: int,
    input_ranges,
    activation: str = "tanh",
    fourier_octaves: int = 0,
) -> IegModel:
    """Fresh model with U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.

    input_ranges is a (6, 2) array of (low, high) per raw input dimension; the
    normalization maps each interval onto [-1, 1] (degenerate intervals get
    scale 1).
    """
    ranges = np.asarray(input_ranges, dtype=np.float64)
    if ranges.shape != (_BASE_INPUTS, 2):
        raise ValueError("input_ranges must have shape (6, 2)")
    if np.any(ranges[:, 1] < ranges[:, 0]):
        raise ValueError("input_ranges rows must satisfy low <= high")
    offset = (ranges[:, 0] + ranges[:, 1]) / 2.0
    scale = (ranges[:, 1] - ranges[:, 0]) / 2.0
    scale[scale == 0.0] = 1.0

    if fourier_octaves < 0:
        raise ValueError("fourier_octaves must be >= 0")
    dims = (_BASE_INPUTS + 4 * fourier_octaves, *(int(d) for d in hidden_dims), 1)
    if any(d <= 0 for d in dims):
        raise ValueError("layer sizes must be positive")
    rng = np.random.default_rng([seed])
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        lim = 1.0 / math.sqrt(din)
        weights.append(rng.uniform(-lim, lim, size=(din, dout)))
        biases.append(np.zeros(dout))
    return IegModel(
        dims, tuple(weights), tuple(biases), offset, scale, activation, fourier_octaves
    )


def samples_to_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Pack TrainingSamples into (inputs (N, 6), targets (N,)) float64 arrays."""
    n = len(samples)
    x = np.empty((n, _BASE_INPUTS))
    y = np.empty(n)
    for i, s in enumerate(samples):
        x[i, 0] = s.x
        x[i, 1] = s.y
        x[i, 2] = s.t
        x[i, 3] = s.vx
        x[i, 4] = s.vy
        x[i, 5] = s.omega
        y[i] = s.target
    return x, y


def ranges_from_samples(samples) -> np.ndarray:
    """Column-wise (min, max) of the sample inputs, as a (6, 2) array."""
    if len(samples) == 0:
        raise ValueError("need a nonempty sample set")
    if isinstance(samples[0], TrainingSample):
        x, _ = samples_to_arrays(samples)
    else:
        x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != _BASE_INPUTS:
        raise ValueError("need a nonempty (N, 6) input set")
    return np.stack([x.min(axis=0), x.max(axis=0)], axis=1)


@dataclass
class AdamState:
    """First/second moment buffers for one model's parameters."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: list = field(default_factory=list, repr=False)
    v_w: list = field(default_factory=list, repr=False)
    m_b: list = field(default_factory=list, repr=False)
    v_b: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.lr < 0.0:
            raise ValueError("lr must be >= 0")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be > 0")

    @classmethod
    def for_model(cls, model: IegModel, **kwargs) -> "AdamState":
        state = cls(**kwargs)
        state.m_w = [np.zeros_like(w) for w in model.weights]
        state.v_w = [np.zeros_like(w) for w in model.weights]
        state.m_b = [np.zeros_like(b) for b in model.biases]
        state.v_b = [np.zeros_like(b) for b in model.biases]
        return state


def _adam_update(params, grads, m, v, state: AdamState):
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    out = []
    for p, g, mi, vi in zip(params, grads, m, v):
        mi *= state.beta1
        mi += (1.0 - state.beta1) * g
        vi *= state.beta2
        vi += (1.0 - state.beta2) * g**2
        out.append(p - state.lr * (mi / bc1) / (np.sqrt(vi / bc2) + state.eps))
    return out


def train(
    model: IegModel,
    samples,
    epochs: int,
    batch_size: int,
    adam: AdamState | None = None,
    seed: int = 0,
    on_epoch=None,
):
    """Fit the model to (input, target) samples by minibatch Adam on the MSE.

    `samples` is a list of TrainingSamples or a ready (inputs, targets) pair.
    Returns (trained model, per-epoch mean losses). The whole run is a pure
    function of its arguments: batches are drawn from a shuffle seeded per
    epoch, and the input model is never mutated. Non-finite losses raise
    NumericalDivergenceError with the epoch and step in the diagnostic.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if isinstance(samples, tuple):
        x, y = samples
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
    else:
        x, y = samples_to_arrays(samples)
    if x.ndim != 2 or x.shape[1] != _BASE_INPUTS or y.shape != (len(x),):
        raise ValueError("need inputs (N, 6) with matching targets (N,)")
    if len(x) == 0:
        raise ValueError("training set is empty")
    if adam is None:
        adam = AdamState.for_model(model)
    elif not adam.m_w:
        adam = AdamState.for_model(
            model, lr=adam.lr, beta1=adam.beta1, beta2=adam.beta2, eps=adam.eps
        )

    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    current = model
    history: list[float] = []
    n = len(x)
    for epoch in range(epochs):
        order = np.random.default_rng([seed, epoch]).permutation(n)
        loss_sum = 0.0
        for step, start in enumerate(range(0, n, batch_size)):
            idx = order[start : start + batch_size]
            gw, gb, loss = grad_weights(current, x[idx], y[idx])
            if not math.isfinite(loss):
                raise NumericalDivergenceError(
                    f"non-finite training loss at epoch {epoch}, step {step}",
                    {"epoch": epoch, "step": step, "loss": loss},
                )
            loss_sum += loss * len(idx)
            adam.step += 1
            weights = _adam_update(weights, gw, adam.m_w, adam.v_w, adam)
            biases = _adam_update(biases, gb, adam.m_b, adam.v_b, adam)
            current = IegModel(
                model.layer_dims,
                tuple(weights),
                tuple(biases),
                model.input_offset,
                model.input_scale,
                model.activation,
                model.fourier_octaves,
            )
        history.append(loss_sum / n)
        if on_epoch is not None:
            on_epoch(epoch, history[-1])
    return current, history


def evaluate_mse(model: IegModel, samples) -> float:
    """Mean squared error of the model over a sample set."""
    if isinstance(samples, tuple):
        x, y = samples
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
    else:
        x, y = samples_to_arrays(samples)
    pred = forward_batch(model, x)
    return float(np.mean((pred - y) ** 2))


# ---------------------------------------------------------------------------
# Model file: magic, u32 version, u8 activation tag, u8 layer count, u32 dims,
# then per transition the row-major f64 weights and the f64 biases, then the
# 6 input scales and 6 offsets, and finally a CRC32 of everything before it.
# ---------------------------------------------------------------------------


def save_model(model: IegModel, path) -> None:
    parts = [MODEL_MAGIC]
    parts.append(struct.pack("<I", MODEL_VERSION))
    parts.append(struct.pack("<BB", _ACTIVATION_TAGS[model.activation], len(model.layer_dims)))
    parts.append(struct.pack(f"<{len(model.layer_dims)}I", *model.layer_dims))
    for w, b in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.input_scale, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.input_offset, dtype="<f8").tobytes())
    blob = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(blob)
        fh.write(struct.pack("<I", zlib.crc32(blob)))


def load_model(path) -> IegModel:
    with open(path, "rb") as fh:
        blob = fh.read()

    def need(offset: int, count: int) -> int:
        end = offset + count
        if end > len(blob) - 4:  # the trailing CRC is not payload
            raise FileFormatError(
                f"{path}: truncated at offset {offset}, need {count} more bytes"
            )
        return end

    if len(blob) < 14:
        raise FileFormatError(f"{path}: file too short to be a model ({len(blob)} bytes)")
    if blob[:4] != MODEL_MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:4]!r}")
    stored_crc = struct.unpack_from("<I", blob, len(blob) - 4)[0]
    actual_crc = zlib.crc32(blob[:-4])
    if stored_crc != actual_crc:
        raise FileFormatError(
            f"{path}: checksum mismatch (stored {stored_crc:#010x}, computed {actual_crc:#010x})"
        )
    (version,) = struct.unpack_from("<I", blob, 4)
    if version > MODEL_VERSION:
        raise FileFormatError(
            f"{path}: format version {version} is newer than supported ({MODEL_VERSION})"
        )
    act_tag, n_layers = struct.unpack_from("<BB", blob, 8)
    activation = next((k for k, v in _ACTIVATION_TAGS.items() if v == act_tag), None)
    if activation is None:
        raise FileFormatError(f"{path}: unknown activation tag {act_tag}")
    if n_layers < 2:
        raise FileFormatError(f"{path}: needs at least 2 layers, header says {n_layers}")
    off = need(10, 4 * n_layers)
    dims = struct.unpack_from(f"<{n_layers}I", blob, 10)
    if any(d == 0 for d in dims) or dims[-1] != 1:
        raise FileFormatError(f"{path}: invalid layer dims {dims}")
    rem = dims[0] - _BASE_INPUTS
    if rem < 0 or rem % 4 != 0:
        raise FileFormatError(
            f"{path}: input width {dims[0]} does not decompose into 6 + 4k features"
        )
    weights, biases = [], []
    pos = off
    for din, dout in zip(dims[:-1], dims[1:]):
        end = need(pos, 8 * din * dout)
        weights.append(
            np.frombuffer(blob[pos:end], dtype="<f8").reshape(din, dout).copy()
        )
        pos = end
        end = need(pos, 8 * dout)
        biases.append(np.frombuffer(blob[pos:end], dtype="<f8").copy())
        pos = end
    end = need(pos, 48)
    scale = np.frombuffer(blob[pos:end], dtype="<f8").copy()
    pos = end
    end = need(pos, 48)
    offset = np.frombuffer(blob[pos:end], dtype="<f8").copy()
    pos = end
    if pos != len(blob) - 4:
        raise FileFormatError(
            f"{path}: {len(blob) - 4 - pos} unexpected trailing bytes at offset {pos}"
        )
    try:
        return IegModel(
            dims, tuple(weights), tuple(biases), offset, scale, activation, rem // 4
        )
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
