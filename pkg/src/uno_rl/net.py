"""Dense 240-64-64-61 value network with analytic gradients.

Everything is 64-bit floats end to end so gradients can be validated
against central finite differences at tight tolerance.  Hidden layers use
rectified-linear activations; the output head is linear and always emits
all 61 values (legality masking is the caller's job).

Initialization is fan-in-scaled uniform: W ~ U(-1/sqrt(fan_in),
+1/sqrt(fan_in)), biases zero.  The optimizer is Adam with coefficients
(0.9, 0.999) and epsilon 1e-8; learning rate defaults to 5e-5.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

LAYER_SIZES = (240, 64, 64, 61)

CHECKPOINT_MAGIC = "uno-rl-checkpoint v1"


@dataclass
class MLPParams:
    weights: list  # [np.ndarray (in, out)] per layer
    biases: list   # [np.ndarray (out,)] per layer

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "MLPParams":
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def flat(self) -> list:
        """Parameter arrays in checkpoint order: W1, b1, W2, b2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


# Gradients share the container shape of the parameters they refer to.
Gradients = MLPParams


def init_params(seed: int, layer_sizes: tuple[int, ...] = LAYER_SIZES) -> MLPParams:
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPParams(weights, biases)


def forward(params: MLPParams, x: np.ndarray) -> np.ndarray:
    """Batch forward pass; x is (n, 240) or a single (240,) vector."""
    h = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if h.shape[1] != params.weights[0].shape[0]:
        raise ValueError(f"input width {h.shape[1]} != {params.weights[0].shape[0]}")
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < last:
            np.maximum(h, 0.0, out=h)
    return h


def _forward_cached(params: MLPParams, x: np.ndarray):
    """Forward pass keeping pre-activation inputs for backprop."""
    h = np.atleast_2d(np.asarray(x, dtype=np.float64))
    inputs = []
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        h = h @ w + b
        if i < last:
            np.maximum(h, 0.0, out=h)
    return h, inputs


def _backprop(params: MLPParams, inputs: list, d_out: np.ndarray) -> Gradients:
    """Propagate dLoss/dOutput back through the cached layer inputs."""
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    delta = d_out
    for i in range(len(params.weights) - 1, -1, -1):
        grads_w[i] = inputs[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ params.weights[i].T
            # ReLU gate: inputs[i] is the activated output of layer i-1
            delta = delta * (inputs[i] > 0)
    return Gradients(grads_w, grads_b)


def _as_batch(states, actions, extra=None):
    x = np.atleast_2d(np.asarray(states, dtype=np.float64))
    a = np.asarray(actions, dtype=np.intp).reshape(-1)
    if a.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} states but {a.shape[0]} actions")
    if extra is None:
        return x, a
    t = np.asarray(extra, dtype=np.float64).reshape(-1)
    if t.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} states but {t.shape[0]} targets")
    return x, a, t


def grad_mse(
    params: MLPParams, states, action_ids, targets
) -> tuple[float, Gradients]:
    """Mean over the batch of (target - Q(s, a))^2 and its gradients."""
    x, a, t = _as_batch(states, action_ids, targets)
    out, inputs = _forward_cached(params, x)
    n = x.shape[0]
    rows = np.arange(n)
    diff = out[rows, a] - t
    loss = float(np.mean(diff ** 2))
    d_out = np.zeros_like(out)
    d_out[rows, a] = 2.0 * diff / n
    return loss, _backprop(params, inputs, d_out)


def grad_nll(params: MLPParams, states, action_ids) -> tuple[float, Gradients]:
    """Mean negative log softmax probability of the stored actions."""
    x, a = _as_batch(states, action_ids)
    out, inputs = _forward_cached(params, x)
    n = x.shape[0]
    rows = np.arange(n)
    shifted = out - out.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    z = exp.sum(axis=1, keepdims=True)
    log_prob = shifted - np.log(z)
    loss = float(-np.mean(log_prob[rows, a]))
    d_out = exp / z
    d_out[rows, a] -= 1.0
    d_out /= n
    return loss, _backprop(params, inputs, d_out)


def softmax_policy(params: MLPParams, state: np.ndarray, legal: tuple) -> np.ndarray:
    """Softmax over the legal subset of the network outputs."""
    logits = forward(params, state)[0][list(legal)]
    logits = logits - logits.max()
    exp = np.exp(logits)
    return exp / exp.sum()


@dataclass
class AdamState:
    lr: float = 5e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)  # first moments, checkpoint order
    v: list = field(default_factory=list)  # second moments

    @classmethod
    def for_params(cls, params: MLPParams, lr: float = 5e-5) -> "AdamState":
        flat = params.flat()
        return cls(
            lr=lr,
            m=[np.zeros_like(p) for p in flat],
            v=[np.zeros_like(p) for p in flat],
        )


def optimizer_step(params: MLPParams, opt: AdamState, grads: Gradients) -> bool:
    """One Adam update in place.  Returns False (update skipped) if any
    gradient entry is non-finite."""
    flat_g = grads.flat()
    for g in flat_g:
        if not np.all(np.isfinite(g)):
            logger.warning("non-finite gradient: update skipped at step %d", opt.step)
            return False
    opt.step += 1
    b1c = 1.0 - opt.beta1 ** opt.step
    b2c = 1.0 - opt.beta2 ** opt.step
    for p, g, m, v in zip(params.flat(), flat_g, opt.m, opt.v):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.lr * (m / b1c) / (np.sqrt(v / b2c) + opt.eps)
    return True


def sync_target(estimator: MLPParams) -> MLPParams:
    """Deep copy for use as the lagging target network."""
    return estimator.copy()


def save_checkpoint(
    params: MLPParams,
    opt: Optional[AdamState],
    metadata: dict,
    path,
) -> None:
    """Text header then raw little-endian float64 arrays.

    Array order: W1, b1, W2, b2, W3, b3, then Adam m and v in the same
    order when optimizer state is present.  Round-trips are bit-exact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CHECKPOINT_MAGIC]
    lines.append("layer_sizes " + ",".join(map(str, params.layer_sizes)))
    if opt is not None:
        lines.append(f"adam {opt.beta1},{opt.beta2},{opt.eps}")
        lines.append(f"lr {opt.lr!r}")
        lines.append(f"step {opt.step}")
    for key in sorted(metadata):
        value = str(metadata[key])
        if "\n" in value or "\n" in key:
            raise ValueError("metadata must be single-line")
        lines.append(f"meta {key}={value}")
    lines.append("end_header")
    arrays = params.flat()
    if opt is not None:
        arrays = arrays + opt.m + opt.v
    with open(path, "wb") as f:
        f.write(("\n".join(lines) + "\n").encode("utf-8"))
        for arr in arrays:
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


class CheckpointError(ValueError):
    """Corrupt file or a shape mismatch against the expected layer sizes."""


def load_checkpoint(
    path, expect_layer_sizes: Optional[tuple[int, ...]] = None
) -> tuple[MLPParams, Optional[AdamState], dict]:
    path = Path(path)
    blob = path.read_bytes()
    marker = b"end_header\n"
    split = blob.find(marker)
    if split < 0 or not blob.startswith(CHECKPOINT_MAGIC.encode()):
        raise CheckpointError(f"not a checkpoint file: {path}")
    header = blob[:split].decode("utf-8").splitlines()
    body = blob[split + len(marker):]

    layer_sizes: Optional[tuple[int, ...]] = None
    adam_coeffs = None
    lr = 5e-5
    step = 0
    metadata: dict[str, str] = {}
    for line in header[1:]:
        key, _, value = line.partition(" ")
        if key == "layer_sizes":
            layer_sizes = tuple(int(s) for s in value.split(","))
        elif key == "adam":
            adam_coeffs = tuple(float(s) for s in value.split(","))
        elif key == "lr":
            lr = float(value)
        elif key == "step":
            step = int(value)
        elif key == "meta":
            mk, _, mv = value.partition("=")
            metadata[mk] = mv
    if layer_sizes is None:
        raise CheckpointError(f"missing layer_sizes header: {path}")
    if expect_layer_sizes is not None and layer_sizes != tuple(expect_layer_sizes):
        raise CheckpointError(
            f"layer sizes {layer_sizes} do not match expected {tuple(expect_layer_sizes)}"
        )

    shapes = []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        shapes.append((fan_in, fan_out))
        shapes.append((fan_out,))
    n_param_arrays = len(shapes)
    if adam_coeffs is not None:
        shapes = shapes * 3  # params, m, v
    expected_bytes = sum(int(np.prod(s)) * 8 for s in shapes)
    if len(body) != expected_bytes:
        raise CheckpointError(
            f"body is {len(body)} bytes, expected {expected_bytes}: {path}"
        )

    arrays = []
    offset = 0
    for shape in shapes:
        count = int(np.prod(shape))
        arrays.append(
            np.frombuffer(body, dtype="<f8", count=count, offset=offset)
            .astype(np.float64)
            .reshape(shape)
        )
        offset += count * 8
    params = MLPParams(
        weights=[arrays[i] for i in range(0, n_param_arrays, 2)],
        biases=[arrays[i] for i in range(1, n_param_arrays, 2)],
    )
    opt = None
    if adam_coeffs is not None:
        opt = AdamState(
            lr=lr,
            beta1=adam_coeffs[0],
            beta2=adam_coeffs[1],
            eps=adam_coeffs[2],
            step=step,
            m=arrays[n_param_arrays : 2 * n_param_arrays],
            v=arrays[2 * n_param_arrays :],
        )
    return params, opt, metadata
