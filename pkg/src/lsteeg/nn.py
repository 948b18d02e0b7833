"""Dense / LSTM forward and backward passes, loss, optimizer, LR schedule.

Everything is float64 numpy with hand-written reverse-mode gradients; there
is no autodiff graph. Functions accept a single sequence ``(T, I)`` or a
batch ``(B, T, I)`` and return arrays of the matching rank.

LSTM cell (standard forget-gate variant, no peepholes, no projection)::

    i_t = sigmoid(W_i [x_t; h_{t-1}] + b_i)
    f_t = sigmoid(W_f [x_t; h_{t-1}] + b_f)
    g_t = tanh   (W_g [x_t; h_{t-1}] + b_g)
    o_t = sigmoid(W_o [x_t; h_{t-1}] + b_o)
    c_t = f_t * c_{t-1} + i_t * g_t
    h_t = o_t * tanh(c_t)

Gate blocks are stored stacked as ``[input, forget, cell-candidate, output]``
along the first axis of ``gate_weights``; this order is part of the
checkpoint format and must not change.

Weight initialization is Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) with zero
biases, except the forget-gate bias which starts at 1.0 so early training
does not flush the cell state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, UsageError

__all__ = [
    "DenseParams", "LstmParams", "AdamState", "CosineSchedule",
    "init_dense", "init_lstm",
    "dense_forward", "dense_backward",
    "lstm_forward", "lstm_backward",
    "dropout_forward", "dropout_backward",
    "mse_loss", "adam_step", "cosine_lr",
]


# ---------------------------------------------------------------------------
# Parameter containers
# ---------------------------------------------------------------------------

@dataclass
class DenseParams:
    """Fully connected layer: y = x @ weight.T + bias."""
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)

    @property
    def in_size(self) -> int:
        return self.weight.shape[1]

    @property
    def out_size(self) -> int:
        return self.weight.shape[0]

    def tensors(self) -> list[np.ndarray]:
        return [self.weight, self.bias]


@dataclass
class LstmParams:
    """LSTM layer parameters with stacked gate blocks [i, f, g, o]."""
    input_size: int
    hidden_size: int
    gate_weights: np.ndarray  # (4H, I + H)
    gate_bias: np.ndarray     # (4H,)

    def __post_init__(self):
        h, i = self.hidden_size, self.input_size
        if self.gate_weights.shape != (4 * h, i + h):
            raise DimensionError(
                f"gate_weights: expected {(4 * h, i + h)}, got {self.gate_weights.shape}")
        if self.gate_bias.shape != (4 * h,):
            raise DimensionError(
                f"gate_bias: expected {(4 * h,)}, got {self.gate_bias.shape}")

    def tensors(self) -> list[np.ndarray]:
        return [self.gate_weights, self.gate_bias]


def init_dense(rng: np.random.Generator, out_size: int, in_size: int) -> DenseParams:
    if out_size < 1 or in_size < 1:
        raise ConfigError("dense layer sizes must be >= 1")
    limit = 1.0 / math.sqrt(in_size)
    weight = rng.uniform(-limit, limit, size=(out_size, in_size))
    bias = np.zeros(out_size)
    return DenseParams(weight=weight, bias=bias)


def init_lstm(rng: np.random.Generator, input_size: int, hidden_size: int,
              forget_bias: float = 1.0) -> LstmParams:
    if input_size < 1 or hidden_size < 1:
        raise ConfigError("lstm layer sizes must be >= 1")
    fan_in = input_size + hidden_size
    limit = 1.0 / math.sqrt(fan_in)
    weights = rng.uniform(-limit, limit, size=(4 * hidden_size, fan_in))
    bias = np.zeros(4 * hidden_size)
    bias[hidden_size:2 * hidden_size] = forget_bias
    return LstmParams(input_size=input_size, hidden_size=hidden_size,
                      gate_weights=weights, gate_bias=bias)


# ---------------------------------------------------------------------------
# Dense
# ---------------------------------------------------------------------------

@dataclass
class DenseCache:
    params: DenseParams
    x: np.ndarray


def dense_forward(params: DenseParams, x: np.ndarray) -> tuple[np.ndarray, DenseCache]:
    """Apply the layer to the last axis of ``x`` (any leading shape)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.in_size:
        raise DimensionError(
            f"dense input: expected last axis {params.in_size}, got {x.shape[-1]}")
    y = x @ params.weight.T + params.bias
    return y, DenseCache(params=params, x=x)


def dense_backward(cache: DenseCache, grad_y: np.ndarray):
    """Return ((grad_weight, grad_bias), grad_x)."""
    grad_y = np.asarray(grad_y, dtype=np.float64)
    if grad_y.shape != cache.x.shape[:-1] + (cache.params.out_size,):
        raise UsageError("dense_backward: gradient shape does not match cache")
    x2 = cache.x.reshape(-1, cache.params.in_size)
    g2 = grad_y.reshape(-1, cache.params.out_size)
    grad_w = g2.T @ x2
    grad_b = g2.sum(axis=0)
    grad_x = (g2 @ cache.params.weight).reshape(cache.x.shape)
    return (grad_w, grad_b), grad_x


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

@dataclass
class LstmCache:
    """Time-major per-step activations kept for the backward pass."""
    params: LstmParams
    seq_t: np.ndarray    # (T, B, I)
    h_prev: np.ndarray   # (T, B, H) hidden state entering each step
    c_prev: np.ndarray   # (T, B, H) cell state entering each step
    gates: np.ndarray    # (T, B, 4H) post-activation [i, f, g, o]
    tanh_c: np.ndarray   # (T, B, H) tanh of post-step cell state
    squeeze: bool        # input was a single (T, I) sequence


def _sigmoid_inplace(z: np.ndarray) -> np.ndarray:
    np.clip(z, -500.0, 500.0, out=z)
    np.negative(z, out=z)
    np.exp(z, out=z)
    z += 1.0
    np.reciprocal(z, out=z)
    return z


def lstm_forward(params: LstmParams, seq: np.ndarray,
                 h0: np.ndarray | None = None,
                 c0: np.ndarray | None = None) -> tuple[np.ndarray, LstmCache]:
    """Run the cell over a sequence; returns outputs and a backward cache.

    ``seq`` is ``(T, I)`` or ``(B, T, I)``; row t of the output is the hidden
    state after consuming rows 0..t. ``h0``/``c0`` default to zeros and are
    shared across the batch. Internals are time-major so the step loop
    touches contiguous blocks.
    """
    seq = np.asarray(seq, dtype=np.float64)
    squeeze = seq.ndim == 2
    if squeeze:
        seq = seq[None]
    if seq.ndim != 3 or seq.shape[2] != params.input_size:
        raise DimensionError(
            f"lstm input: expected (..., T, {params.input_size}), got {seq.shape}")
    B, T, _ = seq.shape
    H = params.hidden_size
    h0 = np.zeros(H) if h0 is None else np.asarray(h0, dtype=np.float64)
    c0 = np.zeros(H) if c0 is None else np.asarray(c0, dtype=np.float64)
    if h0.shape != (H,) or c0.shape != (H,):
        raise DimensionError(f"h0/c0 must have shape ({H},)")

    w_x = params.gate_weights[:, :params.input_size]   # (4H, I)
    w_h_t = params.gate_weights[:, params.input_size:].T.copy()  # (H, 4H)
    seq_t = np.ascontiguousarray(np.swapaxes(seq, 0, 1))         # (T, B, I)
    # Input contribution for all steps at once; the loop only adds recurrence.
    pre = seq_t @ w_x.T + params.gate_bias                       # (T, B, 4H)

    gates = np.empty((T, B, 4 * H))
    h_prev = np.empty((T, B, H))
    c_prev = np.empty((T, B, H))
    tanh_c = np.empty((T, B, H))
    out = np.empty((T, B, H))

    h = np.broadcast_to(h0, (B, H)).copy()
    c = np.broadcast_to(c0, (B, H)).copy()
    for t in range(T):
        h_prev[t] = h
        c_prev[t] = c
        z = gates[t]
        np.matmul(h, w_h_t, out=z)
        z += pre[t]
        g_block = np.tanh(z[:, 2 * H:3 * H])       # before sigmoid clobbers it
        _sigmoid_inplace(z)
        z[:, 2 * H:3 * H] = g_block
        c = z[:, H:2 * H] * c
        c += z[:, :H] * g_block
        np.tanh(c, out=tanh_c[t])
        h = out[t]
        np.multiply(z[:, 3 * H:], tanh_c[t], out=h)

    cache = LstmCache(params=params, seq_t=seq_t, h_prev=h_prev, c_prev=c_prev,
                      gates=gates, tanh_c=tanh_c, squeeze=squeeze)
    outputs = np.swapaxes(out, 0, 1)
    return (outputs[0] if squeeze else outputs), cache


def lstm_backward(cache: LstmCache, grad_outputs: np.ndarray):
    """Exact BPTT for :func:`lstm_forward`.

    Returns ``((grad_gate_weights, grad_gate_bias), grad_seq, (grad_h0, grad_c0))``
    with ``grad_seq`` shaped like the original input and the initial-state
    gradients summed over the batch (h0/c0 are shared).
    """
    grad_outputs = np.asarray(grad_outputs, dtype=np.float64)
    if cache.squeeze and grad_outputs.ndim == 2:
        grad_outputs = grad_outputs[None]
    T, B, H = cache.tanh_c.shape
    if grad_outputs.shape != (B, T, H):
        raise UsageError(
            f"lstm_backward: grad_outputs {grad_outputs.shape} does not match "
            f"cached forward shape {(B, T, H)}")
    grad_out_t = np.swapaxes(grad_outputs, 0, 1)       # (T, B, H)

    params = cache.params
    I = params.input_size
    w_x = params.gate_weights[:, :I]
    w_h = params.gate_weights[:, I:]

    dz = np.empty((T, B, 4 * H))
    dh = np.zeros((B, H))
    dc = np.zeros((B, H))
    scratch = np.empty((B, H))
    for t in range(T - 1, -1, -1):
        dh = dh + grad_out_t[t]
        z = cache.gates[t]
        i, f = z[:, :H], z[:, H:2 * H]
        g, o = z[:, 2 * H:3 * H], z[:, 3 * H:]
        tc = cache.tanh_c[t]
        d = dz[t]
        # output gate: dh * tc * o * (1 - o)
        np.multiply(dh, tc, out=d[:, 3 * H:])
        d[:, 3 * H:] *= o
        np.subtract(1.0, o, out=scratch)
        d[:, 3 * H:] *= scratch
        # cell state: dc += dh * o * (1 - tc^2)
        np.multiply(tc, tc, out=scratch)
        np.subtract(1.0, scratch, out=scratch)
        scratch *= o
        scratch *= dh
        dc += scratch
        # input gate: dc * g * i * (1 - i)
        np.multiply(dc, g, out=d[:, :H])
        d[:, :H] *= i
        np.subtract(1.0, i, out=scratch)
        d[:, :H] *= scratch
        # forget gate: dc * c_prev * f * (1 - f)
        np.multiply(dc, cache.c_prev[t], out=d[:, H:2 * H])
        d[:, H:2 * H] *= f
        np.subtract(1.0, f, out=scratch)
        d[:, H:2 * H] *= scratch
        # candidate: dc * i * (1 - g^2)
        np.multiply(g, g, out=scratch)
        np.subtract(1.0, scratch, out=scratch)
        scratch *= i
        np.multiply(dc, scratch, out=d[:, 2 * H:3 * H])
        # carry to t-1
        dh = d @ w_h
        dc = dc * f

    dz2 = dz.reshape(T * B, 4 * H)
    grad_w_x = dz2.T @ cache.seq_t.reshape(T * B, I)
    grad_w_h = dz2.T @ cache.h_prev.reshape(T * B, H)
    grad_w = np.concatenate([grad_w_x, grad_w_h], axis=1)
    grad_b = dz2.sum(axis=0)
    grad_seq = np.swapaxes(dz @ w_x, 0, 1)
    grad_h0 = dh.sum(axis=0)
    grad_c0 = dc.sum(axis=0)
    if cache.squeeze:
        grad_seq = grad_seq[0]
    return (grad_w, grad_b), grad_seq, (grad_h0, grad_c0)


# ---------------------------------------------------------------------------
# Dropout
# ---------------------------------------------------------------------------

def dropout_forward(x: np.ndarray, p: float, rng: np.random.Generator | None = None,
                    train: bool = True) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: kept activations are scaled by 1/(1-p).

    Eval mode (``train=False``) and ``p == 0`` are the identity. Returns
    ``(output, mask)``; the mask is None when no units were dropped.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    x = np.asarray(x, dtype=np.float64)
    if not train or p == 0.0:
        return x, None
    if rng is None:
        raise UsageError("dropout_forward: rng required in train mode with p > 0")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * mask, mask


def dropout_backward(mask: np.ndarray | None, grad_y: np.ndarray) -> np.ndarray:
    grad_y = np.asarray(grad_y, dtype=np.float64)
    if mask is None:
        return grad_y
    if mask.shape != grad_y.shape:
        raise UsageError("dropout_backward: gradient shape does not match mask")
    return grad_y * mask


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over all elements of the squared difference, plus its gradient."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"mse_loss: shapes differ, {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, grad


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Per-tensor first/second moment estimates plus the shared step count."""
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: list[np.ndarray], **kwargs) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(state: AdamState, params: list[np.ndarray],
              grads: list[np.ndarray], lr: float) -> None:
    """One bias-corrected Adam update, applied to ``params`` in place.

    ``lr == 0`` is allowed (the cosine trough with eta_min=0 lands there):
    moments and the step count still advance, parameters stay put.
    """
    if lr < 0.0:
        raise ConfigError(f"learning rate must be >= 0, got {lr}")
    if not (len(params) == len(grads) == len(state.m)):
        raise UsageError("adam_step: params/grads/state lengths differ")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise DimensionError(
                f"adam_step: parameter shape {p.shape} != gradient shape {g.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


# ---------------------------------------------------------------------------
# Learning-rate schedule
# ---------------------------------------------------------------------------

@dataclass
class CosineSchedule:
    """Plain periodic cosine annealing (no warm-restart period growth)."""
    eta_max: float = 5e-4
    eta_min: float = 0.0
    t_max: int = 10

    def __post_init__(self):
        if self.t_max < 1:
            raise ConfigError("t_max must be >= 1")
        if self.eta_min > self.eta_max:
            raise ConfigError("eta_min must not exceed eta_max")


def cosine_lr(schedule: CosineSchedule, t: int) -> float:
    """LR at integer step t: descends eta_max -> eta_min over t_max steps,
    then climbs back, with period 2 * t_max."""
    if t < 0:
        raise ConfigError("schedule step must be >= 0")
    phase = (t % (2 * schedule.t_max)) / schedule.t_max
    return schedule.eta_min + (schedule.eta_max - schedule.eta_min) * \
        (1.0 + math.cos(math.pi * phase)) / 2.0
