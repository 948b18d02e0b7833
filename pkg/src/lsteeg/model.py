"""LSTM autoencoder assembly: encoder, decoder, and whole-model gradients.

The network maps an epoch of shape (n_channels, n_samples) through:

    encoder:  LSTM(C -> n_outer) -> LSTM(n_outer -> n_inner)
              -> flatten (time-major) -> Dense(n_inner * T -> n_latent)
    decoder:  Dense(n_latent -> n_inner * T) -> reshape to (T, n_inner)
              -> LSTM(n_inner -> n_inner) -> LSTM(n_inner -> n_outer)
              -> per-timestep Dense(n_outer -> C)

During training, dropout follows every layer except the final projection.
The latent size must stay below C * T so the bottleneck actually compresses.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from . import nn
from ._validation import check_epoch_batch, check_finite
from .errors import ConfigError, DimensionError

__all__ = ["LsteegConfig", "LsteegModel", "build"]


@dataclass
class LsteegConfig:
    """Architecture hyperparameters. Defaults follow the 19-channel,
    2-second / 200 Hz epoch convention used throughout the package."""
    n_latent: int
    n_channels: int = 19
    n_samples: int = 500
    n_outer: int = 50
    n_inner: int = 25
    dropout_p: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("n_latent", "n_channels", "n_samples", "n_outer", "n_inner"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
            setattr(self, name, int(getattr(self, name)))
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigError("dropout_p must be in [0, 1)")
        if self.n_latent >= self.n_channels * self.n_samples:
            raise ConfigError(
                "n_latent must be smaller than n_channels * n_samples "
                "(the bottleneck has to compress)")

    def to_dict(self) -> dict:
        return asdict(self)


# One forward pass worth of layer caches, consumed once by backward().
@dataclass
class _ForwardTrace:
    caches: dict
    masks: dict
    batch_shape: tuple


class LsteegModel:
    """Parameter container plus forward/backward passes.

    Construct via :func:`build`; parameters are float64 numpy arrays owned
    by the model and updated in place by the training loop.
    """

    # (name, kind) in serialization order; kind drives the tensor layout.
    LAYOUT = [
        ("enc_lstm1", "lstm"), ("enc_lstm2", "lstm"), ("enc_dense", "dense"),
        ("dec_dense", "dense"), ("dec_lstm1", "lstm"), ("dec_lstm2", "lstm"),
        ("out_dense", "dense"),
    ]

    def __init__(self, config: LsteegConfig, layers: dict):
        self.config = config
        self.layers = layers

    # -- parameter plumbing -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        """All trainable tensors in fixed serialization order."""
        out = []
        for name, _ in self.LAYOUT:
            out.extend(self.layers[name].tensors())
        return out

    def parameter_names(self) -> list[str]:
        names = []
        for name, kind in self.LAYOUT:
            if kind == "lstm":
                names += [f"{name}.gate_weights", f"{name}.gate_bias"]
            else:
                names += [f"{name}.weight", f"{name}.bias"]
        return names

    def param_count(self) -> int:
        return sum(int(p.size) for p in self.parameters())

    def copy_parameters(self) -> list[np.ndarray]:
        return [p.copy() for p in self.parameters()]

    def set_parameters(self, values: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(values) != len(params):
            raise DimensionError("parameter list length mismatch")
        for p, v in zip(params, values):
            if p.shape != v.shape:
                raise DimensionError(f"parameter shape {v.shape} != {p.shape}")
            p[...] = v

    # -- forward ------------------------------------------------------------

    def _encode_batch(self, batch: np.ndarray, train: bool,
                      rng: np.random.Generator | None):
        cfg = self.config
        p = cfg.dropout_p if train else 0.0
        seq = np.swapaxes(batch, 1, 2)  # (B, T, C)
        caches, masks = {}, {}
        out1, caches["enc_lstm1"] = nn.lstm_forward(self.layers["enc_lstm1"], seq)
        out1, masks["enc_lstm1"] = nn.dropout_forward(out1, p, rng, train)
        out2, caches["enc_lstm2"] = nn.lstm_forward(self.layers["enc_lstm2"], out1)
        out2, masks["enc_lstm2"] = nn.dropout_forward(out2, p, rng, train)
        flat = out2.reshape(out2.shape[0], cfg.n_samples * cfg.n_inner)
        z, caches["enc_dense"] = nn.dense_forward(self.layers["enc_dense"], flat)
        z, masks["enc_dense"] = nn.dropout_forward(z, p, rng, train)
        return z, caches, masks

    def _decode_batch(self, z: np.ndarray, train: bool,
                      rng: np.random.Generator | None):
        cfg = self.config
        p = cfg.dropout_p if train else 0.0
        caches, masks = {}, {}
        flat, caches["dec_dense"] = nn.dense_forward(self.layers["dec_dense"], z)
        flat, masks["dec_dense"] = nn.dropout_forward(flat, p, rng, train)
        seq = flat.reshape(flat.shape[0], cfg.n_samples, cfg.n_inner)
        out3, caches["dec_lstm1"] = nn.lstm_forward(self.layers["dec_lstm1"], seq)
        out3, masks["dec_lstm1"] = nn.dropout_forward(out3, p, rng, train)
        out4, caches["dec_lstm2"] = nn.lstm_forward(self.layers["dec_lstm2"], out3)
        out4, masks["dec_lstm2"] = nn.dropout_forward(out4, p, rng, train)
        y_seq, caches["out_dense"] = nn.dense_forward(self.layers["out_dense"], out4)
        return np.swapaxes(y_seq, 1, 2), caches, masks

    def forward_train(self, batch: np.ndarray, rng: np.random.Generator):
        """Train-mode reconstruction of a (B, C, T) batch; keeps caches."""
        batch = check_epoch_batch(batch, self.config.n_channels, self.config.n_samples)
        z, enc_caches, enc_masks = self._encode_batch(batch, True, rng)
        out, dec_caches, dec_masks = self._decode_batch(z, True, rng)
        trace = _ForwardTrace(caches={**enc_caches, **dec_caches},
                              masks={**enc_masks, **dec_masks},
                              batch_shape=batch.shape)
        return out, trace

    def backward(self, trace: _ForwardTrace, grad_out: np.ndarray) -> list[np.ndarray]:
        """Gradients of a scalar loss w.r.t. every tensor in parameters()
        order, given the loss gradient w.r.t. the reconstruction."""
        cfg = self.config
        caches, masks = trace.caches, trace.masks
        B = trace.batch_shape[0]
        grads = {}

        g = np.swapaxes(np.asarray(grad_out, dtype=np.float64), 1, 2)  # (B, T, C)
        grads["out_dense"], g = nn.dense_backward(caches["out_dense"], g)
        g = nn.dropout_backward(masks["dec_lstm2"], g)
        grads["dec_lstm2"], g, _ = nn.lstm_backward(caches["dec_lstm2"], g)
        g = nn.dropout_backward(masks["dec_lstm1"], g)
        grads["dec_lstm1"], g, _ = nn.lstm_backward(caches["dec_lstm1"], g)
        g = g.reshape(B, cfg.n_samples * cfg.n_inner)
        g = nn.dropout_backward(masks["dec_dense"], g)
        grads["dec_dense"], g = nn.dense_backward(caches["dec_dense"], g)
        g = nn.dropout_backward(masks["enc_dense"], g)
        grads["enc_dense"], g = nn.dense_backward(caches["enc_dense"], g)
        g = g.reshape(B, cfg.n_samples, cfg.n_inner)
        g = nn.dropout_backward(masks["enc_lstm2"], g)
        grads["enc_lstm2"], g, _ = nn.lstm_backward(caches["enc_lstm2"], g)
        g = nn.dropout_backward(masks["enc_lstm1"], g)
        grads["enc_lstm1"], g, _ = nn.lstm_backward(caches["enc_lstm1"], g)

        flat = []
        for name, _ in self.LAYOUT:
            flat.extend(grads[name])
        return flat

    # -- inference ----------------------------------------------------------

    def encode(self, epochs: np.ndarray) -> np.ndarray:
        """Latent vectors for one (C, T) epoch or a (B, C, T) batch."""
        single = np.asarray(epochs).ndim == 2
        batch = check_epoch_batch(epochs, self.config.n_channels, self.config.n_samples)
        z, _, _ = self._encode_batch(batch, False, None)
        check_finite(z, "latent")
        return z[0] if single else z

    def decode(self, z: np.ndarray) -> np.ndarray:
        """Reconstruction for one (n_latent,) vector or a (B, n_latent) batch."""
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        if single:
            z = z[None, :]
        if z.ndim != 2 or z.shape[1] != self.config.n_latent:
            raise DimensionError(
                f"latent: expected (..., {self.config.n_latent}), got {z.shape}")
        out, _, _ = self._decode_batch(z, False, None)
        check_finite(out, "reconstruction")
        return out[0] if single else out

    def reconstruct(self, epochs: np.ndarray) -> np.ndarray:
        """Eval-mode decode(encode(x)); shape-preserving."""
        single = np.asarray(epochs).ndim == 2
        batch = check_epoch_batch(epochs, self.config.n_channels, self.config.n_samples)
        z, _, _ = self._encode_batch(batch, False, None)
        out, _, _ = self._decode_batch(z, False, None)
        check_finite(out, "reconstruction")
        return out[0] if single else out


def build(config: LsteegConfig) -> LsteegModel:
    """Deterministically initialize a model from the config's rng_seed."""
    rng = np.random.default_rng(config.rng_seed)
    c = config
    layers = {
        "enc_lstm1": nn.init_lstm(rng, c.n_channels, c.n_outer),
        "enc_lstm2": nn.init_lstm(rng, c.n_outer, c.n_inner),
        "enc_dense": nn.init_dense(rng, c.n_latent, c.n_inner * c.n_samples),
        "dec_dense": nn.init_dense(rng, c.n_inner * c.n_samples, c.n_latent),
        "dec_lstm1": nn.init_lstm(rng, c.n_inner, c.n_inner),
        "dec_lstm2": nn.init_lstm(rng, c.n_inner, c.n_outer),
        "out_dense": nn.init_dense(rng, c.n_channels, c.n_outer),
    }
    return LsteegModel(config=c, layers=layers)
