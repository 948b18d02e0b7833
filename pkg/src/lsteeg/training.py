"""Training loop, anomaly scoring, correction evaluation, hyperparameter sweep.

Training is plain mini-batch Adam with the periodic cosine LR schedule,
seeded shuffling, and early stopping on validation loss (best weights are
restored on exit). Detection mode reconstructs the input; correction mode
maps the input to its paired clean target.

Per-epoch z-score normalization is on by default: each epoch is centered
and scaled by its own global mean/SD before entering the network, and
outputs are mapped back with the same statistics. Reconstruction-error
scores are computed in the normalized space, which keeps them comparable
across recordings with different gain.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import nn
from ._validation import check_epoch_batch
from .dataset import CLEAN, EpochDataset
from .errors import ConfigError, NumericError
from .metrics import MetricReport
from .model import LsteegConfig, LsteegModel, build

__all__ = ["TrainConfig", "train", "detect_scores", "correct_epochs",
           "evaluate_correction", "reconstruction_mse", "sweep",
           "DETECTION", "CORRECTION"]

DETECTION = "detection"
CORRECTION = "correction"


@dataclass
class TrainConfig:
    max_epochs: int = 1000
    batch_size: int = 16
    lr: float = 5e-4
    t_max: int = 10
    eta_min: float = 0.0
    patience: int = 20
    min_delta: float = 1e-7
    seed: int = 0
    mode: str = DETECTION
    normalize: bool = True

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if not 0 <= self.patience < self.max_epochs:
            raise ConfigError("need 0 <= patience < max_epochs")
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if self.mode not in (DETECTION, CORRECTION):
            raise ConfigError(f"mode must be {DETECTION!r} or {CORRECTION!r}")

    def to_dict(self) -> dict:
        from dataclasses import asdict
        return asdict(self)


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def normalize_epochs(x: np.ndarray):
    """Per-epoch global z-score; returns (normalized, (mean, sd))."""
    mean = x.mean(axis=(1, 2), keepdims=True)
    sd = x.std(axis=(1, 2), keepdims=True)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (x - mean) / sd, (mean, sd)


def denormalize_epochs(y: np.ndarray, stats) -> np.ndarray:
    mean, sd = stats
    return y * sd + mean


def _training_pairs(ds: EpochDataset, mode: str):
    """Inputs/targets for one partition under the given mode.

    Detection trains the autoencoder on clean epochs only (target = input);
    correction uses every (input, paired target) pair.
    """
    if mode == DETECTION:
        clean = ds.with_label(CLEAN)
        return clean.inputs, clean.inputs
    return ds.inputs, ds.targets


def _prepare(x: np.ndarray, t: np.ndarray, normalize: bool):
    if not normalize:
        return x, t
    xn, stats = normalize_epochs(x)
    tn = (t - stats[0]) / stats[1]  # target expressed in the input's frame
    return xn, tn


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train(model: LsteegModel, ds: EpochDataset, config: TrainConfig) -> MetricReport:
    """Fit the model in place; returns the loss history and best epoch.

    The dataset must be partitioned (train and val non-empty after mode
    filtering). Weights from the best validation epoch are restored before
    returning.
    """
    x_train, t_train = _training_pairs(ds.partition("train"), config.mode)
    x_val, t_val = _training_pairs(ds.partition("val"), config.mode)
    if x_train.shape[0] == 0:
        raise ConfigError("training partition is empty (after mode filtering)")
    if x_val.shape[0] == 0:
        raise ConfigError("validation partition is empty (after mode filtering)")
    x_train, t_train = _prepare(x_train, t_train, config.normalize)
    x_val, t_val = _prepare(x_val, t_val, config.normalize)

    params = model.parameters()
    adam = nn.AdamState.for_params(params)
    schedule = nn.CosineSchedule(eta_max=config.lr, eta_min=config.eta_min,
                                 t_max=config.t_max)
    shuffle_rng = np.random.default_rng([config.seed, 5])
    dropout_rng = np.random.default_rng([config.seed, 6])

    report = MetricReport()
    best_val = np.inf
    best_params = model.copy_parameters()
    best_epoch = -1
    since_improvement = 0
    n = x_train.shape[0]

    for epoch in range(config.max_epochs):
        lr = nn.cosine_lr(schedule, epoch)
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            out, trace = model.forward_train(x_train[idx], dropout_rng)
            loss, grad = nn.mse_loss(out, t_train[idx])
            if not np.isfinite(loss):
                raise NumericError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch starting {start}")
            grads = model.backward(trace, grad)
            nn.adam_step(adam, params, grads, lr)
            total += loss * len(idx)
        report.train_loss.append(total / n)

        val_loss = reconstruction_mse(model, x_val, targets=t_val,
                                      normalize=False).mean()
        if not np.isfinite(val_loss):
            raise NumericError(f"training diverged: non-finite validation "
                               f"loss at epoch {epoch}")
        report.val_loss.append(float(val_loss))

        if best_val - val_loss > config.min_delta:
            best_val = float(val_loss)
            best_params = model.copy_parameters()
            best_epoch = epoch
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement > config.patience:
                break

    model.set_parameters(best_params)
    report.best_epoch = best_epoch
    report.stopped_epoch = len(report.train_loss) - 1
    return report


# ---------------------------------------------------------------------------
# Scoring and evaluation
# ---------------------------------------------------------------------------

def _chunks(n: int, size: int):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def reconstruction_mse(model: LsteegModel, epochs: np.ndarray,
                       targets: np.ndarray | None = None,
                       normalize: bool = True, chunk: int = 64) -> np.ndarray:
    """Per-epoch eval-mode MSE between reconstruction and target."""
    x = check_epoch_batch(epochs, model.config.n_channels, model.config.n_samples)
    t = x if targets is None else check_epoch_batch(
        targets, model.config.n_channels, model.config.n_samples)
    if normalize:
        x, stats = normalize_epochs(x)
        t = (t - stats[0]) / stats[1]
    scores = np.empty(x.shape[0])
    for sl in _chunks(x.shape[0], chunk):
        out = model.reconstruct(x[sl])
        scores[sl] = np.mean((out - t[sl]) ** 2, axis=(1, 2))
    return scores


def detect_scores(model: LsteegModel, epochs: np.ndarray,
                  normalize: bool = True) -> np.ndarray:
    """Anomaly score per epoch: reconstruction MSE against the input itself."""
    return reconstruction_mse(model, epochs, targets=None, normalize=normalize)


def correct_epochs(model: LsteegModel, epochs: np.ndarray,
                   normalize: bool = True, chunk: int = 64) -> np.ndarray:
    """Eval-mode reconstructions mapped back to the input microvolt scale."""
    x = check_epoch_batch(epochs, model.config.n_channels, model.config.n_samples)
    out = np.empty_like(x)
    for sl in _chunks(x.shape[0], chunk):
        block = x[sl]
        if normalize:
            block, stats = normalize_epochs(block)
            out[sl] = denormalize_epochs(model.reconstruct(block), stats)
        else:
            out[sl] = model.reconstruct(block)
    return out


def evaluate_correction(model: LsteegModel, inputs: np.ndarray,
                        targets: np.ndarray, normalize: bool = True):
    """Test-set RMSE of corrected outputs vs targets, in microvolts.

    Returns (mean, population SD, per-epoch RMSE values).
    """
    inputs = check_epoch_batch(inputs)
    targets = check_epoch_batch(targets)
    corrected = correct_epochs(model, inputs, normalize=normalize)
    per_epoch = np.sqrt(np.mean((corrected - targets) ** 2, axis=(1, 2)))
    return float(per_epoch.mean()), float(per_epoch.std(ddof=0)), per_epoch


# ---------------------------------------------------------------------------
# Hyperparameter sweep
# ---------------------------------------------------------------------------

SWEEP_AXES = ("n_latent", "n_outer", "n_inner")


def sweep(axis: str, values, base_model: LsteegConfig, ds: EpochDataset,
          config: TrainConfig) -> list[tuple[int, float]]:
    """Train one model per axis value under identical seeds and budget.

    Returns (value, test MSE) rows in input order; duplicate values are
    dropped. Test MSE is the mean reconstruction error on the test
    partition under the training mode's target convention.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    if not seen:
        raise ConfigError("sweep needs at least one value")

    x_test, t_test = _training_pairs(ds.partition("test"), config.mode)
    if x_test.shape[0] == 0:
        raise ConfigError("test partition is empty (after mode filtering)")

    rows = []
    for v in seen:
        cfg = replace(base_model, **{axis: int(v)})
        model = build(cfg)
        train(model, ds, config)
        xn, tn = _prepare(x_test, t_test, config.normalize)
        mse = float(reconstruction_mse(model, xn, targets=tn,
                                       normalize=False).mean())
        rows.append((int(v), mse))
    return rows
