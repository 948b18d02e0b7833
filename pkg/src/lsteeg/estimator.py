"""Scikit-learn style front end for the autoencoder.

``LsteegAutoencoder`` wraps model construction and training behind the
familiar estimator API so the network drops into sklearn pipelines and
model-selection tooling:

* ``fit(X)`` trains for anomaly detection (reconstruct the input),
* ``fit(X, y)`` trains for artifact correction (map input to target ``y``),
* ``transform`` / ``inverse_transform`` expose the latent bottleneck,
* ``predict`` returns reconstructions in the input's microvolt scale,
* ``score_samples`` follows the outlier-detector convention (higher means
  more normal; it is the negated reconstruction error).

X is a float array of shape (n_epochs, n_channels, n_samples).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_epoch_batch
from .dataset import CLEAN, EpochDataset
from .errors import ConfigError
from .model import LsteegConfig, build
from .training import (CORRECTION, DETECTION, TrainConfig, correct_epochs,
                       detect_scores, train)

__all__ = ["LsteegAutoencoder"]


class LsteegAutoencoder(BaseEstimator, TransformerMixin):
    """LSTM autoencoder estimator for multi-channel EEG epochs.

    Parameters mirror the architecture and training knobs; ``n_channels``
    and ``n_samples`` default to None and are inferred from the data at
    fit time. ``validation_fraction`` of the epochs (chosen by a seeded
    shuffle) drives early stopping.
    """

    def __init__(self, n_latent=64, n_channels=None, n_samples=None,
                 n_outer=50, n_inner=25, dropout_p=0.1, lr=5e-4, t_max=10,
                 eta_min=0.0, batch_size=16, max_epochs=1000, patience=20,
                 min_delta=1e-7, normalize=True, validation_fraction=0.2,
                 random_state=0):
        self.n_latent = n_latent
        self.n_channels = n_channels
        self.n_samples = n_samples
        self.n_outer = n_outer
        self.n_inner = n_inner
        self.dropout_p = dropout_p
        self.lr = lr
        self.t_max = t_max
        self.eta_min = eta_min
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.min_delta = min_delta
        self.normalize = normalize
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    # -- fitting ------------------------------------------------------------

    def _make_dataset(self, X: np.ndarray, y: np.ndarray | None) -> EpochDataset:
        n = X.shape[0]
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must be in (0, 1)")
        n_val = max(1, int(round(n * self.validation_fraction)))
        if n_val >= n:
            raise ConfigError("not enough epochs for a train/validation split")
        order = np.random.default_rng(self.random_state).permutation(n)
        parts = np.empty(n, dtype=object)
        parts[order[n_val:]] = "train"
        parts[order[:n_val]] = "val"
        targets = X if y is None else check_epoch_batch(y, X.shape[1], X.shape[2])
        # Subjects are synthetic here: the estimator API has no subject
        # notion, so each epoch is its own "subject" and may land anywhere.
        # sample_rate is irrelevant for training; 1.0 is a placeholder.
        return EpochDataset(inputs=X, targets=targets.copy(),
                            labels=[CLEAN] * n,
                            subject_ids=[f"e{k}" for k in range(n)],
                            partitions=list(parts), sample_rate=1.0,
                            spec=None)

    def fit(self, X, y=None):
        """Train the autoencoder; ``y`` switches to correction mode."""
        X = check_epoch_batch(X, self.n_channels, self.n_samples)
        config = LsteegConfig(
            n_latent=self.n_latent, n_channels=X.shape[1], n_samples=X.shape[2],
            n_outer=self.n_outer, n_inner=self.n_inner,
            dropout_p=self.dropout_p, rng_seed=self.random_state)
        self.mode_ = DETECTION if y is None else CORRECTION
        ds = self._make_dataset(X, y)
        self.model_ = build(config)
        self.config_ = config
        self.report_ = train(self.model_, ds, TrainConfig(
            max_epochs=self.max_epochs, batch_size=self.batch_size,
            lr=self.lr, t_max=self.t_max, eta_min=self.eta_min,
            patience=self.patience, min_delta=self.min_delta,
            seed=self.random_state, mode=self.mode_, normalize=self.normalize))
        return self

    # -- inference ----------------------------------------------------------

    def _check_input(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        return check_epoch_batch(X, self.config_.n_channels, self.config_.n_samples)

    def transform(self, X) -> np.ndarray:
        """Latent embeddings, shape (n_epochs, n_latent)."""
        X = self._check_input(X)
        if self.normalize:
            from .training import normalize_epochs
            X, _ = normalize_epochs(X)
        return self.model_.encode(X)

    def inverse_transform(self, Z) -> np.ndarray:
        """Decode latent vectors back to (n_epochs, n_channels, n_samples).

        With normalization enabled the decoder output lives in the z-scored
        space; per-epoch scale cannot be recovered from the latent alone.
        """
        check_is_fitted(self, "model_")
        return self.model_.decode(np.asarray(Z, dtype=np.float64))

    def predict(self, X) -> np.ndarray:
        """Reconstructions (detection) or corrections, in input scale."""
        X = self._check_input(X)
        return correct_epochs(self.model_, X, normalize=self.normalize)

    def reconstruction_error(self, X) -> np.ndarray:
        """Per-epoch anomaly score: reconstruction MSE (higher = worse)."""
        X = self._check_input(X)
        return detect_scores(self.model_, X, normalize=self.normalize)

    def score_samples(self, X) -> np.ndarray:
        """Sklearn outlier convention: negated reconstruction error."""
        return -self.reconstruction_error(X)
