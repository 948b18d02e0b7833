"""Sklearn estimator facade: API conventions, shapes, mode switching."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lsteeg.estimator import LsteegAutoencoder
from lsteeg.synth import SyntheticSpec, gen_clean
from lsteeg.signal import epoch_split


def small_epochs(n=12, n_channels=3, seed=3):
    spec = SyntheticSpec(n_subjects=2, seconds_per_subject=n,
                         sample_rate=50.0, noise_rms=0.0)
    eps = []
    for rec in gen_clean(spec, seed):
        eps.extend(e.data[:n_channels] for e in epoch_split(rec))
    return np.stack(eps[:n])


def small_estimator(**kwargs):
    params = dict(n_latent=8, n_outer=6, n_inner=4, dropout_p=0.0,
                  max_epochs=4, patience=3, batch_size=8, lr=1e-3,
                  random_state=0)
    params.update(kwargs)
    return LsteegAutoencoder(**params)


def test_get_params_set_params_clone():
    est = small_estimator()
    params = est.get_params()
    assert params["n_latent"] == 8
    est.set_params(n_latent=16)
    assert est.n_latent == 16
    dup = clone(est)
    assert dup.get_params() == est.get_params()


def test_fit_infers_shapes_and_returns_self():
    X = small_epochs()
    est = small_estimator()
    assert est.fit(X) is est
    assert est.config_.n_channels == 3
    assert est.config_.n_samples == 100
    assert est.mode_ == "detection"
    assert len(est.report_.train_loss) >= 1


def test_transform_predict_shapes():
    X = small_epochs()
    est = small_estimator().fit(X)
    Z = est.transform(X)
    assert Z.shape == (len(X), 8)
    Y = est.predict(X)
    assert Y.shape == X.shape
    back = est.inverse_transform(Z)
    assert back.shape == X.shape


def test_score_samples_is_negated_error():
    X = small_epochs()
    est = small_estimator().fit(X)
    err = est.reconstruction_error(X)
    assert np.all(err > 0.0)
    np.testing.assert_array_equal(est.score_samples(X), -err)


def test_correction_mode_with_targets():
    X = small_epochs()
    noisy = X + np.random.default_rng(0).normal(0, 1.0, X.shape)
    est = small_estimator().fit(noisy, X)
    assert est.mode_ == "correction"
    assert est.predict(noisy).shape == X.shape


def test_unfitted_raises():
    est = small_estimator()
    with pytest.raises(NotFittedError):
        est.transform(small_epochs(4))


def test_fit_deterministic_given_random_state():
    X = small_epochs()
    z1 = small_estimator().fit(X).transform(X)
    z2 = small_estimator().fit(X).transform(X)
    np.testing.assert_array_equal(z1, z2)
