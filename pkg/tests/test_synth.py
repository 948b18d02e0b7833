"""Synthetic EEG generation, EOG contamination, artifact injection, splits."""

import numpy as np
import pytest
from scipy.signal import find_peaks

from lsteeg.dataset import CLEAN, NOISY
from lsteeg.errors import ConfigError, DimensionError
from lsteeg.signal import CHANNELS_1020, Recording, relative_band_power, rmse
from lsteeg.synth import (
    EogCoefficients, SyntheticSpec, contaminate_eog, default_eog_coefficients,
    epochs_from_recordings, gen_clean, gen_eog, generate_dataset,
    inject_artifacts, split_by_subject,
)

SMALL = SyntheticSpec(n_subjects=3, seconds_per_subject=20.0)


@pytest.fixture(scope="module")
def clean_recordings():
    return gen_clean(SMALL, seed=42)


def test_gen_clean_deterministic(clean_recordings):
    again = gen_clean(SMALL, seed=42)
    for a, b in zip(clean_recordings, again):
        np.testing.assert_array_equal(a.data, b.data)
    other = gen_clean(SMALL, seed=43)
    assert any(np.any(a.data != o.data) for a, o in zip(clean_recordings, other))


def test_gen_clean_occipital_alpha_dominates(clean_recordings):
    occ = [CHANNELS_1020.index(c) for c in ("O1", "O2")]
    fro = [CHANNELS_1020.index(c) for c in ("Fp1", "Fp2")]
    occ_alpha, fro_alpha = [], []
    for rec in clean_recordings:
        P = relative_band_power(rec.data, rec.sample_rate)
        occ_alpha.append(P[2, occ].mean())
        fro_alpha.append(P[2, fro].mean())
    assert np.mean(occ_alpha) > np.mean(fro_alpha)


def test_gen_clean_amplitude_bound(clean_recordings):
    for rec in clean_recordings:
        assert np.max(np.abs(rec.data)) < 100.0


def test_gen_clean_shapes_and_labels(clean_recordings):
    assert len(clean_recordings) == 3
    for k, rec in enumerate(clean_recordings):
        assert rec.subject_id == f"S{k:03d}"
        assert rec.channels == CHANNELS_1020
        assert rec.data.shape == (19, 4000)


# ---------------------------------------------------------------------------
# EOG coefficients and contamination
# ---------------------------------------------------------------------------

def test_default_coefficients_frontal_dominant():
    coeffs = default_eog_coefficients()
    fp = [CHANNELS_1020.index(c) for c in ("Fp1", "Fp2")]
    assert np.max(np.abs(coeffs.a)) == pytest.approx(np.abs(coeffs.a[fp]).max())
    assert np.max(np.abs(coeffs.b)) == pytest.approx(np.abs(coeffs.b[fp]).max())
    # Row maxima must not increase toward the back of the head.
    from lsteeg.signal import CHANNEL_ROW
    for vec in (coeffs.a, coeffs.b):
        row_max = [max(abs(vec[i]) for i, ch in enumerate(CHANNELS_1020)
                       if CHANNEL_ROW[ch] == r) for r in range(5)]
        assert all(a >= b for a, b in zip(row_max, row_max[1:]))


def test_contaminate_zero_coeffs_is_identity(clean_recordings):
    rec = clean_recordings[0]
    zero = EogCoefficients(a=np.zeros(19), b=np.zeros(19))
    veog, heog = gen_eog(1, rec.n_samples / rec.sample_rate, 10.0, 10.0)
    out = contaminate_eog(rec, veog, heog, zero)
    np.testing.assert_array_equal(out.data, rec.data)


def test_contaminate_exact_linear_combination(clean_recordings):
    rec = clean_recordings[0]
    coeffs = default_eog_coefficients()
    veog, heog = gen_eog(2, rec.n_samples / rec.sample_rate, 10.0, 10.0)
    out = contaminate_eog(rec, veog, heog, coeffs)
    for j in range(19):
        expected = coeffs.a[j] * veog + coeffs.b[j] * heog
        np.testing.assert_allclose(out.data[j] - rec.data[j], expected,
                                   rtol=0, atol=1e-9)


def test_contaminate_largest_a_largest_rms_increase(clean_recordings):
    rec = clean_recordings[1]
    coeffs = default_eog_coefficients()
    veog, _ = gen_eog(3, rec.n_samples / rec.sample_rate, 15.0, 0.0)
    out = contaminate_eog(rec, veog, np.zeros_like(veog), coeffs)
    increase = np.std(out.data, axis=1) - np.std(rec.data, axis=1)
    assert int(np.argmax(increase)) == int(np.argmax(np.abs(coeffs.a)))


def test_contaminate_length_mismatch(clean_recordings):
    rec = clean_recordings[0]
    coeffs = default_eog_coefficients()
    with pytest.raises(DimensionError):
        contaminate_eog(rec, np.zeros(10), np.zeros(10), coeffs)


# ---------------------------------------------------------------------------
# EOG trace generation
# ---------------------------------------------------------------------------

def test_gen_eog_zero_rates():
    veog, heog = gen_eog(0, 60.0, 0.0, 0.0)
    assert np.all(veog == 0.0) and np.all(heog == 0.0)


def test_gen_eog_blink_count_poisson():
    rate = 12.0
    veog, _ = gen_eog(5, 600.0, rate, 0.0)
    peaks, _ = find_peaks(veog, height=60.0, distance=int(0.15 * 200))
    lam = rate * 10.0
    half = 2.576 * np.sqrt(lam)
    assert lam - half <= len(peaks) <= lam + half


def test_gen_eog_amplitude_bound():
    veog, _ = gen_eog(6, 600.0, 12.0, 0.0)
    assert np.max(np.abs(veog)) <= 400.0 * 1.10  # headroom for filter overshoot


def test_gen_eog_deterministic():
    a = gen_eog(9, 30.0, 10.0, 5.0)
    b = gen_eog(9, 30.0, 10.0, 5.0)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


# ---------------------------------------------------------------------------
# Artifact injection
# ---------------------------------------------------------------------------

def quiet_spec(**kwargs):
    base = dict(n_subjects=3, seconds_per_subject=20.0, blink_rate=0.0,
                saccade_rate=0.0, muscle_rate=0.0, jump_rate=0.0)
    base.update(kwargs)
    return SyntheticSpec(**base)


def test_inject_rate_zero_all_clean(clean_recordings):
    epochs = epochs_from_recordings(clean_recordings)
    ds = inject_artifacts(epochs, quiet_spec(), seed=0)
    assert all(l == CLEAN for l in ds.labels)
    np.testing.assert_array_equal(ds.inputs, ds.targets)


def test_inject_label_soundness(clean_recordings):
    epochs = epochs_from_recordings(clean_recordings)
    ds = inject_artifacts(epochs, quiet_spec(muscle_rate=20.0, jump_rate=10.0,
                                             blink_rate=20.0), seed=1)
    assert NOISY in ds.labels and CLEAN in ds.labels
    for k in range(len(ds)):
        delta = rmse(ds.inputs[k], ds.targets[k])
        assert (ds.labels[k] == NOISY) == (delta > 0.0)


def test_inject_muscle_raises_gamma(clean_recordings):
    epochs = epochs_from_recordings(clean_recordings)
    ds = inject_artifacts(epochs, quiet_spec(muscle_rate=30.0), seed=2)
    noisy_idx = [k for k, l in enumerate(ds.labels) if l == NOISY]
    assert noisy_idx
    for k in noisy_idx:
        gamma_in = relative_band_power(ds.inputs[k], ds.sample_rate)[4].mean()
        gamma_tgt = relative_band_power(ds.targets[k], ds.sample_rate)[4].mean()
        assert gamma_in > gamma_tgt


def test_inject_target_leak(clean_recordings):
    epochs = epochs_from_recordings(clean_recordings)
    ds = inject_artifacts(epochs, quiet_spec(jump_rate=30.0,
                                             target_leak_fraction=1.0), seed=3)
    # every injected epoch keeps its artifact in the target -> label clean
    assert all(l == CLEAN for l in ds.labels)
    np.testing.assert_array_equal(ds.inputs, ds.targets)
    # and the jumps did land: some epochs have much larger range than clean EEG
    assert np.max(np.abs(ds.inputs)) > 150.0


def test_inject_deterministic(clean_recordings):
    epochs = epochs_from_recordings(clean_recordings)
    spec = quiet_spec(muscle_rate=10.0, jump_rate=5.0)
    a = inject_artifacts(epochs, spec, seed=4)
    b = inject_artifacts(epochs, spec, seed=4)
    np.testing.assert_array_equal(a.inputs, b.inputs)
    assert a.labels == b.labels


# ---------------------------------------------------------------------------
# Subject split
# ---------------------------------------------------------------------------

def make_flat_dataset(n_subjects, epochs_per_subject=4):
    rng = np.random.default_rng(0)
    n = n_subjects * epochs_per_subject
    x = rng.normal(size=(n, 2, 10))
    subjects = [f"S{k // epochs_per_subject}" for k in range(n)]
    from lsteeg.dataset import EpochDataset
    return EpochDataset(inputs=x, targets=x.copy(), labels=[CLEAN] * n,
                        subject_ids=subjects, partitions=[""] * n,
                        sample_rate=200.0)


def test_split_counts_10_subjects():
    ds = split_by_subject(make_flat_dataset(10), seed=0)
    per = {p: len({s for s, q in zip(ds.subject_ids, ds.partitions) if q == p})
           for p in ("train", "val", "test")}
    assert per == {"train": 6, "val": 2, "test": 2}


def test_split_counts_5_subjects():
    ds = split_by_subject(make_flat_dataset(5), seed=0)
    per = {p: len({s for s, q in zip(ds.subject_ids, ds.partitions) if q == p})
           for p in ("train", "val", "test")}
    assert per == {"train": 3, "val": 1, "test": 1}


def test_split_no_subject_leakage():
    ds = split_by_subject(make_flat_dataset(9), seed=5)
    parts = {p: {s for s, q in zip(ds.subject_ids, ds.partitions) if q == p}
             for p in ("train", "val", "test")}
    assert not (parts["train"] & parts["val"])
    assert not (parts["train"] & parts["test"])
    assert not (parts["val"] & parts["test"])


def test_split_deterministic_and_seed_sensitive():
    base = make_flat_dataset(12)
    a = split_by_subject(base, seed=1)
    b = split_by_subject(base, seed=1)
    assert a.partitions == b.partitions
    seen = {tuple(split_by_subject(base, seed=s).partitions) for s in range(6)}
    assert len(seen) > 1


def test_split_too_few_subjects():
    with pytest.raises(ConfigError):
        split_by_subject(make_flat_dataset(4), seed=0)


def test_generate_dataset_end_to_end():
    ds = generate_dataset(SyntheticSpec(n_subjects=5, seconds_per_subject=10.0), seed=8)
    assert len(ds) == 5 * 5  # 10 s -> 5 two-second epochs each
    assert set(ds.partitions) == {"train", "val", "test"}
    spec2 = SyntheticSpec(n_subjects=5, seconds_per_subject=10.0)
    again = generate_dataset(spec2, seed=8)
    np.testing.assert_array_equal(ds.inputs, again.inputs)
