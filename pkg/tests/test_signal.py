"""Filtering, epoching, Welch PSD, band powers, and error metrics."""

import numpy as np
import pytest

from lsteeg.errors import ConfigError, DimensionError
from lsteeg.signal import (
    CHANNELS_1020, BandDef, DEFAULT_BANDS, Epoch, Recording,
    bandpass, bandpass_array, downsample, epoch_split, psd_attenuation,
    relative_band_power, rmse, welch_psd,
)

FS = 200.0


def sine(freq, seconds, fs=FS, amp=1.0, phase=0.0):
    t = np.arange(int(seconds * fs)) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def make_recording(data, fs=FS, subject="S1"):
    data = np.atleast_2d(data)
    labels = CHANNELS_1020[:data.shape[0]]
    return Recording(subject_id=subject, sample_rate=fs, data=data, channels=labels)


# ---------------------------------------------------------------------------
# Bandpass
# ---------------------------------------------------------------------------

def test_bandpass_rejects_dc():
    rec = make_recording(np.full((1, 2000), 7.0))
    out = bandpass(rec)
    assert np.max(np.abs(out.data)) < 1e-3 * 7.0


def test_bandpass_passband_gain_near_unity():
    x = sine(10.0, 10.0)
    y = bandpass_array(x, FS)
    trim = slice(200, -200)
    ratio = np.std(y[trim]) / np.std(x[trim])
    assert abs(ratio - 1.0) < 0.05


def test_bandpass_stopband_attenuates_60hz():
    x = sine(60.0, 10.0)
    y = bandpass_array(x, FS)
    trim = slice(200, -200)
    assert np.std(y[trim]) < 0.05 * np.std(x[trim])


def test_bandpass_zero_phase():
    x = sine(10.0, 10.0)
    y = bandpass_array(x, FS)
    trim = slice(200, -200)
    xc = np.correlate(y[trim], x[trim], mode="full")
    lag = int(np.argmax(xc)) - (len(x[trim]) - 1)
    assert lag == 0


def test_bandpass_linearity():
    rng = np.random.default_rng(0)
    x = rng.normal(size=2000)
    y = rng.normal(size=2000)
    lhs = bandpass_array(2.5 * x - 1.5 * y, FS)
    rhs = 2.5 * bandpass_array(x, FS) - 1.5 * bandpass_array(y, FS)
    denom = np.max(np.abs(rhs)) or 1.0
    assert np.max(np.abs(lhs - rhs)) / denom < 1e-9


def test_bandpass_edge_validation():
    with pytest.raises(ConfigError):
        bandpass_array(np.zeros(100), FS, lo=1.0, hi=100.0)  # hi >= Nyquist
    with pytest.raises(ConfigError):
        bandpass_array(np.zeros(100), FS, lo=0.0, hi=45.0)


# ---------------------------------------------------------------------------
# Downsample / epoch split
# ---------------------------------------------------------------------------

def test_downsample_halves_sample_count():
    rec = make_recording(np.random.default_rng(0).normal(size=(2, 4000)), fs=400.0)
    out = downsample(rec, 200.0)
    assert out.sample_rate == 200.0
    assert out.n_samples == 2000


def test_downsample_identity_when_rate_matches():
    rec = make_recording(np.random.default_rng(1).normal(size=(1, 1000)), fs=200.0)
    out = downsample(rec, 200.0)
    np.testing.assert_array_equal(out.data, rec.data)


def test_downsample_every_fifth_sample():
    rec = make_recording(np.random.default_rng(2).normal(size=(1, 5000)), fs=1000.0)
    out = downsample(rec, 200.0)
    assert out.n_samples == 1000


def test_downsample_non_integer_ratio_rejected():
    rec = make_recording(np.zeros((1, 100)), fs=300.0)
    with pytest.raises(ConfigError):
        downsample(rec, 200.0)


def test_epoch_split_counts():
    # 16 minutes at 200 Hz -> 480 two-second epochs
    rec = make_recording(np.zeros((1, 16 * 60 * 200)))
    assert len(epoch_split(rec)) == 480
    assert len(epoch_split(make_recording(np.zeros((1, 700))))) == 1   # 3.5 s
    assert len(epoch_split(make_recording(np.zeros((1, 380))))) == 0   # 1.9 s


def test_epoch_split_carries_subject_and_shape():
    rec = make_recording(np.arange(2 * 1000, dtype=float).reshape(2, 1000),
                         subject="S42")
    eps = epoch_split(rec)
    assert len(eps) == 2
    assert all(e.subject_id == "S42" and e.data.shape == (2, 400) for e in eps)
    np.testing.assert_array_equal(eps[1].data, rec.data[:, 400:800])


# ---------------------------------------------------------------------------
# Welch PSD
# ---------------------------------------------------------------------------

def test_welch_peak_at_sine_frequency():
    x = sine(10.0, 2.5)
    est = welch_psd(x, FS)
    # Direct periodogram oracle: strongest bin nearest to 10 Hz.
    spec = np.abs(np.fft.rfft(x)) ** 2
    oracle_freq = np.fft.rfftfreq(len(x), 1 / FS)[np.argmax(spec)]
    peak = est.freqs[np.argmax(est.power[0])]
    bin_width = est.freqs[1] - est.freqs[0]
    assert abs(peak - oracle_freq) <= bin_width / 2 + 1e-9
    assert abs(peak - 10.0) <= bin_width / 2 + 1e-9


def test_welch_zero_signal():
    est = welch_psd(np.zeros(500), FS)
    assert np.all(est.power == 0.0)


def test_welch_freq_grid_and_nonnegative():
    est = welch_psd(np.random.default_rng(0).normal(size=(3, 500)), FS)
    assert est.freqs[0] == 0.0
    assert est.freqs[-1] == FS / 2
    assert np.all(np.diff(est.freqs) > 0)
    assert np.all(est.power >= 0.0)
    assert est.power.shape == (3, len(est.freqs))


def test_welch_parseval_stationary_signals():
    t = np.arange(12000) / FS
    x = (3 * np.sin(2 * np.pi * 7 * t)
         + 1.5 * np.sin(2 * np.pi * 23.3 * t + 0.7)
         + np.random.default_rng(5).normal(0, 1, t.size))
    est = welch_psd(x, FS)
    df = est.freqs[1] - est.freqs[0]
    total = est.power.sum() * df
    assert abs(total / np.mean(x ** 2) - 1.0) < 0.01

    noise = np.random.default_rng(11).normal(0, 2.0, 60000)
    est = welch_psd(noise, FS)
    total = est.power.sum() * df
    assert abs(total / np.mean(noise ** 2) - 1.0) < 0.01


def test_welch_white_noise_flat_spectrum():
    # Average 100 seeds; interior bins stay within +-3 dB of their mean.
    # (DC and Nyquist sit at half level by the one-sided convention.)
    acc = None
    for seed in range(100):
        x = np.random.default_rng(seed).normal(0, 1, 500)
        est = welch_psd(x, FS)
        acc = est.power[0] if acc is None else acc + est.power[0]
    inner = acc[1:-1] / 100
    db = 10 * np.log10(inner / inner.mean())
    assert np.all(np.abs(db) < 3.0)


# ---------------------------------------------------------------------------
# Band powers
# ---------------------------------------------------------------------------

def test_band_power_pure_alpha():
    P = relative_band_power(sine(10.0, 2.5), FS)
    assert P.shape == (5, 1)
    assert P[2, 0] > 0.95  # Alpha is index 2


def test_band_power_pure_delta_argmax():
    P = relative_band_power(sine(2.0, 2.5), FS)
    assert int(np.argmax(P[:, 0])) == 0


def test_band_power_sums_to_one():
    epoch = np.random.default_rng(3).normal(size=(19, 500))
    P = relative_band_power(epoch, FS)
    np.testing.assert_allclose(P.sum(axis=0), 1.0, atol=1e-12)


def test_band_power_zero_channel_uniform_convention():
    epoch = np.zeros((2, 500))
    epoch[1] = sine(10.0, 2.5)
    P = relative_band_power(epoch, FS)
    np.testing.assert_allclose(P[:, 0], 0.2)


def test_band_defs_validated():
    with pytest.raises(ConfigError):
        BandDef("bad", 5.0, 5.0)
    with pytest.raises(ConfigError):
        relative_band_power(np.zeros((1, 500)), FS,
                            bands=[BandDef("A", 1, 10), BandDef("B", 5, 20)])


def test_default_band_edges():
    edges = [(b.name, b.lo, b.hi) for b in DEFAULT_BANDS]
    assert edges == [("Delta", 1, 4), ("Theta", 4, 8), ("Alpha", 8, 13),
                     ("Beta", 13, 30), ("Gamma", 30, 45)]


# ---------------------------------------------------------------------------
# RMSE and PSD attenuation
# ---------------------------------------------------------------------------

def test_rmse_identities():
    x = np.random.default_rng(0).normal(size=(19, 500))
    assert rmse(x, x) == 0.0
    assert abs(rmse(x, x + 3.5) - 3.5) < 1e-12
    with pytest.raises(DimensionError):
        rmse(x, x[:, :100])


def test_rmse_accepts_epochs():
    x = np.random.default_rng(1).normal(size=(3, 100))
    assert rmse(Epoch(data=x), Epoch(data=x.copy())) == 0.0


def test_psd_attenuation_identity_is_zero_db():
    stack = np.random.default_rng(2).normal(size=(4, 3, 500))
    freqs, atten = psd_attenuation(stack, stack, FS)
    assert atten.shape == freqs.shape
    np.testing.assert_allclose(atten, 0.0, atol=1e-9)


def test_psd_attenuation_detects_highpass_loss():
    # Outputs with the 30+ Hz content removed must show negative dB up high.
    rng = np.random.default_rng(4)
    inputs = np.stack([rng.normal(size=(3, 500)) for _ in range(6)])
    outputs = np.stack([bandpass_array(ep, FS, lo=1.0, hi=20.0) for ep in inputs])
    freqs, atten = psd_attenuation(inputs, outputs, FS)
    hi_band = atten[(freqs >= 30) & (freqs <= 45)]
    lo_band = atten[(freqs >= 2) & (freqs <= 8)]
    assert hi_band.mean() < -20.0
    assert abs(lo_band.mean()) < 3.0
