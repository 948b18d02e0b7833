"""Signal-processing conventions: filtering, resampling, epoching, PSD.

All amplitudes are microvolts, all data float64. Filtering is zero-phase
(forward-backward second-order sections) so waveforms stay aligned with
their originals for comparison plots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from ._validation import as_f64, check_finite
from .errors import ConfigError, DimensionError, NumericError

__all__ = [
    "CHANNELS_1020", "CHANNEL_ROW", "Recording", "Epoch", "BandDef",
    "DEFAULT_BANDS", "PsdEstimate", "bandpass", "bandpass_array",
    "downsample", "epoch_split", "welch_psd", "relative_band_power",
    "rmse", "psd_attenuation",
]

# The 19 standard 10-20 electrodes, frontal to occipital.
CHANNELS_1020 = [
    "Fp1", "Fp2",
    "F7", "F3", "Fz", "F4", "F8",
    "T3", "C3", "Cz", "C4", "T4",
    "T5", "P3", "Pz", "P4", "T6",
    "O1", "O2",
]

# Row index front (0) to back (4); used for EOG propagation profiles.
CHANNEL_ROW = {
    "Fp1": 0, "Fp2": 0,
    "F7": 1, "F3": 1, "Fz": 1, "F4": 1, "F8": 1,
    "T3": 2, "C3": 2, "Cz": 2, "C4": 2, "T4": 2,
    "T5": 3, "P3": 3, "Pz": 3, "P4": 3, "T6": 3,
    "O1": 4, "O2": 4,
}


@dataclass
class Recording:
    """A continuous multi-channel recording in microvolts."""
    subject_id: str
    sample_rate: float
    data: np.ndarray  # (n_channels, n_samples)
    channels: list[str] = field(default_factory=lambda: list(CHANNELS_1020))

    def __post_init__(self):
        self.data = as_f64(self.data, "recording data")
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channels):
            raise DimensionError(
                f"recording data {self.data.shape} does not match "
                f"{len(self.channels)} channels")
        if len(set(self.channels)) != len(self.channels):
            raise ConfigError("channel labels must be unique")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def replace_data(self, data: np.ndarray, sample_rate: float | None = None) -> "Recording":
        return Recording(subject_id=self.subject_id,
                         sample_rate=self.sample_rate if sample_rate is None else sample_rate,
                         data=data, channels=list(self.channels))


@dataclass
class Epoch:
    """A fixed-length segment of a recording; the unit fed to the model."""
    data: np.ndarray  # (n_channels, n_samples)
    subject_id: str = ""

    def __post_init__(self):
        self.data = as_f64(self.data, "epoch data")
        if self.data.ndim != 2:
            raise DimensionError("epoch data must be 2-d (channels, samples)")


@dataclass(frozen=True)
class BandDef:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi:
            raise ConfigError(f"band {self.name}: need 0 < lo < hi")


# Conventional edges; the top band ends at the 45 Hz analysis bandwidth.
DEFAULT_BANDS = [
    BandDef("Delta", 1.0, 4.0),
    BandDef("Theta", 4.0, 8.0),
    BandDef("Alpha", 8.0, 13.0),
    BandDef("Beta", 13.0, 30.0),
    BandDef("Gamma", 30.0, 45.0),
]


@dataclass
class PsdEstimate:
    freqs: np.ndarray   # strictly increasing, 0 .. Nyquist
    power: np.ndarray   # (n_channels, n_freqs), uV^2/Hz, >= 0


def _epoch_data(x) -> np.ndarray:
    if isinstance(x, Epoch):
        return x.data
    return as_f64(x)


# ---------------------------------------------------------------------------
# Filtering and resampling
# ---------------------------------------------------------------------------

def _check_sos_stable(sos: np.ndarray) -> np.ndarray:
    for section in sos:
        poles = np.roots(section[3:])
        if np.any(np.abs(poles) >= 1.0):
            raise NumericError("unstable filter section (pole on/outside unit circle)")
    return sos


def bandpass_array(data: np.ndarray, sample_rate: float,
                   lo: float = 1.0, hi: float = 45.0, order: int = 8) -> np.ndarray:
    """Zero-phase Butterworth bandpass along the last axis."""
    data = as_f64(data)
    nyq = sample_rate / 2.0
    if not 0.0 < lo < hi < nyq:
        raise ConfigError(f"bandpass edges ({lo}, {hi}) must satisfy 0 < lo < hi < {nyq}")
    sos = sps.butter(order, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
    _check_sos_stable(sos)
    out = sps.sosfiltfilt(sos, data, axis=-1)
    return check_finite(out, "bandpass output")


def bandpass(rec: Recording, lo: float = 1.0, hi: float = 45.0,
             order: int = 8) -> Recording:
    return rec.replace_data(bandpass_array(rec.data, rec.sample_rate, lo, hi, order))


def downsample(rec: Recording, target_hz: float = 200.0) -> Recording:
    """Anti-alias lowpass (cutoff 0.4 * target) then keep every k-th sample."""
    ratio = rec.sample_rate / target_hz
    k = int(round(ratio))
    if abs(ratio - k) > 1e-9 or k < 1:
        raise ConfigError(
            f"source rate {rec.sample_rate} is not an integer multiple of {target_hz}")
    if k == 1:
        return rec.replace_data(rec.data.copy())
    sos = sps.butter(8, 0.4 * target_hz, btype="lowpass", fs=rec.sample_rate,
                     output="sos")
    _check_sos_stable(sos)
    filtered = sps.sosfiltfilt(sos, rec.data, axis=-1)
    return rec.replace_data(filtered[:, ::k], sample_rate=target_hz)


def epoch_split(rec: Recording, seconds: float = 2.0) -> list[Epoch]:
    """Non-overlapping fixed-length epochs; the tail remainder is dropped."""
    if seconds <= 0:
        raise ConfigError("epoch length must be positive")
    n_t = int(round(seconds * rec.sample_rate))
    n_epochs = rec.n_samples // n_t
    return [Epoch(data=rec.data[:, k * n_t:(k + 1) * n_t].copy(),
                  subject_id=rec.subject_id)
            for k in range(n_epochs)]


# ---------------------------------------------------------------------------
# Spectral estimation
# ---------------------------------------------------------------------------

def welch_psd(x, sample_rate: float, seg: int = 256, overlap: float = 0.5) -> PsdEstimate:
    """Averaged Hann-windowed periodograms, one-sided.

    Segments step by ``seg * (1 - overlap)``; a final partial segment of at
    least half a window is windowed at its true length and zero-padded to
    ``seg`` so the frequency grid stays uniform. Each segment is normalized
    by its own window power, which keeps total power ~= signal variance
    (Parseval) for stationary inputs.
    """
    data = _epoch_data(x)
    one_d = data.ndim == 1
    if one_d:
        data = data[None, :]
    if data.ndim != 2:
        raise DimensionError("welch_psd expects a channel vector or (C, T) epoch")
    if not 0.0 <= overlap < 1.0:
        raise ConfigError("overlap must be in [0, 1)")
    n = data.shape[1]
    hop = max(1, int(round(seg * (1.0 - overlap))))
    starts = [s for s in range(0, n, hop) if n - s >= max(2, seg // 2)]
    if not starts:
        starts = [0]  # signal shorter than half a window: single padded segment

    n_freq = seg // 2 + 1
    acc = np.zeros((data.shape[0], n_freq))
    for s in starts:
        chunk = data[:, s:s + seg]
        length = chunk.shape[1]
        window = np.hanning(length)
        wss = float(np.sum(window ** 2))
        spec = np.fft.rfft(chunk * window, n=seg, axis=1)
        p = (spec.real ** 2 + spec.imag ** 2) / (sample_rate * wss)
        p[:, 1:-1] *= 2.0  # fold negative frequencies; DC and Nyquist stay single
        acc += p
    power = acc / len(starts)
    freqs = np.fft.rfftfreq(seg, d=1.0 / sample_rate)
    return PsdEstimate(freqs=freqs, power=power)


def relative_band_power(epoch, sample_rate: float,
                        bands: list[BandDef] | None = None,
                        seg: int = 256, overlap: float = 0.5) -> np.ndarray:
    """Per-channel band powers normalized to sum to 1 over the bands.

    Returns a (n_bands, n_channels) matrix. Band intervals are half-open
    [lo, hi). A channel with no spectral power gets the uniform 1/n_bands
    convention instead of dividing by zero.
    """
    bands = DEFAULT_BANDS if bands is None else bands
    _check_bands(bands)
    est = welch_psd(epoch, sample_rate, seg=seg, overlap=overlap)
    n_ch = est.power.shape[0]
    out = np.empty((len(bands), n_ch))
    for b, band in enumerate(bands):
        sel = (est.freqs >= band.lo) & (est.freqs < band.hi)
        out[b] = est.power[:, sel].sum(axis=1)
    totals = out.sum(axis=0)
    for c in range(n_ch):
        if totals[c] <= 0.0:
            out[:, c] = 1.0 / len(bands)
        else:
            out[:, c] /= totals[c]
    return out


def _check_bands(bands: list[BandDef]) -> None:
    for prev, cur in zip(bands, bands[1:]):
        if cur.lo < prev.hi:
            raise ConfigError(f"bands {prev.name} and {cur.name} overlap or are unordered")


# ---------------------------------------------------------------------------
# Error metrics
# ---------------------------------------------------------------------------

def rmse(a, b) -> float:
    """Root mean squared elementwise difference, in microvolts."""
    da, db = _epoch_data(a), _epoch_data(b)
    if da.shape != db.shape:
        raise DimensionError(f"rmse: shapes differ, {da.shape} vs {db.shape}")
    return float(np.sqrt(np.mean((da - db) ** 2)))


def psd_attenuation(inputs: np.ndarray, outputs: np.ndarray, sample_rate: float,
                    seg: int = 256, overlap: float = 0.5):
    """Per-frequency output/input power ratio in dB.

    ``inputs`` and ``outputs`` are (n_epochs, C, T) stacks; the PSDs are
    averaged over epochs and channels before taking the ratio, so the curve
    describes the population, not any single epoch. Returns (freqs, dB).
    """
    inputs = as_f64(inputs)
    outputs = as_f64(outputs)
    if inputs.shape != outputs.shape:
        raise DimensionError("psd_attenuation: input/output stacks must match")
    if inputs.ndim == 2:
        inputs, outputs = inputs[None], outputs[None]

    def mean_psd(stack):
        acc = None
        for ep in stack:
            est = welch_psd(ep, sample_rate, seg=seg, overlap=overlap)
            p = est.power.mean(axis=0)
            acc = p if acc is None else acc + p
        return est.freqs, acc / stack.shape[0]

    freqs, p_in = mean_psd(inputs)
    _, p_out = mean_psd(outputs)
    tiny = np.finfo(np.float64).tiny
    atten = 10.0 * np.log10((p_out + tiny) / (p_in + tiny))
    return freqs, atten
