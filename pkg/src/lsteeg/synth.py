"""Synthetic EEG and artifact generation.

Stands in for real recordings at desk scale: band-limited oscillations plus
pink noise per channel, near-identity spatial mixing for inter-channel
correlation, EOG contamination as an exact per-channel linear combination,
and three epoch-level artifact injectors (muscle burst, amplitude jump,
frontal blink). Everything is a pure function of (spec, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ._validation import as_f64
from .dataset import CLEAN, NOISY, EpochDataset
from .errors import ConfigError, DimensionError
from .signal import (CHANNEL_ROW, CHANNELS_1020, DEFAULT_BANDS, Epoch,
                     Recording, bandpass, bandpass_array, epoch_split)

__all__ = [
    "SyntheticSpec", "EogCoefficients", "default_eog_coefficients",
    "gen_clean", "gen_eog", "contaminate_eog", "inject_artifacts",
    "split_by_subject", "generate_dataset", "epochs_from_recordings",
]

# Per-band sinusoid amplitude ranges in microvolts. Sized so that coherent
# summation through the near-identity spatial mixing stays inside the
# physiological +-100 uV envelope.
DEFAULT_BAND_AMPLITUDES = {
    "Delta": (4.0, 8.0),
    "Theta": (3.0, 6.0),
    "Alpha": (4.0, 8.0),
    "Beta": (2.0, 4.0),
    "Gamma": (1.0, 2.0),
}


@dataclass
class SyntheticSpec:
    """Knobs for the clean-EEG generator and the artifact injectors.

    Artifact rates are events per minute; for 2-second epochs an injector
    fires with probability rate/30 per epoch (capped at 1).
    """
    n_subjects: int = 10
    seconds_per_subject: float = 120.0
    sample_rate: float = 200.0
    band_amplitudes: dict = field(default_factory=lambda: dict(DEFAULT_BAND_AMPLITUDES))
    pink_exponent: float = 1.0
    noise_rms: float = 3.0
    occipital_alpha_gain: float = 2.0
    mixing_seed: int = 0
    blink_rate: float = 6.0
    saccade_rate: float = 4.0
    muscle_rate: float = 4.0
    jump_rate: float = 2.0
    target_leak_fraction: float = 0.0

    def __post_init__(self):
        if self.n_subjects < 1:
            raise ConfigError("n_subjects must be >= 1")
        if self.seconds_per_subject <= 0 or self.sample_rate <= 0:
            raise ConfigError("durations and rates must be positive")
        for name, (lo, hi) in self.band_amplitudes.items():
            if lo < 0 or hi < lo:
                raise ConfigError(f"band amplitude range for {name} must be 0 <= lo <= hi")
        for name in ("blink_rate", "saccade_rate", "muscle_rate", "jump_rate"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0.0 <= self.target_leak_fraction <= 1.0:
            raise ConfigError("target_leak_fraction must be in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["band_amplitudes"] = {k: list(v) for k, v in self.band_amplitudes.items()}
        return d


@dataclass
class EogCoefficients:
    """Per-channel EOG propagation weights (a: VEOG, b: HEOG)."""
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = as_f64(self.a, "a")
        self.b = as_f64(self.b, "b")
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise DimensionError("a and b must be vectors of equal length")


def _lateral_sign(label: str) -> float:
    # Odd 10-20 indices are left hemisphere, even are right, z is midline.
    tail = label[-1]
    if tail.lower() == "z":
        return 0.0
    return 1.0 if int(tail) % 2 == 1 else -1.0


def default_eog_coefficients(channels: list[str] | None = None,
                             a_max: float = 0.8, b_max: float = 0.4,
                             tau_rows: float = 1.5) -> EogCoefficients:
    """Frontal-dominant exponential decay over scalp rows.

    VEOG weights fall off with distance from the frontal line; HEOG weights
    do the same but flip sign across hemispheres (and vanish on the midline),
    mimicking horizontal eye-movement topography.
    """
    channels = CHANNELS_1020 if channels is None else channels
    rows = np.array([CHANNEL_ROW[ch] for ch in channels], dtype=float)
    decay = np.exp(-rows / tau_rows)
    a = a_max * decay
    b = b_max * decay * np.array([_lateral_sign(ch) for ch in channels])
    return EogCoefficients(a=a, b=b)


# ---------------------------------------------------------------------------
# Clean EEG
# ---------------------------------------------------------------------------

def _pink_noise(rng: np.random.Generator, n: int, exponent: float, rms: float) -> np.ndarray:
    white = rng.normal(size=n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    scale = np.zeros_like(freqs)
    scale[1:] = freqs[1:] ** (-exponent / 2.0)
    x = np.fft.irfft(spec * scale, n=n)
    sd = x.std()
    return x * (rms / sd) if sd > 0 else x


def _analysis_hi(sample_rate: float) -> float:
    # 45 Hz bandwidth where the rate allows, else just under Nyquist.
    return min(45.0, 0.45 * sample_rate)


def _mixing_matrix(n_channels: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), 0])
    m = rng.uniform(0.0, 0.2, size=(n_channels, n_channels))
    np.fill_diagonal(m, 1.0)
    return m


def gen_clean(spec: SyntheticSpec, seed: int) -> list[Recording]:
    """One clean Recording per subject, bandpassed to the analysis bandwidth.

    Each subject gets one carrier frequency and reference phase per band
    (rhythms are spatially coherent, as volume conduction makes them);
    every channel contributes that oscillation with its own amplitude
    (occipital channels get extra alpha) and a small phase offset, plus
    independent pink noise. Channels are then blended by a shared
    near-identity mixing matrix for realistic inter-channel correlation.
    """
    fs = spec.sample_rate
    hi = _analysis_hi(fs)
    n = int(round(spec.seconds_per_subject * fs))
    t = np.arange(n) / fs
    channels = CHANNELS_1020
    occipital = {"O1", "O2"}
    mix = _mixing_matrix(len(channels), spec.mixing_seed)

    recordings = []
    for s in range(spec.n_subjects):
        rng = np.random.default_rng([int(seed), 1, s])
        carriers = []
        for band in DEFAULT_BANDS:
            band_hi = min(band.hi, hi)
            if band.lo >= band_hi:
                continue  # band sits above the analysis bandwidth
            carriers.append((band.name,
                             rng.uniform(band.lo, band_hi),
                             rng.uniform(0.0, 2.0 * math.pi)))
        data = np.zeros((len(channels), n))
        for c, label in enumerate(channels):
            x = np.zeros(n)
            for name, freq, phase in carriers:
                lo_amp, hi_amp = spec.band_amplitudes.get(name, (0.0, 0.0))
                amp = rng.uniform(lo_amp, hi_amp)
                if name == "Alpha" and label in occipital:
                    amp *= spec.occipital_alpha_gain
                jitter = rng.uniform(-0.5, 0.5)
                x += amp * np.sin(2.0 * math.pi * freq * t + phase + jitter)
            x += _pink_noise(rng, n, spec.pink_exponent, spec.noise_rms)
            data[c] = x
        rec = Recording(subject_id=f"S{s:03d}", sample_rate=fs,
                        data=mix @ data, channels=list(channels))
        recordings.append(bandpass(rec, 1.0, hi))
    return recordings


# ---------------------------------------------------------------------------
# EOG traces and contamination
# ---------------------------------------------------------------------------

def _blink_pulse(length: int, amp: float) -> np.ndarray:
    # Raised-cosine bump: zero at the edges, peak amplitude in the middle.
    k = np.arange(length)
    return amp * 0.5 * (1.0 - np.cos(2.0 * math.pi * k / max(1, length - 1)))


def _saccade_pulse(length: int, amp: float, fs: float) -> np.ndarray:
    ramp = min(int(0.05 * fs), max(1, length // 4))
    pulse = np.full(length, amp)
    edge = 0.5 * (1.0 - np.cos(math.pi * np.arange(ramp) / ramp))
    pulse[:ramp] = amp * edge
    pulse[-ramp:] = amp * edge[::-1]
    return pulse


def _place_events(rng: np.random.Generator, n: int, count: int,
                  dur_lo: float, dur_hi: float, fs: float):
    """Non-overlapping (start, length) windows; overlapping draws are
    re-sampled so summed pulses cannot exceed the single-event amplitude."""
    placed: list[tuple[int, int]] = []
    attempts = 0
    while len(placed) < count and attempts < 200 * max(1, count):
        attempts += 1
        length = int(rng.uniform(dur_lo, dur_hi) * fs)
        if length >= n:
            continue
        start = int(rng.integers(0, n - length))
        if all(start + length <= s or start >= s + l for s, l in placed):
            placed.append((start, length))
    return placed


def gen_eog(seed: int, seconds: float, rate_blinks: float, rate_saccades: float,
            sample_rate: float = 200.0) -> tuple[np.ndarray, np.ndarray]:
    """Single-channel VEOG (blink bumps) and HEOG (saccade steps) traces.

    Event counts are Poisson in the requested rates; events never overlap.
    Both traces pass through the 1-45 Hz bandpass, so pulse shapes carry a
    little filter overshoot.
    """
    if rate_blinks < 0 or rate_saccades < 0:
        raise ConfigError("event rates must be >= 0")
    fs = sample_rate
    n = int(round(seconds * fs))
    rng = np.random.default_rng([int(seed), 2])
    veog = np.zeros(n)
    heog = np.zeros(n)

    n_blinks = rng.poisson(rate_blinks * seconds / 60.0)
    for start, length in _place_events(rng, n, n_blinks, 0.2, 0.4, fs):
        veog[start:start + length] += _blink_pulse(length, rng.uniform(100.0, 400.0))

    n_sacc = rng.poisson(rate_saccades * seconds / 60.0)
    for start, length in _place_events(rng, n, n_sacc, 0.3, 0.8, fs):
        amp = rng.uniform(50.0, 150.0) * (1.0 if rng.random() < 0.5 else -1.0)
        heog[start:start + length] += _saccade_pulse(length, amp, fs)

    hi = _analysis_hi(fs)
    if n_blinks:
        veog = bandpass_array(veog, fs, 1.0, hi)
    if n_sacc:
        heog = bandpass_array(heog, fs, 1.0, hi)
    return veog, heog


def contaminate_eog(rec: Recording, veog: np.ndarray, heog: np.ndarray,
                    coeffs: EogCoefficients) -> Recording:
    """Exact linear EOG mix-in: channel j becomes x_j + a_j*VEOG + b_j*HEOG."""
    veog = as_f64(veog, "veog")
    heog = as_f64(heog, "heog")
    if veog.shape != (rec.n_samples,) or heog.shape != (rec.n_samples,):
        raise DimensionError("veog/heog must be single-channel, same length as rec")
    if coeffs.a.shape[0] != rec.data.shape[0]:
        raise DimensionError("coefficient length must equal channel count")
    data = rec.data + np.outer(coeffs.a, veog) + np.outer(coeffs.b, heog)
    return rec.replace_data(data)


# ---------------------------------------------------------------------------
# Epoch-level artifact injection
# ---------------------------------------------------------------------------

def _inject_muscle(rng, data: np.ndarray, fs: float) -> None:
    n_ch, n_t = data.shape
    length = int(rng.uniform(0.25, 0.5) * fs)
    length = min(length, n_t - 1)
    start = int(rng.integers(0, n_t - length))
    width = int(rng.integers(3, 8))
    first = int(rng.integers(0, max(1, n_ch - width + 1)))
    gain = rng.uniform(3.0, 8.0)
    window = np.hanning(length)
    for c in range(first, min(first + width, n_ch)):
        noise = rng.normal(size=length + 200)
        burst = bandpass_array(noise, fs, 20.0, min(45.0, fs / 2 - 1.0))[100:100 + length]
        burst *= window
        local_rms = float(np.sqrt(np.mean(data[c, start:start + length] ** 2))) or 1.0
        burst_rms = float(np.sqrt(np.mean(burst ** 2))) or 1.0
        data[c, start:start + length] += burst * (gain * local_rms / burst_rms)


def _inject_jump(rng, data: np.ndarray) -> None:
    n_ch, n_t = data.shape
    for c in rng.choice(n_ch, size=int(rng.integers(1, 3)), replace=False):
        offset = rng.uniform(200.0, 1000.0) * (1.0 if rng.random() < 0.5 else -1.0)
        onset = int(rng.integers(0, n_t - 1))
        data[c, onset:] += offset


def _inject_blink(rng, data: np.ndarray, fs: float, coeffs: EogCoefficients) -> None:
    n_t = data.shape[1]
    length = min(int(rng.uniform(0.2, 0.4) * fs), n_t - 1)
    start = int(rng.integers(0, n_t - length))
    veog = np.zeros(n_t)
    veog[start:start + length] = _blink_pulse(length, rng.uniform(100.0, 400.0))
    data += np.outer(coeffs.a, veog)


def inject_artifacts(epochs: list[Epoch], spec: SyntheticSpec, seed: int) -> EpochDataset:
    """Contaminate a fraction of epochs, keeping pre-injection targets.

    Each injector fires independently per epoch with probability
    rate * epoch_seconds / 60. Untouched epochs become clean pairs whose
    target equals the input. With ``target_leak_fraction`` > 0, that share
    of injected epochs keeps the artifact in the target as well (emulating
    imperfectly cleaned training targets); those pairs are labeled clean
    because input and target coincide.
    """
    if not epochs:
        raise ConfigError("no epochs to inject into")
    fs = spec.sample_rate
    n_t = epochs[0].data.shape[1]
    epoch_seconds = n_t / fs
    p_scale = epoch_seconds / 60.0
    p_muscle = min(1.0, spec.muscle_rate * p_scale)
    p_jump = min(1.0, spec.jump_rate * p_scale)
    p_blink = min(1.0, spec.blink_rate * p_scale)
    coeffs = default_eog_coefficients(CHANNELS_1020[:epochs[0].data.shape[0]]) \
        if epochs[0].data.shape[0] <= len(CHANNELS_1020) else None

    rng = np.random.default_rng([int(seed), 3])
    inputs, targets, labels, subjects = [], [], [], []
    for ep in epochs:
        clean = ep.data.copy()
        noisy = ep.data.copy()
        hit = False
        if rng.random() < p_muscle:
            _inject_muscle(rng, noisy, fs)
            hit = True
        if rng.random() < p_jump:
            _inject_jump(rng, noisy)
            hit = True
        if coeffs is not None and rng.random() < p_blink:
            _inject_blink(rng, noisy, fs, coeffs)
            hit = True
        if hit and rng.random() < spec.target_leak_fraction:
            clean = noisy.copy()  # leaked: artifact survives in the target
        inputs.append(noisy)
        targets.append(clean)
        labels.append(NOISY if np.any(noisy != clean) else CLEAN)
        subjects.append(ep.subject_id)
    return EpochDataset(
        inputs=np.stack(inputs), targets=np.stack(targets), labels=labels,
        subject_ids=subjects, partitions=[""] * len(inputs),
        sample_rate=fs, spec=spec.to_dict(),
    )


# ---------------------------------------------------------------------------
# Subject-level split and orchestration
# ---------------------------------------------------------------------------

def _largest_remainder(n: int, fractions: tuple[float, ...]) -> list[int]:
    raw = [n * f for f in fractions]
    counts = [int(math.floor(r)) for r in raw]
    short = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def split_by_subject(ds: EpochDataset, fractions=(0.6, 0.2, 0.2),
                     seed: int = 0) -> EpochDataset:
    """Assign whole subjects to train/val/test by shuffled largest-remainder."""
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError("fractions must be three values summing to 1")
    subjects = ds.subjects()
    if len(subjects) < 5:
        raise ConfigError(f"need at least 5 subjects to stratify, got {len(subjects)}")
    rng = np.random.default_rng([int(seed), 4])
    shuffled = list(subjects)
    rng.shuffle(shuffled)
    counts = _largest_remainder(len(shuffled), tuple(fractions))
    assignment: dict[str, str] = {}
    pos = 0
    for part, cnt in zip(("train", "val", "test"), counts):
        for s in shuffled[pos:pos + cnt]:
            assignment[s] = part
        pos += cnt
    return EpochDataset(
        inputs=ds.inputs.copy(), targets=ds.targets.copy(), labels=list(ds.labels),
        subject_ids=list(ds.subject_ids),
        partitions=[assignment[s] for s in ds.subject_ids],
        sample_rate=ds.sample_rate, spec=ds.spec,
    )


def epochs_from_recordings(recs: list[Recording], seconds: float = 2.0) -> list[Epoch]:
    out: list[Epoch] = []
    for rec in recs:
        out.extend(epoch_split(rec, seconds))
    return out


def generate_dataset(spec: SyntheticSpec, seed: int,
                     fractions=(0.6, 0.2, 0.2), epoch_seconds: float = 2.0) -> EpochDataset:
    """gen_clean -> epoch -> inject artifacts -> subject split, one call."""
    recs = gen_clean(spec, seed)
    epochs = epochs_from_recordings(recs, epoch_seconds)
    ds = inject_artifacts(epochs, spec, seed)
    return split_by_subject(ds, fractions=fractions, seed=seed)
