"""Latent-space interpretability tools.

All reductions run over eval-mode encodings f(x_e) of the given epochs:

* cumulative activation  A_j = sum_e |f_j(x_e)| and the most-activated
  dimensions (MADs) ranked by it,
* spectral activation    S[j, b, c] = sum_e P[b, c, e] * f_j(x_e), pairing
  relative band powers with encoding weights,
* temporal activation    alpha_j = sum_e x_e * f_j(x_e), an epoch-shaped
  average (beware destructive interference on non-time-locked data),
* linear latent interpolation between two epochs' embeddings.

S and alpha are linear in the encodings by construction. Epochs are encoded
exactly as given; apply any amplitude normalization used at training time
before calling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_epoch_batch
from .errors import ConfigError, DimensionError
from .model import LsteegModel
from .signal import BandDef, relative_band_power

__all__ = ["ActivationSummary", "cumulative_activation", "mads",
           "spectral_activation", "temporal_activation", "interpolate",
           "TOPOMAP_COORDS", "topomap_svg"]


@dataclass
class ActivationSummary:
    """Cumulative absolute activation per latent dimension, plus the
    dimension ranking (descending activation, ties by ascending index)."""
    activation: np.ndarray   # (n_latent,), >= 0
    order: np.ndarray        # (n_latent,) indices


def _encode_all(model: LsteegModel, epochs: np.ndarray) -> np.ndarray:
    x = check_epoch_batch(epochs, model.config.n_channels, model.config.n_samples)
    return model.encode(x)


def cumulative_activation(model: LsteegModel, epochs: np.ndarray) -> ActivationSummary:
    z = _encode_all(model, epochs)
    activation = np.sum(np.abs(z), axis=0)
    order = np.lexsort((np.arange(activation.size), -activation))
    return ActivationSummary(activation=activation, order=order)


def mads(summary: ActivationSummary, k: int) -> np.ndarray:
    """Indices of the K most activated latent dimensions."""
    if not 1 <= k <= summary.order.size:
        raise ConfigError(f"k must be in [1, {summary.order.size}]")
    return summary.order[:k].copy()


def spectral_activation(model: LsteegModel, epochs: np.ndarray,
                        sample_rate: float,
                        bands: list[BandDef] | None = None) -> np.ndarray:
    """Encoding-weighted band-power maps, shape (n_latent, n_bands, n_channels)."""
    x = check_epoch_batch(epochs, model.config.n_channels, model.config.n_samples)
    z = model.encode(x)                                # (n_epochs, n_latent)
    powers = np.stack([relative_band_power(ep, sample_rate, bands=bands)
                       for ep in x])                   # (n_epochs, n_bands, C)
    return np.einsum("ej,ebc->jbc", z, powers)


def temporal_activation(model: LsteegModel, epochs: np.ndarray, j: int) -> np.ndarray:
    """Epoch-shaped activation of latent dimension ``j``:
    the encoding-weighted sum of the input epochs themselves."""
    x = check_epoch_batch(epochs, model.config.n_channels, model.config.n_samples)
    if not 0 <= j < model.config.n_latent:
        raise DimensionError(f"latent dimension {j} out of range")
    z = model.encode(x)[:, j]                          # (n_epochs,)
    return np.tensordot(z, x, axes=(0, 0))


def interpolate(model: LsteegModel, x_a: np.ndarray, x_b: np.ndarray,
                m: int) -> list[np.ndarray]:
    """Decode M+1 evenly spaced points on the latent segment between two
    epochs' embeddings (lambda = 0, 1/M, ..., 1).

    The first entry is the reconstruction of ``x_a`` and the last the
    reconstruction of ``x_b``.
    """
    if m < 1:
        raise ConfigError("interpolation needs m >= 1 steps")
    z_a = model.encode(x_a)
    z_b = model.encode(x_b)
    lams = np.arange(m + 1) / m
    zs = np.stack([(1.0 - lam) * z_a + lam * z_b for lam in lams])
    decoded = model.decode(zs)
    return [decoded[i] for i in range(m + 1)]


# ---------------------------------------------------------------------------
# Topomap export
# ---------------------------------------------------------------------------

# Schematic 2-D scalp positions (x: left-right, y: front-back), unit circle.
TOPOMAP_COORDS = {
    "Fp1": (-0.31, 0.95), "Fp2": (0.31, 0.95),
    "F7": (-0.81, 0.59), "F3": (-0.45, 0.51), "Fz": (0.0, 0.50),
    "F4": (0.45, 0.51), "F8": (0.81, 0.59),
    "T3": (-1.00, 0.00), "C3": (-0.50, 0.00), "Cz": (0.0, 0.0),
    "C4": (0.50, 0.00), "T4": (1.00, 0.00),
    "T5": (-0.81, -0.59), "P3": (-0.45, -0.51), "Pz": (0.0, -0.50),
    "P4": (0.45, -0.51), "T6": (0.81, -0.59),
    "O1": (-0.31, -0.95), "O2": (0.31, -0.95),
}


def _diverging_color(v: float) -> str:
    """Blue (-1) through white (0) to red (+1)."""
    v = max(-1.0, min(1.0, v))
    if v >= 0:
        r, g, b = 255, int(255 * (1 - v)), int(255 * (1 - v))
    else:
        r, g, b = int(255 * (1 + v)), int(255 * (1 + v)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def topomap_svg(values: np.ndarray, channels: list[str], title: str = "") -> str:
    """A minimal SVG scalp map: one colored disc per channel at its fixed
    10-20 position, labeled, normalized to the largest absolute value."""
    values = np.asarray(values, dtype=float)
    if len(values) != len(channels):
        raise DimensionError("one value per channel required")
    scale = float(np.max(np.abs(values))) or 1.0
    size, radius = 360, 150
    cx = cy = size / 2
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<circle cx="{cx}" cy="{cy}" r="{radius + 14}" fill="none" '
        f'stroke="#444" stroke-width="2"/>',
    ]
    if title:
        parts.append(f'<text x="{cx}" y="18" font-size="13" '
                     f'text-anchor="middle">{title}</text>')
    for ch, v in zip(channels, values):
        if ch not in TOPOMAP_COORDS:
            raise ConfigError(f"no topomap position for channel {ch!r}")
        x, y = TOPOMAP_COORDS[ch]
        px = cx + x * radius
        py = cy - y * radius
        parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="13" '
                     f'fill="{_diverging_color(v / scale)}" stroke="#333"/>')
        parts.append(f'<text x="{px:.1f}" y="{py + 3.5:.1f}" font-size="8" '
                     f'text-anchor="middle">{ch}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
