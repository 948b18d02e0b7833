"""LSTM autoencoder toolkit for multi-channel EEG artifact detection and
correction, with a synthetic data generator and latent-space analysis."""

from .errors import (ChecksumError, ConfigError, DimensionError,
                     FileFormatError, LsteegError, NumericError,
                     UndefinedMetricError, UsageError, VersionMismatchError)
from .model import LsteegConfig, LsteegModel, build
from .estimator import LsteegAutoencoder
from .metrics import MetricReport, RocCurve, roc_auc, select_threshold
from .signal import (CHANNELS_1020, BandDef, DEFAULT_BANDS, Epoch, PsdEstimate,
                     Recording, bandpass, downsample, epoch_split,
                     psd_attenuation, relative_band_power, rmse, welch_psd)
from .synth import (EogCoefficients, SyntheticSpec, contaminate_eog,
                    default_eog_coefficients, gen_clean, gen_eog,
                    generate_dataset, inject_artifacts, split_by_subject)
from .dataset import EpochDataset
from .training import (TrainConfig, correct_epochs, detect_scores,
                       evaluate_correction, sweep, train)
from .latent import (cumulative_activation, interpolate, mads,
                     spectral_activation, temporal_activation)

__version__ = "0.1.0"

__all__ = [
    "LsteegAutoencoder", "LsteegConfig", "LsteegModel", "build",
    "MetricReport", "RocCurve", "roc_auc", "select_threshold",
    "BandDef", "DEFAULT_BANDS", "CHANNELS_1020", "Epoch", "PsdEstimate",
    "Recording", "bandpass", "downsample", "epoch_split", "psd_attenuation",
    "relative_band_power", "rmse", "welch_psd",
    "EogCoefficients", "SyntheticSpec", "contaminate_eog",
    "default_eog_coefficients", "gen_clean", "gen_eog", "generate_dataset",
    "inject_artifacts", "split_by_subject",
    "EpochDataset", "TrainConfig", "correct_epochs", "detect_scores",
    "evaluate_correction", "sweep", "train",
    "cumulative_activation", "interpolate", "mads", "spectral_activation",
    "temporal_activation",
    "LsteegError", "ConfigError", "DimensionError", "NumericError",
    "UsageError", "UndefinedMetricError", "FileFormatError",
    "ChecksumError", "VersionMismatchError",
]
