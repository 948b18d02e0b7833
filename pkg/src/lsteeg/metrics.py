"""Detection metrics: ROC curves, AUC, threshold selection, report container.

Scores are reconstruction errors, so the positive ("noisy") class is the
high-score side. Tied scores are grouped into a single threshold step, which
makes the trapezoid AUC equal to the pairwise probability
P(score_noisy > score_clean) + 0.5 * P(tie).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_f64
from .errors import DimensionError, UndefinedMetricError

__all__ = ["RocCurve", "ThresholdSelection", "roc_auc", "select_threshold",
           "MetricReport"]


@dataclass
class RocCurve:
    """Operating points from threshold +inf down to the minimum score.

    ``thresholds[k]`` produces point ``(fpr[k+1], tpr[k+1])`` under the rule
    "classify noisy when score >= threshold"; index 0 is the (0, 0) corner.
    """
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


@dataclass
class ThresholdSelection:
    threshold: float
    tpr: float
    fpr: float
    degenerate: bool = False  # all scores identical: threshold is arbitrary


def roc_auc(scores, labels) -> RocCurve:
    """ROC curve and trapezoid AUC for noisy-vs-clean scores.

    ``labels`` are truthy for noisy epochs. Both classes must be present.
    """
    scores = as_f64(scores, "scores").ravel()
    labels = np.asarray(labels).astype(bool).ravel()
    if scores.shape != labels.shape:
        raise DimensionError("scores and labels must have equal length")
    n_pos = int(labels.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            "AUC undefined: need both noisy and clean examples")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # Group equal scores into one step: take cumulative counts at the last
    # occurrence of each distinct value.
    distinct = np.flatnonzero(np.append(np.diff(s) != 0.0, True))
    tp = np.cumsum(y)[distinct]
    fp = np.cumsum(~y)[distinct]
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=s[distinct], auc=auc)


def select_threshold(roc: RocCurve, method: str = "youden") -> ThresholdSelection:
    """Pick an operating threshold from a ROC curve.

    Youden's J maximizes TPR - FPR; ties break toward the lower-FPR point.
    If the curve has a single step (all scores equal) the choice is
    meaningless and the result is flagged degenerate.
    """
    if method != "youden":
        raise UndefinedMetricError(f"unknown threshold method {method!r}")
    j = roc.tpr[1:] - roc.fpr[1:]
    best = None
    for k in range(len(j)):
        if best is None or j[k] > j[best] + 1e-15 or \
                (abs(j[k] - j[best]) <= 1e-15 and roc.fpr[k + 1] < roc.fpr[best + 1]):
            best = k
    return ThresholdSelection(
        threshold=float(roc.thresholds[best]),
        tpr=float(roc.tpr[best + 1]), fpr=float(roc.fpr[best + 1]),
        degenerate=len(roc.thresholds) == 1,
    )


@dataclass
class MetricReport:
    """Everything a training / evaluation run wants to persist."""
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stopped_epoch: int = -1
    rmse_mean: float | None = None
    rmse_sd: float | None = None
    auc: float | None = None
    threshold: float | None = None
    roc: RocCurve | None = None
    attenuation_freqs: np.ndarray | None = None
    attenuation_db: np.ndarray | None = None

    def summary_dict(self) -> dict:
        out = {
            "epochs_run": len(self.train_loss),
            "best_epoch": self.best_epoch,
            "final_train_loss": self.train_loss[-1] if self.train_loss else None,
            "best_val_loss": (min(self.val_loss) if self.val_loss else None),
        }
        for key in ("rmse_mean", "rmse_sd", "auc", "threshold"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out
