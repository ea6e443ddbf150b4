"""Trials, score sets, and ROC / EER / AUC / precision-recall computation.

Scores are cosine similarities; a trial is accepted when its score is >= the
threshold. The sweep visits every distinct score plus -inf/+inf sentinels,
so the resulting (FAR, TPR) polyline starts at (1, 1) and ends at (0, 0).
For unit-norm embeddings this accept rule ranks identically to thresholding
the Euclidean distance, since d^2 = 2 - 2*cos.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MetricError, NumericError

GENUINE = "genuine"
IMPOSTOR = "impostor"


@dataclass(frozen=True)
class Trial:
    utterance_id: str
    claimed_id: str
    genuine: bool

    @property
    def label(self) -> str:
        return GENUINE if self.genuine else IMPOSTOR


@dataclass(frozen=True, eq=False)
class ScoreSet:
    trials: tuple[Trial, ...]
    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "scores", s)
        object.__setattr__(self, "trials", tuple(self.trials))
        if s.shape != (len(self.trials),):
            raise MetricError(f"{len(self.trials)} trials but {s.shape} scores")
        if not np.isfinite(s).all():
            raise NumericError("non-finite trial scores")

    @property
    def genuine_scores(self) -> np.ndarray:
        return self.scores[[t.genuine for t in self.trials]]

    @property
    def impostor_scores(self) -> np.ndarray:
        return self.scores[[not t.genuine for t in self.trials]]

    def __len__(self) -> int:
        return len(self.trials)


@dataclass(frozen=True, eq=False)
class RocSummary:
    thresholds: np.ndarray  # ascending, with -inf/+inf sentinels
    tpr: np.ndarray
    far: np.ndarray
    eer: float
    auc: float
    precision: np.ndarray
    recall: np.ndarray


def roc_points(genuine: np.ndarray, impostor: np.ndarray):
    """Threshold sweep over all distinct scores plus sentinels.

    Returns (thresholds, tpr, far) with tpr(t) = |genuine >= t| / |genuine|
    and far(t) = |impostor >= t| / |impostor|; both are non-increasing in t.
    """
    g = np.sort(np.asarray(genuine, dtype=np.float64))
    i = np.sort(np.asarray(impostor, dtype=np.float64))
    taus = np.concatenate(([-np.inf], np.unique(np.concatenate((g, i))), [np.inf]))
    tpr = (g.size - np.searchsorted(g, taus, side="left")) / g.size
    far = (i.size - np.searchsorted(i, taus, side="left")) / i.size
    return taus, tpr, far


def interpolate_eer(tpr: np.ndarray, far: np.ndarray) -> float:
    """Rate where FAR equals FRR, linearly interpolated between sweep points."""
    frr = 1.0 - tpr
    d = far - frr  # non-increasing from +1 to -1
    k = int(np.argmax(d <= 0.0))
    if d[k] == 0.0:
        return float(far[k])
    t = d[k - 1] / (d[k - 1] - d[k])
    return float(far[k - 1] + t * (far[k] - far[k - 1]))


def compute_roc(scores: ScoreSet) -> RocSummary:
    """Full sweep plus EER (interpolated), AUC (trapezoidal), and PR points."""
    g = scores.genuine_scores
    i = scores.impostor_scores
    if g.size == 0 or i.size == 0:
        raise MetricError(
            f"need at least one genuine and one impostor trial, got {g.size} genuine / {i.size} impostor"
        )
    taus, tpr, far = roc_points(g, i)
    eer = interpolate_eer(tpr, far)
    # Reversing the sweep gives FAR ascending for the area integral.
    auc = float(np.trapezoid(tpr[::-1], far[::-1]))
    tp = tpr * g.size
    fp = far * i.size
    predicted = tp + fp
    precision = np.where(predicted > 0, tp / np.maximum(predicted, 1e-300), 1.0)
    return RocSummary(
        thresholds=taus,
        tpr=tpr,
        far=far,
        eer=eer,
        auc=auc,
        precision=precision,
        recall=tpr.copy(),
    )
