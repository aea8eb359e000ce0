"""Window-level k-fold and patient-level leave-one-subject-out evaluation."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classifiers import ClassifierSpec, Dataset, fit_classifier
from .errors import BadKError, EmptyConfusionError, SingleClassTrainingError, TooFewRowsError
from .record_io import Label

DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fn + other.fn, self.tn + other.tn, self.fp + other.fp
        )

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionCounts":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(
            tp=int(np.sum(t & p)),
            fn=int(np.sum(t & ~p)),
            tn=int(np.sum(~t & ~p)),
            fp=int(np.sum(~t & p)),
        )


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class Metrics:
    """Sensitivity, selectivity (PPV), specificity, accuracy; ``None`` when undefined."""

    sen: Optional[float]
    sel: Optional[float]
    spe: Optional[float]
    acc: float


def metrics_from_confusion(c: ConfusionCounts) -> Metrics:
    if c.total <= 0:
        raise EmptyConfusionError("no evaluated samples")
    return Metrics(
        sen=_ratio(c.tp, c.tp + c.fn),
        sel=_ratio(c.tp, c.tp + c.fp),
        spe=_ratio(c.tn, c.tn + c.fp),
        acc=(c.tp + c.tn) / c.total,
    )


@dataclass(frozen=True)
class FoldAssignment:
    folds: np.ndarray
    k: int
    seed: int

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.folds == fold)
        train = np.flatnonzero(self.folds != fold)
        return train, test


def kfold_split(n: int, labels, k: int, seed: int) -> FoldAssignment:
    """Stratified fold assignment.

    Each class is shuffled with a generator seeded by ``seed`` and dealt
    round-robin across the folds; the second class continues the deal
    where the first stopped, so fold sizes differ by at most one.
    """
    labels = np.asarray(labels).ravel()
    if labels.size != n:
        raise ValueError("labels length must equal n")
    if not isinstance(k, (int, np.integer)) or k < 2 or k > n:
        raise BadKError(f"k must satisfy 2 <= k <= n={n}, got {k!r}")
    classes = np.unique(labels)
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    offset = 0
    for c in classes:
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        folds[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return FoldAssignment(folds, int(k), int(seed))


@dataclass(frozen=True)
class KFoldResult:
    metrics: Metrics
    confusion: ConfusionCounts
    per_fold: tuple[ConfusionCounts, ...]
    predictions: np.ndarray
    times_predicted: np.ndarray
    assignment: FoldAssignment


def run_kfold(dataset: Dataset, spec: ClassifierSpec, k: int = 10, seed: int = 1) -> KFoldResult:
    """Pooled-confusion k-fold CV; scaling is refit inside each training fold."""
    assignment = kfold_split(len(dataset), dataset.labels, k, seed)
    predictions = np.full(len(dataset), -1, dtype=np.int64)
    times = np.zeros(len(dataset), dtype=np.int64)
    per_fold = []
    for fold in range(assignment.k):
        train_idx, test_idx = assignment.train_test(fold)
        fitted = fit_classifier(spec, dataset.subset(train_idx))
        pred = fitted.predict(dataset.features[test_idx])
        predictions[test_idx] = pred
        times[test_idx] += 1
        per_fold.append(ConfusionCounts.from_predictions(dataset.labels[test_idx], pred))
    pooled = sum(per_fold, ConfusionCounts())
    return KFoldResult(
        metrics_from_confusion(pooled),
        pooled,
        tuple(per_fold),
        predictions,
        times,
        assignment,
    )


class Decision(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


def decide(rate: float) -> Decision:
    """CHF-rate rule; a rate of exactly 0.50 is Positive."""
    return Decision.POSITIVE if rate >= DECISION_THRESHOLD else Decision.NEGATIVE


@dataclass(frozen=True)
class SubjectDecision:
    subject_id: str
    label: Label
    n_windows: int
    n_classified_chf: int

    @property
    def n_classified_normal(self) -> int:
        return self.n_windows - self.n_classified_chf

    @property
    def rate(self) -> float:
        return self.n_classified_chf / self.n_windows

    @property
    def decision(self) -> Decision:
        return decide(self.rate)

    @property
    def correct(self) -> bool:
        return (self.decision is Decision.POSITIVE) == (self.label is Label.CHF)


@dataclass(frozen=True)
class LosoResult:
    decisions: tuple[SubjectDecision, ...]
    training_subjects: dict  # held-out id -> frozenset of training ids

    @property
    def n_misclassified(self) -> int:
        return sum(1 for d in self.decisions if not d.correct)

    @property
    def misclassification_rate(self) -> float:
        return self.n_misclassified / len(self.decisions)

    @property
    def subject_accuracy(self) -> float:
        return 1.0 - self.misclassification_rate


def run_loso(dataset: Dataset, spec: ClassifierSpec) -> LosoResult:
    """Hold out each subject in turn and decide it by its CHF window rate."""
    subjects = dataset.subjects()
    if len(subjects) < 2:
        raise TooFewRowsError("leave-one-subject-out needs at least two subjects")
    decisions = []
    training = {}
    for sid in subjects:
        held = dataset.subject_ids == sid
        train = dataset.subset(~held)
        train_ids = frozenset(train.subject_ids.tolist())
        if sid in train_ids:
            raise AssertionError(f"held-out subject {sid!r} leaked into training")
        if train.labels.size == 0 or train.labels.min() == train.labels.max():
            raise SingleClassTrainingError(sid)
        labels = np.unique(dataset.labels[held])
        if labels.size != 1:
            raise ValueError(f"subject {sid!r} has windows with both labels")
        fitted = fit_classifier(spec, train)
        pred = fitted.predict(dataset.features[held])
        training[sid] = train_ids
        decisions.append(
            SubjectDecision(
                sid,
                Label.CHF if labels[0] == 1 else Label.NORMAL,
                int(held.sum()),
                int(pred.sum()),
            )
        )
    return LosoResult(tuple(decisions), training)
