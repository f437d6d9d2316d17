"""Classifier validation (stratified holdout, k-fold CV, jackknife) and
event-level summarization metrics.

Splits are seeded and stratified so accuracy numbers reproduce run to run.
Event matching is greedy in segment order: a segment is a true positive when
some still-unmatched ground-truth event of the same class overlaps its frame
interval; every other segment is a false positive, every unmatched truth event
a false negative. TPR = TP/(TP+FN), PPV = TP/(TP+FP); zero denominators raise
rather than silently reporting 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import GroundTruthEvent
from .errors import DataError, UndefinedMetricError
from .linsvm import TrainConfig, predict_multi_batch, train_ovr
from .summarizer import Segment


@dataclass(frozen=True)
class EventCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if self.tp < 0 or self.fp < 0 or self.fn < 0:
            raise DataError("event counts must be non-negative")

    def __add__(self, other: "EventCounts") -> "EventCounts":
        return EventCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def tpr(c: EventCounts) -> float:
    """True positive rate TP/(TP+FN): recall over ground-truth events."""
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("TPR undefined: no ground-truth events (TP+FN == 0)")
    return c.tp / (c.tp + c.fn)


def ppv(c: EventCounts) -> float:
    """Positive prediction value TP/(TP+FP): precision over emitted segments."""
    if c.tp + c.fp == 0:
        raise UndefinedMetricError("PPV undefined: no summarized events (TP+FP == 0)")
    return c.tp / (c.tp + c.fp)


def match_events(segments: list[Segment], truth: list[GroundTruthEvent]) -> EventCounts:
    """Greedy overlap matching; each truth event is matched at most once."""
    prev_end = -1
    for seg in segments:
        if seg.start_frame <= prev_end:
            raise DataError(f"segments overlap at frame {seg.start_frame}")
        prev_end = seg.end_frame

    matched = [False] * len(truth)
    order = sorted(range(len(truth)), key=lambda i: (truth[i].start_frame, i))
    tp = fp = 0
    for seg in segments:
        hit = None
        for i in order:
            ev = truth[i]
            if matched[i] or ev.event != seg.event:
                continue
            if ev.start_frame <= seg.end_frame and seg.start_frame <= ev.end_frame:
                hit = i
                break
        if hit is None:
            fp += 1
        else:
            matched[hit] = True
            tp += 1
    fn = matched.count(False)
    return EventCounts(tp=tp, fp=fp, fn=fn)


@dataclass
class SplitResult:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    warnings: list[str] = field(default_factory=list)


def _class_indices(labels: np.ndarray) -> dict[int, np.ndarray]:
    return {int(c): np.flatnonzero(labels == c) for c in np.unique(labels)}


def stratified_split(labels, test_fraction: float, seed: int = 0) -> SplitResult:
    """Seeded stratified holdout split.

    Per class the test side gets floor(n_c * fraction) items; the global test
    count is then topped up to floor(n * fraction) by largest fractional
    remainder (ties toward the smaller class code), skipping any class whose
    train side would be emptied. Classes that end with zero test items are
    reported as warnings.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction must be in (0, 1), got {test_fraction}")
    y = np.asarray(labels).ravel()
    n = y.shape[0]
    if n == 0:
        raise DataError("cannot split an empty label vector")
    by_class = _class_indices(y)

    rng = np.random.default_rng(seed)
    target = int(np.floor(n * test_fraction))
    take = {}
    remainders = []
    for code in sorted(by_class):
        exact = by_class[code].size * test_fraction
        take[code] = int(np.floor(exact))
        remainders.append((-(exact - take[code]), code))
    short = target - sum(take.values())
    for _, code in sorted(remainders):
        if short <= 0:
            break
        if by_class[code].size - (take[code] + 1) >= 1:
            take[code] += 1
            short -= 1

    warnings = []
    test_parts, train_parts = [], []
    for code in sorted(by_class):
        idx = by_class[code][rng.permutation(by_class[code].size)]
        k = take[code]
        test_parts.append(idx[:k])
        train_parts.append(idx[k:])
        if k == 0:
            warnings.append(f"class {code} has no test items ({idx.size} total)")

    test = np.sort(np.concatenate(test_parts))
    train = np.sort(np.concatenate(train_parts))
    return SplitResult(train_indices=train, test_indices=test, seed=seed, warnings=warnings)


def stratified_fold_indices(labels, k: int, seed: int = 0):
    """Assign each index to one of k folds, stratified and seeded.

    Items are dealt class by class (classes ascending, items shuffled within
    class) onto folds in one continuous round robin, which keeps both per-class
    and total fold sizes within one item of proportional.

    Returns (fold_assignment array, warnings list).
    """
    if k < 2:
        raise DataError(f"need at least 2 folds, got {k}")
    y = np.asarray(labels).ravel()
    if y.shape[0] < k:
        raise DataError(f"cannot make {k} folds from {y.shape[0]} items")
    by_class = _class_indices(y)

    warnings = []
    rng = np.random.default_rng(seed)
    fold = np.empty(y.shape[0], dtype=np.int64)
    cursor = 0
    for code in sorted(by_class):
        idx = by_class[code]
        if idx.size < k:
            warnings.append(f"class {code} has {idx.size} items for {k} folds; "
                            "some folds will miss it")
        shuffled = idx[rng.permutation(idx.size)]
        for i in shuffled:
            fold[i] = cursor % k
            cursor += 1
    return fold, warnings


@dataclass
class CVResult:
    fold_accuracies: list[float]
    fold_sizes: list[int]
    mean_accuracy: float
    seed: int
    warnings: list[str] = field(default_factory=list)


def kfold_cv(X, labels, cfg: TrainConfig = TrainConfig(), k: int = 10, seed: int = 0) -> CVResult:
    """Stratified k-fold cross-validation of the one-vs-rest classifier."""
    A = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels).ravel()
    fold, warnings = stratified_fold_indices(y, k, seed)

    accuracies = []
    sizes = []
    for f in range(k):
        test_mask = fold == f
        train_idx = np.flatnonzero(~test_mask)
        test_idx = np.flatnonzero(test_mask)
        model = train_ovr(A[train_idx], y[train_idx], cfg)
        pred = predict_multi_batch(model, A[test_idx])
        accuracies.append(float(np.mean(pred == y[test_idx])))
        sizes.append(int(test_idx.size))
    return CVResult(
        fold_accuracies=accuracies,
        fold_sizes=sizes,
        mean_accuracy=float(np.mean(accuracies)),
        seed=seed,
        warnings=warnings,
    )


def jackknife(X, labels, cfg: TrainConfig = TrainConfig()) -> float:
    """Leave-one-out validation: n trainings, accuracy over the held-out items."""
    A = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels).ravel()
    n = A.shape[0]
    if n < 2:
        raise DataError("jackknife needs at least 2 examples")

    correct = 0
    for i in range(n):
        keep = np.arange(n) != i
        model = train_ovr(A[keep], y[keep], cfg)
        pred = predict_multi_batch(model, A[i:i + 1])[0]
        if pred == y[i]:
            correct += 1
    return correct / n


def holdout_accuracy(X, labels, cfg: TrainConfig = TrainConfig(), test_fraction: float = 0.2,
                     seed: int = 0):
    """Train on the stratified train side, report accuracy on the test side.

    Returns (accuracy, SplitResult).
    """
    A = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels).ravel()
    split = stratified_split(y, test_fraction, seed)
    model = train_ovr(A[split.train_indices], y[split.train_indices], cfg)
    pred = predict_multi_batch(model, A[split.test_indices])
    accuracy = float(np.mean(pred == y[split.test_indices]))
    return accuracy, split
