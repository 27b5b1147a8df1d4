"""ROC/AUC evaluation, event detection at top-K, and the timing harness."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .scoring import top_k_mask


@dataclass
class LabeledScores:
    """Paired score/label vectors over the observed elements."""

    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float).ravel()
        self.labels = np.asarray(self.labels).ravel().astype(int)
        if self.scores.shape != self.labels.shape:
            raise ValueError("scores and labels must have the same length")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    @property
    def n_pos(self):
        return int(self.labels.sum())

    @property
    def n_neg(self):
        return int(self.labels.size - self.labels.sum())


@dataclass
class EventList:
    """Named events resolved to sets of element index tuples."""

    events: list[tuple[str, set]]

    def validate(self, dims):
        for name, indices in self.events:
            for idx in indices:
                if len(idx) != len(dims) or any(
                    not 0 <= i < d for i, d in zip(idx, dims)
                ):
                    raise ValueError(f"event {name!r}: index {idx} out of bounds {dims}")


def labeled_scores(scores, labels, observed=None):
    """Flatten scores/labels into a :class:`LabeledScores`, optionally
    restricted to the observed support."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if observed is not None:
        keep = np.asarray(observed, dtype=bool)
        return LabeledScores(scores[keep], labels[keep])
    return LabeledScores(scores, labels)


def roc_auc(ls):
    """Area under the ROC curve via the rank (Mann-Whitney) statistic.

    Ties get midranks, so the result equals the pairwise count
    ``(#{pos > neg} + 0.5 #{ties}) / (n_pos * n_neg)`` exactly.
    """
    if ls.n_pos == 0 or ls.n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(ls.scores)
    pos_ranks = ranks[ls.labels == 1].sum()
    return float(
        (pos_ranks - ls.n_pos * (ls.n_pos + 1) / 2.0) / (ls.n_pos * ls.n_neg)
    )


def roc_points(ls):
    """ROC curve vertices (fpr, tpr), one per distinct threshold."""
    if ls.n_pos == 0 or ls.n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative")
    order = np.argsort(-ls.scores, kind="stable")
    labels = ls.labels[order]
    scores = ls.scores[order]
    tp = np.cumsum(labels)
    fp = np.cumsum(1 - labels)
    # keep only the last point of each tied-score run
    last = np.r_[scores[1:] != scores[:-1], True]
    fpr = np.r_[0.0, fp[last] / ls.n_neg]
    tpr = np.r_[0.0, tp[last] / ls.n_pos]
    return fpr, tpr


def detection_at_k(scores, events, k_list):
    """Number of events hit by the top-K score mask, for each K percent.

    An event is detected when any of its element indices falls inside the
    mask; counts are non-decreasing in K because the masks are nested.
    """
    if not events.events:
        raise ValueError("event list is empty")
    arr = scores.scores if hasattr(scores, "scores") else np.asarray(scores)
    events.validate(arr.shape)
    counts = {}
    for k in k_list:
        mask = top_k_mask(arr, k)
        counts[k] = sum(
            1
            for _, indices in events.events
            if any(mask[idx] for idx in indices)
        )
    return counts


def benchmark_timing(solvers, instance, repeats):
    """Wall time and AUC statistics for each scoring method on one instance.

    ``solvers`` is a list of (name, fn) where ``fn(Y, observed) -> scores``
    returns an elementwise score tensor; ``instance`` is (Y, observed,
    labels).  Failures are recorded per repeat and excluded from the stats.
    """
    if repeats < 2:
        raise ValueError("need at least 2 repeats")
    Y, observed, labels = instance
    rows = []
    for name, fn in solvers:
        times, aucs, failures = [], [], 0
        for _ in range(repeats):
            start = time.perf_counter()
            try:
                scores = fn(Y, observed)
            except Exception:
                failures += 1
                continue
            times.append(time.perf_counter() - start)
            arr = scores.scores if hasattr(scores, "scores") else scores
            aucs.append(roc_auc(labeled_scores(arr, labels, observed)))
        def stats(v):
            if not v:
                return None, None
            std = float(np.std(v, ddof=1)) if len(v) >= 2 else 0.0
            return float(np.mean(v)), std
        auc_mean, auc_std = stats(aucs)
        time_mean, time_std = stats(times)
        rows.append(
            {
                "method": name,
                "auc_mean": auc_mean,
                "auc_std": auc_std,
                "time_mean_s": time_mean,
                "time_std_s": time_std,
                "failures": failures,
            }
        )
    return rows
