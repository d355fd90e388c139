"""Feature importance from integrated gradients and importance-matrix mining.

The built-in scorer is a linear or logistic model over numeric features; it
exists so the attribution path can be exercised end to end. Importances from
external explainers arrive as a CSV via :func:`load_importance_matrix`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    EmptyMatrixError,
    NoFeatureError,
    ParseError,
    ShapeError,
)
from .itemsets import fp_growth, pick_feature_set

SCORER_KINDS = ("linear", "logistic")

DEFAULT_IG_STEPS = 50
DEFAULT_SHIFT_EPS = 1e-9
DEFAULT_COVERAGE = 0.99  # minimum row share the most frequent feature must cover


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class DifferentiableScorer:
    """Linear score ``w.x + b`` or its logistic squashing."""

    kind: str
    weights: tuple[float, ...]
    bias: float = 0.0

    def __post_init__(self):
        if self.kind not in SCORER_KINDS:
            raise ConfigError(f"unknown scorer kind {self.kind!r}")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def score(self, x) -> np.ndarray | float:
        """Evaluate on one sample (1-d) or a batch (2-d, rows are samples)."""
        arr = np.asarray(x, dtype=np.float64)
        z = arr @ np.asarray(self.weights) + self.bias
        if self.kind == "logistic":
            z = _sigmoid(z)
        return float(z) if arr.ndim == 1 else z

    def gradient(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        w = np.asarray(self.weights)
        if self.kind == "linear":
            return np.broadcast_to(w, arr.shape).copy()
        s = _sigmoid(arr @ w + self.bias)
        if arr.ndim == 1:
            return float(s * (1.0 - s)) * w
        return (s * (1.0 - s))[:, None] * w[None, :]


def integrated_gradient(
    scorer: DifferentiableScorer,
    baseline,
    test,
    steps: int = DEFAULT_IG_STEPS,
) -> np.ndarray:
    """Attribute the score shift from ``test`` to ``baseline`` per feature.

    The path integral along the straight line between the samples is taken
    with a midpoint Riemann sum of ``steps`` points; linear scorers use the
    exact closed form ``w_i * (baseline_i - test_i)`` regardless of steps.
    The attributions sum to score(baseline) - score(test) (exactly for
    linear scorers, up to the quadrature error otherwise).
    """
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps}")
    b = np.asarray(baseline, dtype=np.float64)
    t = np.asarray(test, dtype=np.float64)
    if b.shape != (scorer.n_features,) or t.shape != (scorer.n_features,):
        raise ShapeError(
            f"baseline/test must have shape ({scorer.n_features},), "
            f"got {b.shape} and {t.shape}"
        )
    delta = b - t
    if scorer.kind == "linear":
        return np.asarray(scorer.weights) * delta
    lambdas = (np.arange(steps) + 0.5) / steps
    points = t[None, :] + lambdas[:, None] * delta[None, :]
    grads = scorer.gradient(points)  # (steps, d)
    return delta * grads.mean(axis=0)


def importance_scores(
    attributions,
    y: float,
    y_tilde: float,
    eps: float = DEFAULT_SHIFT_EPS,
) -> np.ndarray | None:
    """Normalize attributions by the score shift; ``None`` flags a skipped pair."""
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    shift = y - y_tilde
    if abs(shift) < eps:
        return None
    return np.abs(np.asarray(attributions, dtype=np.float64) / shift)


@dataclass(frozen=True, eq=False)
class ImportanceMatrix:
    """Rows of non-negative per-feature importance scores.

    When built from a scorer there is one row per usable (baseline, test)
    pair and ``pair_index`` records which; matrices loaded from file leave
    it ``None``.
    """

    scores: np.ndarray
    feature_names: tuple[str, ...] | None = None
    pair_index: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"scores must be 2-d, got shape {arr.shape}")
        if np.isnan(arr).any() or (arr < 0).any():
            raise DomainError("importance scores must be non-negative")
        object.__setattr__(self, "scores", arr)

    @property
    def n_rows(self) -> int:
        return self.scores.shape[0]

    @property
    def n_features(self) -> int:
        return self.scores.shape[1]


def build_importance_matrix(
    scorer: DifferentiableScorer,
    baselines,
    tests,
    steps: int = DEFAULT_IG_STEPS,
    eps: float = DEFAULT_SHIFT_EPS,
) -> ImportanceMatrix:
    """One importance row per (baseline, test) pair with a non-degenerate shift."""
    b = np.atleast_2d(np.asarray(baselines, dtype=np.float64))
    t = np.atleast_2d(np.asarray(tests, dtype=np.float64))
    if b.shape[0] < 1 or t.shape[0] < 1:
        raise ShapeError("need at least one baseline and one test sample")
    rows = []
    pairs = []
    for i in range(b.shape[0]):
        y = scorer.score(b[i])
        for j in range(t.shape[0]):
            y_tilde = scorer.score(t[j])
            scores = importance_scores(
                integrated_gradient(scorer, b[i], t[j], steps), y, y_tilde, eps
            )
            if scores is None:
                continue
            rows.append(scores)
            pairs.append((i, j))
    if not rows:
        raise EmptyMatrixError("every (baseline, test) pair had a degenerate shift")
    return ImportanceMatrix(
        scores=np.vstack(rows),
        pair_index=tuple(pairs),
    )


def load_importance_matrix(path) -> ImportanceMatrix:
    """Read an importance matrix CSV whose header names the features."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("importance matrix file is empty") from None
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise ParseError(
                    f"row {i} has {len(row)} cells, expected {len(header)}", row=i
                )
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError(f"unparseable number in row {i}", row=i) from None
    scores = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
    return ImportanceMatrix(scores=scores, feature_names=tuple(header))


def _required_rows(gamma: float, n_rows: int) -> int:
    """ceil(gamma * n_rows) computed exactly on the binary float value."""
    if not 0.0 < gamma <= 1.0:
        raise ConfigError(f"gamma must be in (0, 1], got {gamma}")
    return math.ceil(Fraction(gamma) * n_rows)


def scan_threshold(matrix: ImportanceMatrix, gamma: float = DEFAULT_COVERAGE) -> float:
    """Scan score values upward for the smallest threshold leaving one qualifying feature.

    If the qualifying-feature count drops from >= 2 straight to 0, the largest
    threshold still keeping >= 2 features is returned instead.
    """
    if matrix.n_rows == 0:
        raise EmptyMatrixError("cannot scan an empty importance matrix")
    required = _required_rows(gamma, matrix.n_rows)

    thresholds = np.unique(matrix.scores)
    thresholds = thresholds[thresholds > 0.0]
    if len(thresholds) == 0:
        raise NoFeatureError("matrix has no positive scores")

    counts = np.empty((matrix.n_features, len(thresholds)), dtype=np.int64)
    for f in range(matrix.n_features):
        col = np.sort(matrix.scores[:, f])
        counts[f] = matrix.n_rows - np.searchsorted(col, thresholds, side="left")
    qual = (counts >= required).sum(axis=0)  # non-increasing in the threshold

    ones = np.nonzero(qual == 1)[0]
    if len(ones):
        return float(thresholds[ones[0]])
    multi = np.nonzero(qual >= 2)[0]
    if len(multi):
        return float(thresholds[multi[-1]])
    raise NoFeatureError("no feature clears the frequency requirement at any threshold")


def to_feature_sequences(matrix: ImportanceMatrix, j_th: float) -> list[frozenset[int]]:
    """Per row, the set of feature indices scoring >= j_th; empty sets are dropped."""
    if j_th < 0:
        raise ConfigError(f"j_th must be >= 0, got {j_th}")
    hits = matrix.scores >= j_th
    out = []
    for row in hits:
        idx = np.nonzero(row)[0]
        if len(idx):
            out.append(frozenset(int(i) for i in idx))
    return out


def select_frequent_features(
    matrix: ImportanceMatrix,
    gamma: float = DEFAULT_COVERAGE,
    c_min: int = 1,
    k_max: int | None = None,
) -> frozenset[int]:
    """Feature subset that is frequently important together.

    Composes the threshold scan, the row-to-sequence transform, FP-Growth,
    and the longest/most-frequent itemset choice.
    """
    if c_min < 1:
        raise ConfigError(f"c_min must be >= 1, got {c_min}")
    if k_max is None:
        k_max = matrix.n_features
    j_th = scan_threshold(matrix, gamma)
    sequences = to_feature_sequences(matrix, j_th)
    itemsets = fp_growth(sequences, c_min, k_max)
    return pick_feature_set(itemsets)


def class_centroids(samples, class_ids) -> tuple[np.ndarray, list]:
    """Per-class feature means, rows ordered by sorted class id."""
    X = np.asarray(samples, dtype=np.float64)
    ids = np.asarray(class_ids)
    classes = sorted(set(ids.tolist()))
    cents = np.vstack([X[ids == c].mean(axis=0) for c in classes])
    return cents, classes


def balanced_sample(class_ids, m_total: int, seed: int = 0) -> np.ndarray:
    """Indices of a seeded class-balanced subset, m_total/n_classes per class."""
    ids = np.asarray(class_ids)
    classes = sorted(set(ids.tolist()))
    per_class = max(1, m_total // len(classes))
    rng = np.random.default_rng(seed)
    picks = []
    for c in classes:
        pool = np.nonzero(ids == c)[0]
        take = min(per_class, len(pool))
        picks.append(rng.choice(pool, size=take, replace=False))
    return np.sort(np.concatenate(picks))
