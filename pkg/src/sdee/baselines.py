"""Reference estimators for the comparative evaluation.

Analogy estimation (kNN over min-max-normalized metadata features under
a weighted Euclidean distance), the lines-of-code straw man (the same
kNN restricted to the single modified-SLOC feature), a plain
least-squares linear model, and a small single-hidden-layer neural
regressor trained by full-batch gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, SdeeError

DEFAULT_FEATURES = ("dev_count", "sloc_m", "dev_time_months")


class SingularFitError(SdeeError):
    """Least-squares design matrix is rank deficient."""


class DivergenceError(SdeeError):
    """Gradient descent produced a non-finite loss."""


def weighted_euclidean(x: Sequence[float], y: Sequence[float], w: Sequence[float]) -> float:
    """sqrt(sum_i w_i (x_i - y_i)^2) over already-normalized features."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape != y.shape or x.shape != w.shape:
        raise InputError(f"dimension mismatch: {x.shape}, {y.shape}, {w.shape}")
    if np.any(w < 0):
        raise InputError("negative feature weight")
    return float(np.sqrt(np.sum(w * (x - y) ** 2)))


@dataclass
class FeatureMatrix:
    """Raw feature rows plus fitted min-max normalization parameters."""

    rows: np.ndarray  # (n, p) raw feature values
    targets: np.ndarray  # (n,) person-month efforts
    feature_names: tuple[str, ...] = DEFAULT_FEATURES
    weights: np.ndarray | None = None
    norm_params: tuple[np.ndarray, np.ndarray] | None = None  # (min, max) per feature

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.rows.ndim != 2:
            raise InputError("rows must be a 2-D matrix")
        if self.rows.shape[0] != self.targets.shape[0]:
            raise InputError("row/target count mismatch")
        if self.weights is None:
            self.weights = np.ones(self.rows.shape[1])
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if np.any(self.weights < 0):
                raise InputError("negative feature weight")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    def fit_normalization(self) -> "FeatureMatrix":
        self.norm_params = (self.rows.min(axis=0), self.rows.max(axis=0))
        return self

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Min-max map into [0,1]^p; out-of-range queries are clamped."""
        if self.norm_params is None:
            self.fit_normalization()
        lo, hi = self.norm_params
        span = np.where(hi > lo, hi - lo, 1.0)
        scaled = (np.asarray(x, dtype=np.float64) - lo) / span
        scaled = np.where(hi > lo, scaled, 0.0)
        return np.clip(scaled, 0.0, 1.0)


def _knn_mean(train: FeatureMatrix, query: np.ndarray, k: int) -> float:
    if train.n == 0:
        raise InputError("empty training set")
    if k < 1:
        raise InputError("k must be >= 1")
    normalized_rows = train.normalize(train.rows)
    q = train.normalize(query)
    dists = [
        weighted_euclidean(row, q, train.weights) for row in normalized_rows
    ]
    # ties broken by training-row index for determinism
    order = sorted(range(train.n), key=lambda i: (dists[i], i))
    chosen = order[: min(k, train.n)]
    return float(np.mean(train.targets[chosen]))


def abe_estimate(train: FeatureMatrix, query: Sequence[float], k: int) -> float:
    """Mean effort of the k nearest rows under the weighted distance."""
    query = np.asarray(query, dtype=np.float64)
    if query.shape[0] != train.p:
        raise InputError(f"query has {query.shape[0]} features, expected {train.p}")
    return _knn_mean(train, query, k)


def loc_strawman_estimate(train: FeatureMatrix, query_sloc: float, k: int) -> float:
    """Analogy estimate over the single modified-SLOC feature."""
    try:
        idx = train.feature_names.index("sloc_m")
    except ValueError:
        raise InputError("training matrix lacks a sloc_m feature") from None
    single = FeatureMatrix(
        rows=train.rows[:, [idx]],
        targets=train.targets,
        feature_names=("sloc_m",),
    )
    return _knn_mean(single, np.array([query_sloc]), k)


RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class LinearModel:
    coefficients: np.ndarray  # (p+1,), intercept first
    residual_inf_norm: float
    feature_names: tuple[str, ...]


def atlm_fit(train: FeatureMatrix) -> LinearModel:
    """Ordinary least squares on raw features with an intercept.

    Raises :class:`SingularFitError` naming the offending column when the
    design matrix is rank deficient (for example a constant feature).
    """
    if train.n < train.p + 1:
        raise InputError(f"need at least {train.p + 1} rows, got {train.n}")
    design = np.hstack([np.ones((train.n, 1)), train.rows])
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        for j in range(train.p):
            without = np.delete(design, j + 1, axis=1)
            if np.linalg.matrix_rank(without) == rank:
                name = train.feature_names[j] if j < len(train.feature_names) else f"x{j}"
                raise SingularFitError(
                    f"design matrix is rank deficient: column {name!r} is redundant"
                )
        raise SingularFitError("design matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(design, train.targets, rcond=None)
    residual = design.T @ (train.targets - design @ beta)
    return LinearModel(
        coefficients=beta,
        residual_inf_norm=float(np.max(np.abs(residual))),
        feature_names=train.feature_names,
    )


def atlm_predict(model: LinearModel, query: Sequence[float]) -> float:
    query = np.asarray(query, dtype=np.float64)
    if query.shape[0] != model.coefficients.shape[0] - 1:
        raise InputError(
            f"query has {query.shape[0]} features, expected {model.coefficients.shape[0] - 1}"
        )
    return float(model.coefficients[0] + model.coefficients[1:] @ query)


@dataclass
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    target_mean: float
    target_scale: float
    train_matrix: FeatureMatrix


def mlp_loss_and_grads(
    params: tuple[np.ndarray, np.ndarray, np.ndarray, float],
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    """Mean squared error of the one-hidden-layer net and its gradients."""
    w1, b1, w2, b2 = params
    z = x @ w1 + b1  # (n, h)
    a = np.maximum(z, 0.0)
    pred = a @ w2 + b2  # (n,)
    err = pred - y
    n = x.shape[0]
    with np.errstate(over="ignore"):  # overflow -> inf is caught as divergence
        loss = float(np.mean(err**2))
    g_pred = 2.0 * err / n
    g_w2 = a.T @ g_pred
    g_b2 = float(np.sum(g_pred))
    g_a = np.outer(g_pred, w2)
    g_z = g_a * (z > 0.0)
    g_w1 = x.T @ g_z
    g_b1 = g_z.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def mlp_fit(
    train: FeatureMatrix,
    hidden: int = 16,
    epochs: int = 500,
    lr: float = 0.05,
    seed: int = 0,
) -> MlpModel:
    """Full-batch gradient descent on normalized features.

    Targets are standardized internally and predictions un-scaled, which
    keeps one learning rate workable across effort magnitudes.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x = train.normalize(train.rows)
    y_mean = float(train.targets.mean())
    y_scale = float(train.targets.std()) or 1.0
    y = (train.targets - y_mean) / y_scale

    w1 = rng.normal(0.0, 0.5, size=(train.p, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, 0.5, size=hidden)
    b2 = 0.0
    for _ in range(epochs):
        loss, (g_w1, g_b1, g_w2, g_b2) = mlp_loss_and_grads((w1, b1, w2, b2), x, y)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"training loss became non-finite; try a learning rate below {lr}"
            )
        w1 -= lr * g_w1
        b1 -= lr * g_b1
        w2 -= lr * g_w2
        b2 -= lr * g_b2
    return MlpModel(
        w1=w1, b1=b1, w2=w2, b2=b2,
        target_mean=y_mean, target_scale=y_scale, train_matrix=train,
    )


def mlp_predict(model: MlpModel, query: Sequence[float]) -> float:
    q = model.train_matrix.normalize(np.asarray(query, dtype=np.float64))
    hiddens = np.maximum(q @ model.w1 + model.b1, 0.0)
    scaled = float(hiddens @ model.w2 + model.b2)
    return scaled * model.target_scale + model.target_mean
