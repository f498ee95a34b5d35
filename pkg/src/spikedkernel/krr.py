"""Kernel ridge regression in dual form with K-fold model selection.

The dual solve (K + lam I) c = y is the convention used throughout the
experiments.  It matches the primal width-m ridge refit of a feature map
Phi when the kernel is the empirical one Phi Phi^T / m and the same lam is
used on both sides; fit_second_layer documents that correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionMismatch, InsufficientData, SingularSystem
from .rng import SeededStream


@dataclass(frozen=True)
class KrrModel:
    """Fitted dual model: prediction at z is sum_j coefs_j k(z, train_j)."""

    train_points: np.ndarray
    dual_coefs: np.ndarray
    kernel: object
    ridge: float


def fit(K: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Solve (K + lam I) c = y by Cholesky factorization."""
    if lam < 0:
        raise ValueError("ridge parameter must be nonnegative")
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    if K.shape[0] != K.shape[1] or K.shape[0] != y.shape[0]:
        raise DimensionMismatch("kernel matrix and labels disagree in size")
    system = K + lam * np.eye(K.shape[0]) if lam > 0 else K
    try:
        return cho_solve(cho_factor(system, lower=True), y)
    except LinAlgError as exc:
        raise SingularSystem("kernel matrix is singular; use lam > 0") from exc


def predict(K_cross: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    """Evaluate the dual predictor on a cross matrix of test-train kernels."""
    K_cross = np.asarray(K_cross, dtype=float)
    coefs = np.asarray(coefs, dtype=float)
    if K_cross.shape[1] != coefs.shape[0]:
        raise DimensionMismatch("cross matrix and coefficients disagree in size")
    return K_cross @ coefs


def mse(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise DimensionMismatch("prediction and truth lengths differ")
    diff = pred - truth
    return float(diff @ diff / diff.shape[0])


def fold_indices(n: int, folds: int, rng: SeededStream) -> list[np.ndarray]:
    """Contiguous blocks of a seeded shuffle; deterministic given the stream."""
    if folds < 2:
        raise ValueError("need at least two folds")
    if n < folds:
        raise InsufficientData(f"cannot split {n} points into {folds} folds")
    perm = rng.permutation(n)
    bounds = np.linspace(0, n, folds + 1).astype(int)
    return [np.sort(perm[bounds[i]:bounds[i + 1]]) for i in range(folds)]


def kfold_select(
    kernel, points: np.ndarray, y: np.ndarray, lambda_grid, folds: int, rng: SeededStream
) -> float:
    """Pick the ridge parameter minimizing mean validation MSE.

    kernel(left, right) must return the rectangular kernel matrix between
    two point sets; the full Gram matrix is built once and sliced per
    fold.  Ties go to the larger lambda.
    """
    grid = sorted(float(l) for l in lambda_grid)
    if not grid:
        raise ValueError("lambda grid is empty")
    points = np.asarray(points, dtype=float)
    y = np.asarray(y, dtype=float)
    parts = fold_indices(points.shape[0], folds, rng)
    all_idx = np.arange(points.shape[0])
    K = kernel(points, points)
    best_lam = grid[0]
    best_err = np.inf
    for lam in grid:
        errs = []
        for val in parts:
            train = np.setdiff1d(all_idx, val, assume_unique=False)
            coefs = fit(K[np.ix_(train, train)], y[train], lam)
            errs.append(mse(predict(K[np.ix_(val, train)], coefs), y[val]))
        err = float(np.mean(errs))
        if err <= best_err:
            best_err = err
            best_lam = lam
    return best_lam
