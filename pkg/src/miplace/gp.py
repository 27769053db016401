"""GP posterior prediction and reconstruction metrics (SMSE, RMSE)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidInputError, SingularMatrixError
from .kernels import HyperParams, as_points, cov_matrix, default_jitter

# Variance entries in [-VARIANCE_CLAMP, 0) are round-off and clamp to 0;
# anything below is a factorization failure.
VARIANCE_CLAMP = 1e-9


@dataclass(frozen=True)
class Posterior:
    """Pointwise predictive mean (field units) and variance (squared)."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class Metrics:
    smse: float
    rmse: float
    n_test: int


def posterior(
    params: HyperParams,
    train_X,
    train_y,
    test_X,
    jitter: float | None = None,
) -> Posterior:
    """Predictive mean and variance at ``test_X`` given noisy training data.

    mean = K_*n (K_nn + noise*I)^-1 y,
    variance = diag(K_**) - rowwise quadratic form,
    computed through a single Cholesky factor of the training covariance.
    """
    X = as_points(train_X, "train_X")
    y = np.asarray(train_y, dtype=float).ravel()
    T = as_points(test_X, "test_X")
    if X.shape[0] < 1 or y.shape[0] != X.shape[0]:
        raise InvalidInputError("need |train_y| = rows(train_X) >= 1")
    if T.shape[1] != X.shape[1]:
        raise InvalidInputError("train and test dimensions differ")
    if jitter is None:
        jitter = default_jitter(params)

    K_nn = cov_matrix(params, X, add_noise=True, jitter=jitter)
    try:
        L = np.linalg.cholesky(K_nn)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"training covariance is singular (jitter={jitter:g})"
        ) from exc
    K_tn = cov_matrix(params, T, X)

    alpha = solve_triangular(L, y, lower=True)
    alpha = solve_triangular(L.T, alpha, lower=False)
    mean = K_tn @ alpha

    W = solve_triangular(L, K_tn.T, lower=True)
    var = params.signal_variance - np.einsum("ij,ij->j", W, W)
    low = var.min() if var.size else 0.0
    if low < -VARIANCE_CLAMP:
        raise SingularMatrixError(
            f"posterior variance {low:g} below -{VARIANCE_CLAMP:g}"
        )
    return Posterior(mean=mean, variance=np.maximum(var, 0.0))


def metrics(pred: Posterior, truth, truth_variance: float) -> Metrics:
    """Score a prediction against held-out targets.

    ``truth_variance`` is the (population) variance of the test targets;
    SMSE = MSE / truth_variance, so a constant mean predictor scores 1.
    """
    truth = np.asarray(truth, dtype=float).ravel()
    if truth.shape[0] != pred.mean.shape[0]:
        raise InvalidInputError(
            f"length mismatch: {pred.mean.shape[0]} predictions, "
            f"{truth.shape[0]} targets"
        )
    if truth_variance <= 0:
        raise InvalidInputError("truth_variance must be > 0")
    mse = float(np.mean((pred.mean - truth) ** 2))
    return Metrics(
        smse=mse / truth_variance,
        rmse=float(np.sqrt(mse)),
        n_test=truth.shape[0],
    )
