"""RBF kernel evaluation, covariance assembly, and marginal-likelihood fitting.

All covariance routines work on point sets stored as ``(m, d)`` float
arrays (rows are locations).  Square self-covariances are built from the
upper triangle and mirrored, so they are exactly symmetric; an optional
noise/jitter term inflates their diagonal to keep near-duplicate point
sets factorizable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .errors import FittingError, InvalidInputError

# Fraction of the signal variance added to square self-covariance
# diagonals before factorization when no explicit jitter is given.
DEFAULT_JITTER_SCALE = 1e-6


@dataclass(frozen=True)
class HyperParams:
    """RBF kernel hyperparameters.

    Attributes
    ----------
    signal_variance : float
        Marginal variance of the latent field (squared field units), > 0.
    length_scale : float
        Correlation decay length (input-distance units), > 0.
    noise_variance : float
        Observation noise variance (squared field units), >= 0.
    """

    signal_variance: float
    length_scale: float
    noise_variance: float = 0.0

    def __post_init__(self):
        for name in ("signal_variance", "length_scale", "noise_variance"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise InvalidInputError(f"{name} must be finite, got {v!r}")
        if self.signal_variance <= 0:
            raise InvalidInputError("signal_variance must be > 0")
        if self.length_scale <= 0:
            raise InvalidInputError("length_scale must be > 0")
        if self.noise_variance < 0:
            raise InvalidInputError("noise_variance must be >= 0")


def default_jitter(params: HyperParams) -> float:
    return DEFAULT_JITTER_SCALE * params.signal_variance


def as_points(X, name: str = "points") -> np.ndarray:
    """Validate and return a point set as an (m, d) float64 array.

    1-D input is treated as m points on a line.  Entries must be finite.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D array, got shape {X.shape}")
    if X.size and not np.all(np.isfinite(X)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return X


def kernel_eval(params: HyperParams, x, x_prime) -> float:
    """Squared-exponential covariance between two locations.

    Returns ``signal_variance * exp(-||x - x'||^2 / (2 * length_scale^2))``,
    which lies in ``(0, signal_variance]`` and is exactly symmetric in its
    arguments.
    """
    x = np.asarray(x, dtype=float).ravel()
    x_prime = np.asarray(x_prime, dtype=float).ravel()
    if x.shape != x_prime.shape:
        raise InvalidInputError(
            f"dimension mismatch: {x.shape} vs {x_prime.shape}"
        )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x_prime))):
        raise InvalidInputError("kernel inputs must be finite")
    sq = float(np.sum((x - x_prime) ** 2))
    return params.signal_variance * np.exp(-sq / (2.0 * params.length_scale**2))


def cov_matrix(
    params: HyperParams,
    X,
    Y=None,
    add_noise: bool = False,
    jitter: float = 0.0,
) -> np.ndarray:
    """Assemble the kernel matrix between two point sets.

    With ``Y=None`` the square self-covariance of ``X`` is built from the
    upper triangle and mirrored (exact symmetry by construction), and
    ``noise_variance`` (if ``add_noise``) plus ``jitter`` are added to the
    diagonal.  Cross-covariances never receive diagonal terms.
    """
    if jitter < 0:
        raise InvalidInputError("jitter must be >= 0")
    X = as_points(X, "X")
    if X.shape[0] == 0:
        raise InvalidInputError("X must be nonempty")
    two_ell_sq = 2.0 * params.length_scale**2

    if Y is None:
        D = cdist(X, X, "sqeuclidean")
        K = params.signal_variance * np.exp(-D / two_ell_sq)
        # exact symmetry: keep upper triangle, mirror it below
        K = np.triu(K) + np.triu(K, 1).T
        diag_add = jitter + (params.noise_variance if add_noise else 0.0)
        if diag_add:
            K[np.diag_indices_from(K)] += diag_add
        return K

    Y = as_points(Y, "Y")
    if Y.shape[0] == 0:
        raise InvalidInputError("Y must be nonempty")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(
            f"dimension mismatch: X has d={X.shape[1]}, Y has d={Y.shape[1]}"
        )
    D = cdist(X, Y, "sqeuclidean")
    return params.signal_variance * np.exp(-D / two_ell_sq)


def log_marginal_likelihood(
    params: HyperParams, X, y, jitter: float | None = None
) -> float:
    """Gaussian log marginal likelihood of observations ``y`` at ``X``.

    Uses ``K(X, X) + noise_variance*I + jitter*I``.  Raises
    ``numpy.linalg.LinAlgError`` when the matrix cannot be factorized.
    """
    X = as_points(X, "X")
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise InvalidInputError(
            f"|y|={y.shape[0]} does not match rows(X)={X.shape[0]}"
        )
    if jitter is None:
        jitter = default_jitter(params)
    K = cov_matrix(params, X, add_noise=True, jitter=jitter)
    L = np.linalg.cholesky(K)
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, y))
    n = y.shape[0]
    return float(
        -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2 * np.pi)
    )


_PARAM_ORDER = ("signal_variance", "length_scale", "noise_variance")


def fit_hyperparams(
    train_X,
    train_y,
    init: HyperParams,
    bounds: dict[str, tuple[float, float]],
    max_evals: int = 200,
) -> HyperParams:
    """Maximize the log marginal likelihood by direct search.

    Runs a Nelder-Mead simplex over log-parameters inside ``bounds``
    (a mapping from parameter name to a positive ``(low, high)``
    interval containing the corresponding ``init`` value).  Probe points
    whose covariance fails to factorize score -inf and are skipped; if
    every probe fails a :class:`FittingError` is raised.  The result is
    never worse than ``init`` and never leaves the bounds.  Deterministic
    for identical inputs.
    """
    X = as_points(train_X, "train_X")
    y = np.asarray(train_y, dtype=float).ravel()
    if y.shape[0] != X.shape[0] or X.shape[0] < 2:
        raise InvalidInputError("need |train_y| = rows(train_X) >= 2")
    if not bounds:
        raise InvalidInputError("bounds must be nonempty")
    for name in _PARAM_ORDER:
        if name not in bounds:
            raise InvalidInputError(f"bounds missing entry for {name!r}")
        lo, hi = bounds[name]
        if not (0 < lo <= hi):
            raise InvalidInputError(f"bounds for {name!r} must be positive, lo <= hi")
        v = getattr(init, name)
        if not (lo <= v <= hi):
            raise InvalidInputError(f"init {name}={v} outside bounds [{lo}, {hi}]")
    if max_evals < 1:
        raise InvalidInputError("max_evals must be >= 1")

    log_bounds = [tuple(np.log(bounds[name])) for name in _PARAM_ORDER]
    x0 = np.log([getattr(init, name) for name in _PARAM_ORDER])
    n_scored = 0

    def neg_lml(theta):
        nonlocal n_scored
        p = HyperParams(*np.exp(theta))
        try:
            val = log_marginal_likelihood(p, X, y)
        except np.linalg.LinAlgError:
            return np.inf
        n_scored += 1
        return -val

    res = minimize(
        neg_lml,
        x0,
        method="Nelder-Mead",
        bounds=log_bounds,
        options={"maxfev": max_evals, "xatol": 1e-8, "fatol": 1e-10},
    )
    if n_scored == 0:
        raise FittingError("every probe point failed to factorize")

    theta = np.clip(res.x, [b[0] for b in log_bounds], [b[1] for b in log_bounds])
    candidate = HyperParams(*np.exp(theta))
    try:
        cand_lml = log_marginal_likelihood(candidate, X, y)
    except np.linalg.LinAlgError:
        return init
    try:
        init_lml = log_marginal_likelihood(init, X, y)
    except np.linalg.LinAlgError:
        return candidate
    return candidate if cand_lml >= init_lml else init
