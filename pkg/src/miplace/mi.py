"""Log-determinants, Gaussian entropy, and mutual-information objectives.

Mutual information between two jointly Gaussian variable sets reduces to
a ratio of covariance determinants.  Four interchangeable forms are
provided, all in nats:

* :func:`standard_mi` -- I(A; V \\ A) from three log-determinants over
  subsets of the candidate set V.
* :func:`union_mi` -- I(A; V) through an explicit covariance over the
  stacked set [A; V]; slow, kept as the reference oracle.
* :func:`entropy` -- Gaussian differential entropy, the building block
  both of the above assemble.
* :func:`schur_mi` -- I(A; V) as (1/2) ln[det K_AA / det K_{A|V}], where
  K_{A|V} = K_AA - K_AV K_VV^{-1} K_VA is the conditional covariance.

The expensive factor of K_VV is computed once by :func:`build_cache` and
reused.  When the cache also holds a fixed evaluation set G, the full
conditional covariance K_{G|V} is materialized so that each discrete
``schur_mi`` call only gathers and factors s x s submatrices: the
per-evaluation cost is cubic in the selected-set size and independent of
the candidate-set size.

A cache is immutable once built; every evaluation here is read-only, so
one cache may serve any number of concurrent callers without locking.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf

from .errors import InvalidInputError, SingularMatrixError
from .kernels import HyperParams, as_points, cov_matrix, default_jitter

LOG_2PI_E = float(np.log(2.0 * np.pi * np.e))


def _chol_logdet(M: np.ndarray, jitter: float = 0.0):
    """Cholesky log-determinant of ``M + jitter*I`` without input checks."""
    A = M if jitter == 0.0 else M + jitter * np.eye(M.shape[0])
    c, info = dpotrf(A, lower=1)
    if info != 0:
        raise SingularMatrixError(
            f"Cholesky failed at pivot {info - 1} (jitter={jitter:g})",
            pivot=info - 1,
        )
    d = np.einsum("ii->i", c)
    return 2.0 * float(np.sum(np.log(d))), np.tril(c)


def logdet(M, jitter: float = 0.0):
    """ln det(M + jitter*I) via Cholesky.

    Returns ``(value, L)`` with ``L`` the lower-triangular factor.
    ``M`` must be square and symmetric to within round-off; failure to
    factorize raises :class:`SingularMatrixError` carrying the 0-based
    pivot index.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"M must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("M contains non-finite entries")
    if jitter < 0:
        raise InvalidInputError("jitter must be >= 0")
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M - M.T))) > 1e-8 * scale:
        raise InvalidInputError("M is not symmetric")
    return _chol_logdet(M, jitter)


def entropy(K_AA, jitter: float = 0.0) -> float:
    """Differential entropy (nats) of a Gaussian set with covariance K_AA:
    (s/2) ln(2*pi*e) + (1/2) ln det(K_AA + jitter*I)."""
    ld, _ = logdet(K_AA, jitter)
    s = np.asarray(K_AA).shape[0]
    return 0.5 * s * LOG_2PI_E + 0.5 * ld


class MICache:
    """Precomputed factors over a fixed candidate set V.

    Holds the assembled covariance ``K_VV`` (noise/jitter on the
    diagonal per the build flags), its lower Cholesky factor and
    log-determinant, and optionally a discrete block for an evaluation
    set G: ``K_GG`` plus the conditional covariance
    ``K_cond = K_GG - K_GV K_VV^{-1} K_VG``.

    Instances are immutable after construction (arrays are marked
    read-only) and safe to share across threads.
    """

    __slots__ = (
        "V", "params", "noise_in_diag", "jitter",
        "K_VV", "chol_KVV", "logdet_KVV",
        "G", "K_GG", "K_cond",
    )

    def __init__(self, V, params, noise_in_diag, jitter,
                 K_VV, chol_KVV, logdet_KVV, G=None, K_GG=None, K_cond=None):
        self.V = V
        self.params = params
        self.noise_in_diag = noise_in_diag
        self.jitter = jitter
        self.K_VV = K_VV
        self.chol_KVV = chol_KVV
        self.logdet_KVV = logdet_KVV
        self.G = G
        self.K_GG = K_GG
        self.K_cond = K_cond
        for arr in (V, K_VV, chol_KVV, G, K_GG, K_cond):
            if arr is not None:
                arr.flags.writeable = False

    @property
    def m(self) -> int:
        return self.V.shape[0]

    @property
    def has_surrogate(self) -> bool:
        return self.G is not None

    def self_cov(self, X) -> np.ndarray:
        """Square self-covariance of arbitrary points under the cache's
        diagonal policy (noise flag and jitter fixed at build time)."""
        return cov_matrix(
            self.params, X, add_noise=self.noise_in_diag, jitter=self.jitter
        )

    def cross_cov(self, X) -> np.ndarray:
        """Noiseless cross-covariance K(X, V)."""
        return cov_matrix(self.params, X, self.V)


def build_cache(
    V,
    params: HyperParams,
    G=None,
    noise_in_diag: bool = True,
    jitter: float | None = None,
) -> MICache:
    """Factor K_VV once (cost cubic in m) and optionally materialize the
    conditional covariance of a fixed evaluation set G given V.

    ``noise_in_diag`` folds the observation noise variance into every
    square self-covariance diagonal (recommended: mutual information
    over noiseless duplicated points is degenerate).  ``jitter`` defaults
    to 1e-6 times the signal variance and is applied to the same
    diagonals, so determinant ratios stay consistently regularized.
    """
    V = as_points(V, "V")
    if V.shape[0] == 0:
        raise InvalidInputError("V must be nonempty")
    if jitter is None:
        jitter = default_jitter(params)

    K_VV = cov_matrix(params, V, add_noise=noise_in_diag, jitter=jitter)
    ld, L = _chol_logdet(K_VV)

    G_arr = K_GG = K_cond = None
    if G is not None:
        G_arr = as_points(G, "G")
        if G_arr.shape[1] != V.shape[1]:
            raise InvalidInputError("G and V dimensions differ")
        K_GG = cov_matrix(params, G_arr, add_noise=noise_in_diag, jitter=jitter)
        K_GV = cov_matrix(params, G_arr, V)
        W = solve_triangular(L, K_GV.T, lower=True)
        K_cond = K_GG - W.T @ W
        K_cond = 0.5 * (K_cond + K_cond.T)
        if float(np.min(np.diag(K_cond))) < -1e-9:
            raise SingularMatrixError(
                "conditional covariance has a significantly negative diagonal"
            )
    return MICache(
        V=V, params=params, noise_in_diag=noise_in_diag, jitter=jitter,
        K_VV=K_VV, chol_KVV=L, logdet_KVV=ld,
        G=G_arr, K_GG=K_GG, K_cond=K_cond,
    )


def _validate_indices(A_idx, size: int, label: str) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(A_idx))
    if idx.size == 0:
        raise InvalidInputError("index set must be nonempty")
    if not np.issubdtype(idx.dtype, np.integer):
        raise InvalidInputError("index set must be integers")
    if idx.min() < 0 or idx.max() >= size:
        raise InvalidInputError(
            f"index out of range for {label} of size {size}: {idx}"
        )
    if np.unique(idx).size != idx.size:
        raise InvalidInputError("index set contains duplicates")
    return idx.astype(np.intp)


def standard_mi(A_idx, cache: MICache, use_precompute: bool = True) -> float:
    """I(A; V \\ A) = (1/2)[ln det K_AA + ln det K_{V\\A} - ln det K_VV].

    ``A_idx`` indexes into the cache's candidate set V.  With
    ``use_precompute`` the ln det K_VV term is read from the cache;
    otherwise it is refactored on every call (the cubic-in-m cost this
    package exists to avoid).
    """
    idx = _validate_indices(A_idx, cache.m, "V")
    rest = np.setdiff1d(np.arange(cache.m), idx, assume_unique=True)
    ld_AA, _ = _chol_logdet(cache.K_VV[np.ix_(idx, idx)])
    ld_rest = 0.0
    if rest.size:
        ld_rest, _ = _chol_logdet(cache.K_VV[np.ix_(rest, rest)])
    if use_precompute:
        ld_VV = cache.logdet_KVV
    else:
        ld_VV, _ = _chol_logdet(cache.K_VV)
    return 0.5 * (ld_AA + ld_rest - ld_VV)


def _union_points(A: np.ndarray, cache: MICache) -> np.ndarray:
    """Rows of A that do not exactly coincide with a row of V.

    A union V is a set union: points of A already present in V
    contribute no new variable, which is what makes the objective
    collapse to the entropy of A when A is drawn from V itself.
    """
    V = cache.V
    keep = []
    for i, row in enumerate(A):
        if not np.any(np.all(V == row, axis=1)):
            keep.append(i)
    return A[keep]


def union_mi(A, cache: MICache) -> float:
    """I(A; V) = (1/2)[ln det K_AA + ln det K_VV - ln det K_{A u V}],
    with the covariance over the union set built explicitly.

    Cost is cubic in (s + m); this is the slow reference oracle for
    :func:`schur_mi`.  Rows of ``A`` that exactly coincide with rows of V
    are not duplicated in the union (set semantics), so for A drawn
    directly from V the value degenerates to (1/2) ln det K_AA.
    """
    A = as_points(A, "A")
    if A.shape[0] == 0:
        raise InvalidInputError("A must be nonempty")
    if A.shape[1] != cache.V.shape[1]:
        raise InvalidInputError("A and V dimensions differ")
    ld_AA, _ = _chol_logdet(cache.self_cov(A))
    new = _union_points(A, cache)
    if new.shape[0] == 0:
        ld_union = cache.logdet_KVV
    else:
        U = np.vstack([new, cache.V])
        K_U = cache.self_cov(U)
        ld_union, _ = _chol_logdet(K_U)
    return 0.5 * (ld_AA + cache.logdet_KVV - ld_union)


def schur_mi(A, cache: MICache) -> float:
    """I(A; V) = (1/2)[ln det K_AA - ln det K_{A|V}].

    Discrete path: ``A`` is an index set into the cache's evaluation set
    G, and both K_AA and K_{A|V} are s x s submatrices gathered from the
    precomputed K_GG and K_{G|V}; no factorization of m-sized matrices
    occurs.  Continuous path: ``A`` is an (s, d) float array of raw
    points, and K_{A|V} = K_AA - W^T W with W solved against the stored
    Cholesky factor of K_VV (cost O(m^2 s)).
    """
    arr = np.asarray(A)
    if np.issubdtype(arr.dtype, np.integer):
        if not cache.has_surrogate:
            raise InvalidInputError(
                "index-based evaluation needs a cache built with an "
                "evaluation set G"
            )
        idx = _validate_indices(arr, cache.G.shape[0], "G")
        K_AA = cache.K_GG[np.ix_(idx, idx)]
        K_cond = cache.K_cond[np.ix_(idx, idx)]
    else:
        pts = _validate_eval_points(arr, cache)
        K_AA = cache.self_cov(pts)
        K_cond = _conditional_cov(pts, K_AA, cache.chol_KVV, cache)
    ld_num, _ = _chol_logdet(K_AA)
    ld_den, _ = _chol_logdet(K_cond)
    return 0.5 * (ld_num - ld_den)


def schur_mi_no_precompute(A, cache: MICache) -> float:
    """Schur-form I(A; V) with the K_VV factor redone on every call.

    Pays the cubic-in-m factorization cost each time; exists as the
    ablation reference for the precomputation benchmark.  ``A`` may be
    an index set into G or raw points, as in :func:`schur_mi`.
    """
    arr = np.asarray(A)
    if np.issubdtype(arr.dtype, np.integer):
        if not cache.has_surrogate:
            raise InvalidInputError(
                "index-based evaluation needs a cache built with an "
                "evaluation set G"
            )
        idx = _validate_indices(arr, cache.G.shape[0], "G")
        pts = cache.G[idx]
    else:
        pts = _validate_eval_points(arr, cache)
    _, L = _chol_logdet(cache.K_VV)
    K_AA = cache.self_cov(pts)
    K_cond = _conditional_cov(pts, K_AA, L, cache)
    ld_num, _ = _chol_logdet(K_AA)
    ld_den, _ = _chol_logdet(K_cond)
    return 0.5 * (ld_num - ld_den)


def _validate_eval_points(arr, cache: MICache) -> np.ndarray:
    pts = as_points(arr, "A")
    if pts.shape[0] == 0:
        raise InvalidInputError("A must be nonempty")
    if pts.shape[1] != cache.V.shape[1]:
        raise InvalidInputError("A and V dimensions differ")
    return pts


def _conditional_cov(pts, K_AA, L, cache: MICache) -> np.ndarray:
    W = solve_triangular(L, cache.cross_cov(pts).T, lower=True)
    K_cond = K_AA - W.T @ W
    return 0.5 * (K_cond + K_cond.T)
