"""Uniform objective interface over MI variants and optimal-design baselines.

Every kind returns a scalar where larger is better, so greedy selectors
stay objective-agnostic.  The design criteria (a_opt, b_opt, d_opt) are
defined over the posterior covariance of the candidate set V given noisy
observations at the selected locations:

* a_opt:  -trace(Cov[V | A])
* d_opt:  -ln det(Cov[V | A] + jitter*I)
* b_opt:  trace(K_VA (K_AA + noise*I)^{-1} K_AV), the expected total
          variance reduction over V.

These are this package's working definitions; reports should label them
as such rather than as canonical experimental-design formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import mi
from .errors import InvalidInputError
from .kernels import cov_matrix
from .mi import MICache, _chol_logdet, _validate_indices

KINDS = ("standard_mi", "schur_mi", "a_opt", "b_opt", "d_opt")
MI_KINDS = ("standard_mi", "schur_mi")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Objective kind plus evaluation flags.

    ``precompute`` toggles reuse of the cached K_VV factor for the MI
    kinds (design baselines ignore it).  ``noise_in_diag`` governs how
    the cache is built by the selection pipeline.
    """

    kind: str
    precompute: bool = True
    noise_in_diag: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(
                f"unknown objective kind {self.kind!r}; expected one of {KINDS}"
            )


def evaluate(spec: ObjectiveSpec, A_idx, cache: MICache) -> float:
    """Score an index set under the given objective; larger is better.

    MI kinds score the empty set as 0; design kinds score it from the
    prior covariance, so marginal gains stay well-defined at the first
    greedy step.
    """
    idx = np.atleast_1d(np.asarray(A_idx, dtype=np.intp))
    if idx.size == 0:
        return _empty_value(spec, cache)
    if spec.kind == "standard_mi":
        return mi.standard_mi(idx, cache, use_precompute=spec.precompute)
    if spec.kind == "schur_mi":
        if spec.precompute:
            return mi.schur_mi(idx, cache)
        return mi.schur_mi_no_precompute(idx, cache)
    return _design_value(spec.kind, idx, cache)


def marginal_gain(
    spec: ObjectiveSpec, A_idx, a: int, base_value: float, cache: MICache
) -> float:
    """evaluate(A u {a}) - base_value."""
    idx = np.atleast_1d(np.asarray(A_idx, dtype=np.intp))
    if a in idx:
        raise InvalidInputError(f"candidate {a} already selected")
    return evaluate(spec, np.append(idx, a), cache) - base_value


def _empty_value(spec: ObjectiveSpec, cache: MICache) -> float:
    if spec.kind in MI_KINDS:
        return 0.0
    m = cache.m
    if spec.kind == "a_opt":
        return -m * cache.params.signal_variance
    if spec.kind == "b_opt":
        return 0.0
    ld, _ = _chol_logdet(_latent_cov(cache), jitter=cache.jitter)
    return -ld


def _latent_cov(cache: MICache) -> np.ndarray:
    """Noiseless prior covariance over V (cache diagonal terms removed)."""
    K = np.array(cache.K_VV)
    added = cache.jitter + (
        cache.params.noise_variance if cache.noise_in_diag else 0.0
    )
    if added:
        K[np.diag_indices_from(K)] -= added
    return K


def _design_value(kind: str, idx: np.ndarray, cache: MICache) -> float:
    idx = _validate_indices(idx, cache.m, "V")
    params = cache.params
    A = cache.V[idx]
    K_AA = cov_matrix(params, A, add_noise=False)
    K_AA[np.diag_indices_from(K_AA)] += params.noise_variance + cache.jitter
    _, L = _chol_logdet(K_AA)
    K_VA = cov_matrix(params, cache.V, A)
    # C = L^{-1} K_AV, so C^T C = K_VA (K_AA + noise)^{-1} K_AV
    C = solve_triangular(L, K_VA.T, lower=True)
    if kind == "b_opt":
        return float(np.einsum("ij,ij->", C, C))
    if kind == "a_opt":
        reduction = np.einsum("ij,ij->j", C, C)
        trace_post = cache.m * params.signal_variance - float(np.sum(reduction))
        return -trace_post
    # d_opt: full posterior covariance of V given A
    post = _latent_cov(cache) - C.T @ C
    post = 0.5 * (post + post.T)
    ld, _ = _chol_logdet(post, jitter=cache.jitter)
    return -ld
