"""Request/response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

OBJECTIVES = ("standard_mi", "schur_mi", "a_opt", "b_opt", "d_opt")


class HyperParamsModel(BaseModel):
    signal_variance: float = Field(gt=0)
    length_scale: float = Field(gt=0)
    noise_variance: float = Field(default=0.0, ge=0)


class CacheRequest(BaseModel):
    points: list[list[float]] = Field(min_length=1)
    params: HyperParamsModel
    surrogate_sigma: float | None = Field(default=None, ge=0)
    with_surrogate: bool = True
    seed: int = 0
    noise_in_diag: bool = True


class CacheInfo(BaseModel):
    cache_id: str
    m: int
    dim: int
    has_surrogate: bool
    build_seconds: float


class EvaluateRequest(BaseModel):
    objective: str
    indices: list[int] = Field(min_length=1)
    precompute: bool = True


class EvaluateResponse(BaseModel):
    objective: str
    value: float


class SelectRequest(BaseModel):
    objective: str = "schur_mi"
    s: int = Field(ge=1)
    optimizer: str = "greedy"


class SelectionModel(BaseModel):
    order: list[int]
    points: list[list[float]]
    gains: list[float]
    objective_trajectory: list[float]
    eval_count: int
    cache_build_seconds: float
    selection_seconds: float


class OneShotSelectRequest(BaseModel):
    points: list[list[float]] = Field(min_length=1)
    params: HyperParamsModel
    objective: str = "schur_mi"
    s: int = Field(ge=1)
    optimizer: str = "greedy"
    surrogate_sigma: float | None = Field(default=None, ge=0)
    seed: int = 0


class VerifyRequest(BaseModel):
    seed: int = 0
    trials: int = Field(default=50, ge=1)


class CheckResult(BaseModel):
    name: str
    failures: int
    worst: float


class VerifySummary(BaseModel):
    seed: int
    trials: int
    passed: bool
    checks: list[CheckResult]
