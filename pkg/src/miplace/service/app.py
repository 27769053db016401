"""FastAPI application: cache registry plus evaluation and selection.

Caches are held in process memory behind a lock and addressed by opaque
ids, so one factorization serves any number of evaluate/select calls.
"""

from __future__ import annotations

import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import bench
from ..errors import InvalidInputError, PlacementError
from ..kernels import HyperParams
from ..mi import MICache, build_cache
from ..objectives import KINDS, ObjectiveSpec, evaluate
from ..select import default_surrogate_sigma, greedy, lazy_greedy, make_surrogate, select_sensors
from . import schemas


class _Registry:
    def __init__(self):
        self._lock = threading.Lock()
        self._caches: dict[str, MICache] = {}

    def add(self, cache: MICache) -> str:
        cid = uuid.uuid4().hex
        with self._lock:
            self._caches[cid] = cache
        return cid

    def get(self, cid: str) -> MICache:
        with self._lock:
            cache = self._caches.get(cid)
        if cache is None:
            raise HTTPException(status_code=404, detail=f"no cache {cid!r}")
        return cache

    def drop(self, cid: str) -> bool:
        with self._lock:
            return self._caches.pop(cid, None) is not None


def _params(model: schemas.HyperParamsModel) -> HyperParams:
    return HyperParams(
        signal_variance=model.signal_variance,
        length_scale=model.length_scale,
        noise_variance=model.noise_variance,
    )


def _objective_spec(kind: str, precompute: bool = True) -> ObjectiveSpec:
    if kind not in KINDS:
        raise HTTPException(
            status_code=422, detail=f"objective must be one of {list(KINDS)}"
        )
    return ObjectiveSpec(kind=kind, precompute=precompute)


def _selection_model(res) -> schemas.SelectionModel:
    return schemas.SelectionModel(
        order=[int(i) for i in res.order],
        points=np.asarray(res.points).tolist(),
        gains=[float(g) for g in res.gains],
        objective_trajectory=[float(v) for v in res.objective_trajectory],
        eval_count=int(res.eval_count),
        cache_build_seconds=float(res.cache_build_time),
        selection_seconds=float(sum(res.wall_times)),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="miplace", version="0.1.0")
    registry = _Registry()

    @app.exception_handler(PlacementError)
    async def _placement_error(request, exc: PlacementError):
        from fastapi.responses import JSONResponse

        code = 422 if isinstance(exc, InvalidInputError) else 400
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/caches", response_model=schemas.CacheInfo)
    def create_cache(req: schemas.CacheRequest):
        V = np.asarray(req.points, dtype=float)
        params = _params(req.params)
        t0 = time.perf_counter()
        G = None
        if req.with_surrogate:
            sigma = req.surrogate_sigma
            if sigma is None:
                sigma = default_surrogate_sigma(V)
            G = make_surrogate(V, sigma, req.seed).G
        cache = build_cache(V, params, G=G, noise_in_diag=req.noise_in_diag)
        cid = registry.add(cache)
        return schemas.CacheInfo(
            cache_id=cid,
            m=cache.m,
            dim=V.shape[1],
            has_surrogate=cache.has_surrogate,
            build_seconds=time.perf_counter() - t0,
        )

    @app.delete("/caches/{cache_id}")
    def delete_cache(cache_id: str):
        if not registry.drop(cache_id):
            raise HTTPException(status_code=404, detail=f"no cache {cache_id!r}")
        return {"deleted": cache_id}

    @app.post("/caches/{cache_id}/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate_objective(cache_id: str, req: schemas.EvaluateRequest):
        cache = registry.get(cache_id)
        spec = _objective_spec(req.objective, req.precompute)
        value = evaluate(spec, req.indices, cache)
        return schemas.EvaluateResponse(objective=req.objective, value=value)

    @app.post("/caches/{cache_id}/select", response_model=schemas.SelectionModel)
    def select_from_cache(cache_id: str, req: schemas.SelectRequest):
        cache = registry.get(cache_id)
        spec = _objective_spec(req.objective)
        if req.optimizer not in bench.OPTIMIZERS:
            raise HTTPException(
                status_code=422,
                detail=f"optimizer must be one of {list(bench.OPTIMIZERS)}",
            )
        domain = cache.G if spec.kind == "schur_mi" else cache.V
        if domain is None:
            raise HTTPException(
                status_code=422,
                detail="schur_mi selection needs a cache built with a surrogate",
            )
        run = lazy_greedy if req.optimizer == "lazy" else greedy
        res = run(spec, domain, cache, req.s)
        return _selection_model(res)

    @app.post("/select", response_model=schemas.SelectionModel)
    def select_one_shot(req: schemas.OneShotSelectRequest):
        spec = _objective_spec(req.objective)
        if req.optimizer not in bench.OPTIMIZERS:
            raise HTTPException(
                status_code=422,
                detail=f"optimizer must be one of {list(bench.OPTIMIZERS)}",
            )
        res = select_sensors(
            np.asarray(req.points, dtype=float),
            _params(req.params),
            spec,
            req.s,
            sigma=req.surrogate_sigma,
            seed=req.seed,
            lazy=req.optimizer == "lazy",
        )
        return _selection_model(res)

    @app.post("/verify", response_model=schemas.VerifySummary)
    def run_verify(req: schemas.VerifyRequest):
        return bench.verify(seed=req.seed, trials=req.trials)

    return app


app = create_app()
