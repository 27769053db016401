"""Experiment runner: seeded splits, selection sweeps, scoring, reports.

A run is described by a RunConfig (JSON-serializable), executed by
run_experiment, and reported as one JSON document plus a flat CSV with
the columns ``s,repeat,objective,mi_standard,smse,rmse,evals,cache_s,
select_s``.  Every selection is additionally cross-scored under the
Standard-MI objective so different objective kinds can be compared on a
common scale.  Reports are byte-identical across runs with the same
config and seed, except for the timing fields.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import gp, mi
from .data import Dataset, load_dataset, make_synthetic
from .errors import InsufficientDataError, InvalidInputError, PlacementError
from .kernels import HyperParams, fit_hyperparams
from .objectives import KINDS, ObjectiveSpec, evaluate
from .select import (
    default_surrogate_sigma,
    greedy,
    lazy_greedy,
    make_surrogate,
    median_nn_distance,
    select_sensors,
)

# prior used when generating synthetic datasets without fixed hyperparams
GEN_PARAMS = HyperParams(signal_variance=1.0, length_scale=0.2, noise_variance=0.1)

OPTIMIZERS = ("greedy", "lazy")

CSV_HEADER = "s,repeat,objective,mi_standard,smse,rmse,evals,cache_s,select_s"

_HYPER_KEYS = ("signal_variance", "length_scale", "noise_variance")


@dataclass
class RunConfig:
    """Everything needed to reproduce one experiment.

    ``dataset`` is a CSV path; leave it None to run on a synthetic field
    of ``synthetic_m`` points (default: exactly enough for the split).
    ``hyperparams`` is either the string "fit" (maximize the marginal
    likelihood on the training split, per repeat) or a mapping with the
    three kernel parameters.  Defaults are desk-scale so a full sweep
    stays under a few minutes.
    """

    dataset: str | None = None
    synthetic_m: int | None = None
    objective: str = "schur_mi"
    optimizer: str = "greedy"
    s_values: list[int] = field(default_factory=lambda: list(range(5, 55, 5)))
    n_train: int = 300
    n_candidates: int = 200
    n_test: int = 500
    seed: int = 0
    sigma_surrogate: float | None = None
    hyperparams: str | dict = "fit"
    repeats: int = 1

    def validate(self):
        if self.objective not in KINDS:
            raise InvalidInputError(
                f"objective must be one of {KINDS}, got {self.objective!r}"
            )
        if self.optimizer not in OPTIMIZERS:
            raise InvalidInputError(
                f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}"
            )
        if not self.s_values:
            raise InvalidInputError("s_values must be nonempty")
        for s in self.s_values:
            if int(s) != s or not 1 <= s <= self.n_candidates:
                raise InvalidInputError(
                    f"every s must be an integer in [1, n_candidates], got {s}"
                )
        if self.repeats < 1:
            raise InvalidInputError("repeats must be >= 1")
        if min(self.n_train, self.n_candidates, self.n_test) < 1:
            raise InvalidInputError("n_train, n_candidates, n_test must be >= 1")
        if self.sigma_surrogate is not None and self.sigma_surrogate < 0:
            raise InvalidInputError("sigma_surrogate must be >= 0")
        if isinstance(self.hyperparams, str):
            if self.hyperparams != "fit":
                raise InvalidInputError(
                    "hyperparams must be 'fit' or a mapping of the three "
                    f"kernel parameters, got {self.hyperparams!r}"
                )
        elif isinstance(self.hyperparams, dict):
            if set(self.hyperparams) != set(_HYPER_KEYS):
                raise InvalidInputError(
                    f"hyperparams mapping needs exactly the keys {_HYPER_KEYS}"
                )
            HyperParams(**{k: float(v) for k, v in self.hyperparams.items()})
        else:
            raise InvalidInputError("hyperparams must be 'fit' or a mapping")
        if self.synthetic_m is not None and self.dataset is not None:
            raise InvalidInputError("give either a dataset path or synthetic_m")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        if cfg.s_values is not None:
            cfg.s_values = [int(s) for s in cfg.s_values]
        return cfg.validate()

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    s: int
    repeat: int
    indices: list[int]
    objective_value: float
    mi_standard: float
    smse: float
    rmse: float
    eval_count: int
    cache_build_seconds: float
    selection_seconds: float


@dataclass
class RunReport:
    config: dict
    dataset_name: str
    hyperparams: list[dict]
    records: list[RunRecord]


def _resolve_dataset(config: RunConfig) -> Dataset:
    if config.dataset is not None:
        return load_dataset(config.dataset)
    m = config.synthetic_m
    if m is None:
        m = config.n_train + config.n_candidates + config.n_test
    params = _fixed_params(config) or GEN_PARAMS
    return make_synthetic(config.seed, m, params)


def _fixed_params(config: RunConfig) -> HyperParams | None:
    if isinstance(config.hyperparams, dict):
        return HyperParams(**{k: float(v) for k, v in config.hyperparams.items()})
    return None


def _split(rng: np.random.Generator, ds: Dataset, config: RunConfig):
    """Disjoint test / candidate / train index sets by seeded shuffling.

    Test and candidate sizes are exact; the training split takes up to
    n_train of whatever remains (fitting tolerates a short split,
    prediction never uses it).
    """
    need = config.n_test + config.n_candidates
    if need > ds.n:
        raise InsufficientDataError(
            f"dataset has {ds.n} rows, split needs n_test + n_candidates = {need}"
        )
    perm = rng.permutation(ds.n)
    test = perm[: config.n_test]
    cand = perm[config.n_test : need]
    train = perm[need : need + config.n_train]
    return test, cand, train


def _fit_or_fix(config: RunConfig, ds: Dataset, train: np.ndarray) -> HyperParams:
    fixed = _fixed_params(config)
    if fixed is not None:
        return fixed
    X = ds.points[train]
    y = ds.values[train]
    if X.shape[0] < 2:
        raise InsufficientDataError(
            "hyperparameter fitting needs at least 2 training rows"
        )
    sig = max(float(np.var(y)), 1e-3)
    ell = max(5.0 * median_nn_distance(X), 1e-3)
    init = HyperParams(sig, ell, 0.1 * sig)
    bounds = {
        "signal_variance": (sig * 1e-2, sig * 1e2),
        "length_scale": (ell * 1e-2, ell * 1e2),
        "noise_variance": (sig * 1e-3, sig * 1e1),
    }
    return fit_hyperparams(X, y, init, bounds)


def run_experiment(config: RunConfig) -> RunReport:
    """Execute the full sweep described by ``config``.

    Per repeat: split the dataset by seeded sampling, fit or fix the
    kernel, then run selection for every s.  Each selection is scored by
    (a) its own objective, (b) Standard-MI over the candidate set,
    (c) SMSE/RMSE of the GP posterior on the held-out test split using
    the selected locations' values as observations.
    """
    config.validate()
    ds = _resolve_dataset(config)
    spec = ObjectiveSpec(kind=config.objective)
    lazy = config.optimizer == "lazy"

    fitted: list[dict] = []
    records: list[RunRecord] = []
    for r in range(config.repeats):
        rng = np.random.default_rng([config.seed, r])
        test, cand, train = _split(rng, ds, config)
        params = _fit_or_fix(config, ds, train)
        fitted.append({k: getattr(params, k) for k in _HYPER_KEYS})

        V = ds.points[cand]
        test_X = ds.points[test]
        test_y = ds.values[test]
        test_var = float(np.var(test_y))
        surro_seed = int(
            np.random.SeedSequence([config.seed, r, 1]).generate_state(1)[0]
        )
        vcache = mi.build_cache(V, params)

        for s in config.s_values:
            try:
                res = select_sensors(
                    V,
                    params,
                    spec,
                    s,
                    sigma=config.sigma_surrogate,
                    seed=surro_seed,
                    lazy=lazy,
                )
                idx = res.order
                cross = mi.standard_mi(idx, vcache)
                pred = gp.posterior(params, V[idx], ds.values[cand[idx]], test_X)
                m = gp.metrics(pred, test_y, test_var)
            except PlacementError as exc:
                if hasattr(exc, "add_note"):
                    exc.add_note(f"at s={s}, repeat={r}")
                raise
            records.append(
                RunRecord(
                    s=int(s),
                    repeat=r,
                    indices=[int(i) for i in idx],
                    objective_value=float(res.objective_trajectory[-1]),
                    mi_standard=float(cross),
                    smse=float(m.smse),
                    rmse=float(m.rmse),
                    eval_count=int(res.eval_count),
                    cache_build_seconds=float(res.cache_build_time),
                    selection_seconds=float(sum(res.wall_times)),
                )
            )
    return RunReport(
        config=config.to_dict(),
        dataset_name=ds.name,
        hyperparams=fitted,
        records=records,
    )


def report_to_json(report: RunReport) -> str:
    doc = {
        "config": report.config,
        "dataset": report.dataset_name,
        "hyperparams": report.hyperparams,
        "records": [asdict(rec) for rec in report.records],
    }
    return json.dumps(doc, indent=2) + "\n"


def report_to_csv(report: RunReport) -> str:
    lines = [CSV_HEADER]
    for rec in report.records:
        lines.append(
            f"{rec.s},{rec.repeat},{rec.objective_value!r},{rec.mi_standard!r},"
            f"{rec.smse!r},{rec.rmse!r},{rec.eval_count},"
            f"{rec.cache_build_seconds!r},{rec.selection_seconds!r}"
        )
    return "\n".join(lines) + "\n"


def measure_eval_time(
    m: int,
    s: int,
    method: str = "schur",
    seed: int = 0,
    n_evals: int = 100,
    repeats: int = 3,
    params: HyperParams = GEN_PARAMS,
) -> float:
    """Mean wall time per objective evaluation, cache build excluded.

    Builds one cache over m uniform candidates, draws ``n_evals`` random
    index sets of size s, and times the evaluation loop; returns the
    minimum over ``repeats`` passes to damp scheduler noise.  Methods:
    ``schur`` (discrete precomputed path), ``schur_nopre`` (refactors
    K_VV per call), ``standard`` (uses the cached log det K_VV),
    ``standard_nopre`` (refactors it).
    """
    if method not in ("schur", "schur_nopre", "standard", "standard_nopre"):
        raise InvalidInputError(f"unknown timing method {method!r}")
    if not 1 <= s <= m:
        raise InvalidInputError(f"need 1 <= s <= m, got s={s}, m={m}")
    rng = np.random.default_rng([seed, m, s])
    V = rng.uniform(0.0, 1.0, size=(m, 2))
    surro = make_surrogate(V, default_surrogate_sigma(V), seed)
    cache = mi.build_cache(V, params, G=surro.G)
    idx_sets = [rng.choice(m, size=s, replace=False) for _ in range(n_evals)]

    if method == "schur":
        fn = lambda idx: mi.schur_mi(idx, cache)
    elif method == "schur_nopre":
        fn = lambda idx: mi.schur_mi_no_precompute(idx, cache)
    elif method == "standard":
        fn = lambda idx: mi.standard_mi(idx, cache, use_precompute=True)
    else:
        fn = lambda idx: mi.standard_mi(idx, cache, use_precompute=False)

    best = np.inf
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        for idx in idx_sets:
            fn(idx)
        best = min(best, (time.perf_counter() - t0) / n_evals)
    return best


def _rand_instance(rng, m_max=12, s_max=4, d=2):
    m = int(rng.integers(4, m_max + 1))
    s = int(rng.integers(1, min(s_max, m) + 1))
    params = HyperParams(
        signal_variance=float(rng.uniform(0.5, 2.0)),
        length_scale=float(rng.uniform(0.1, 0.6)),
        noise_variance=float(rng.uniform(0.05, 0.3)),
    )
    V = rng.uniform(0.0, 1.0, size=(m, d))
    return m, s, params, V


def verify(seed: int = 0, trials: int = 100) -> dict:
    """Randomized self-test of the MI formulations and optimizers.

    Runs five checks on ``trials`` random instances each and returns a
    summary with per-check failure counts and worst-case discrepancies.
    Failures are reported as data, not raised.  Deterministic per seed.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    root = np.random.SeedSequence([seed, 0xC0FFEE])
    streams = [np.random.default_rng(s) for s in root.spawn(5)]
    checks = []

    # 1. Schur determinant identity: union form equals Schur form.
    rng = streams[0]
    worst = 0.0
    fails = 0
    for _ in range(trials):
        m, s, params, V = _rand_instance(rng)
        A = rng.uniform(0.0, 1.0, size=(s, V.shape[1]))
        cache = mi.build_cache(V, params)
        d = abs(mi.union_mi(A, cache) - mi.schur_mi(A, cache))
        worst = max(worst, d)
        fails += d > 1e-8
    checks.append(
        {"name": "schur_identity", "failures": int(fails), "worst": float(worst)}
    )

    # 2. Formulation equivalence: precomputed paths match refactoring
    # paths bit-for-bit in exact arithmetic, 1e-8 allowed here.
    rng = streams[1]
    worst = 0.0
    fails = 0
    for _ in range(trials):
        m, s, params, V = _rand_instance(rng)
        surro = make_surrogate(V, default_surrogate_sigma(V), int(rng.integers(1 << 31)))
        cache = mi.build_cache(V, params, G=surro.G)
        idx = rng.choice(m, size=s, replace=False)
        d1 = abs(mi.schur_mi(idx, cache) - mi.schur_mi_no_precompute(idx, cache))
        d2 = abs(
            mi.standard_mi(idx, cache, use_precompute=True)
            - mi.standard_mi(idx, cache, use_precompute=False)
        )
        d3 = abs(mi.union_mi(surro.G[idx], cache) - mi.schur_mi(idx, cache))
        d = max(d1, d2, d3)
        worst = max(worst, d)
        fails += d > 1e-8
    checks.append(
        {
            "name": "formulation_equivalence",
            "failures": int(fails),
            "worst": float(worst),
        }
    )

    # 3. Degeneracy: A inside V collapses to the entropy term, and the
    # jiggled surrogate strictly escapes the collapse.
    rng = streams[2]
    worst = 0.0
    fails = 0
    for _ in range(trials):
        m, s, params, V = _rand_instance(rng)
        surro = make_surrogate(V, default_surrogate_sigma(V), int(rng.integers(1 << 31)))
        cache = mi.build_cache(V, params, G=surro.G)
        idx = rng.choice(m, size=s, replace=False)
        degenerate = mi.union_mi(V[idx], cache)
        half_logdet = 0.5 * mi.logdet(cache.K_VV[np.ix_(idx, idx)])[0]
        d = abs(degenerate - half_logdet)
        worst = max(worst, d)
        ok = d <= 1e-4 and mi.schur_mi(idx, cache) > degenerate
        fails += not ok
    checks.append(
        {"name": "degeneracy", "failures": int(fails), "worst": float(worst)}
    )

    # 4. Greedy achieves at least (1 - 1/e) of the exhaustive optimum.
    rng = streams[3]
    worst = 0.0
    fails = 0
    bound = 1.0 - 1.0 / np.e
    for _ in range(trials):
        m, s, params, V = _rand_instance(rng, m_max=10, s_max=3)
        surro = make_surrogate(V, default_surrogate_sigma(V), int(rng.integers(1 << 31)))
        cache = mi.build_cache(V, params, G=surro.G)
        spec = ObjectiveSpec(kind="schur_mi")
        res = greedy(spec, surro.G, cache, s)
        best = max(
            evaluate(spec, list(combo), cache)
            for combo in itertools.combinations(range(m), s)
        )
        margin = res.objective_trajectory[-1] - bound * best
        worst = max(worst, -margin)
        fails += margin < -1e-9
    checks.append(
        {"name": "greedy_guarantee", "failures": int(fails), "worst": float(max(0.0, worst))}
    )

    # 5. Lazy greedy reproduces greedy exactly with no extra evaluations.
    rng = streams[4]
    worst = 0.0
    fails = 0
    for _ in range(trials):
        m, s, params, V = _rand_instance(rng, m_max=25, s_max=6)
        surro = make_surrogate(V, default_surrogate_sigma(V), int(rng.integers(1 << 31)))
        cache = mi.build_cache(V, params, G=surro.G)
        spec = ObjectiveSpec(kind="schur_mi")
        g = greedy(spec, surro.G, cache, s)
        lz = lazy_greedy(spec, surro.G, cache, s)
        same = g.order == lz.order and lz.eval_count <= g.eval_count
        d = abs(g.objective_trajectory[-1] - lz.objective_trajectory[-1])
        worst = max(worst, d)
        fails += not (same and d <= 1e-10)
    checks.append(
        {"name": "lazy_matches_greedy", "failures": int(fails), "worst": float(worst)}
    )

    passed = all(c["failures"] == 0 for c in checks)
    return {"seed": int(seed), "trials": int(trials), "passed": passed, "checks": checks}
