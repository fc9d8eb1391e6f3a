"""Batch runs: configuration, solver dispatch, JSON records and the benchmark sweep."""

from __future__ import annotations

import csv
import json
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from math import comb
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .clustering import KMeansObjective, KMedianObjective, unconstrained_ratio_bound
from .core import (
    GreedyBudget,
    SolutionSet,
    bicriteria_solve,
    greedy_extend,
    greedy_extend_until,
    iteration_budget,
)
from .exceptions import ConfigError, RankDeficientError, StallError
from .initializers import InitializerResult, d2_adaptive_sample, greedy_init
from .io import load_matrix
from .oracle import brute_force_min
from .regression import (
    AlphaCertificate,
    RegressionInstance,
    SMLRObjective,
    alpha_exact,
    alpha_sampled,
    alpha_spectral_bound,
    css_objective,
    sparse_regress,
)

OBJECTIVES = ("kmedian", "kmeans", "sparse", "smlr", "css")
CLUSTERING = ("kmedian", "kmeans")
#: Largest subset count ``alpha="auto"`` will enumerate exactly.
AUTO_EXACT_LIMIT = 2**12
SAMPLED_SUBSETS = 256
THREADS_ENV = "WSGREEDY_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    objective: str
    k: int
    epsilon: Optional[float] = None
    target_error: Optional[float] = None
    f_stop: Optional[float] = None
    alpha: str = "auto"
    init: Optional[str] = None
    beta: float = 2.0
    rho: Optional[float] = None
    seed: int = 0
    max_steps: Optional[int] = None
    input: Optional[str] = None
    target: Optional[str] = None
    output: Optional[str] = None
    oracle: bool = False

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; choose from {', '.join(OBJECTIVES)}")
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")
        modes = [m for m in ("epsilon", "target_error", "f_stop") if getattr(self, m) is not None]
        if len(modes) != 1:
            raise ConfigError(f"exactly one of epsilon, target_error, f_stop must be set (got {modes or 'none'})")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.target_error is not None and not self.target_error > 0:
            raise ConfigError("target_error must be positive")
        if self.f_stop is not None and not self.f_stop >= 0:
            raise ConfigError("f_stop must be non-negative")
        if self.alpha not in ("auto", "exact", "spectral"):
            try:
                a = float(self.alpha.split(":", 1)[-1])
            except ValueError:
                raise ConfigError(f"alpha must be auto, exact, spectral or a number >= 1, got {self.alpha!r}") from None
            if not a >= 1:
                raise ConfigError(f"manual alpha must be >= 1, got {a}")
        if self.rho is not None and not self.rho >= 1:
            raise ConfigError("rho must be >= 1")
        if self.init is None:
            self.init = {"kmeans": "d2", "kmedian": "greedy", "css": "greedy"}.get(self.objective, "none")
        if self.init == "d2" and self.objective != "kmeans":
            raise ConfigError("d2 initialization needs point data (objective kmeans)")
        if not (self.init in ("d2", "greedy") or self.init == "none" or self.init.startswith("none:")):
            raise ConfigError(f"init must be d2, greedy, none or none:i,j,..., got {self.init!r}")
        if self.objective in CLUSTERING and self.init == "none":
            raise ConfigError("clustering objectives need a non-empty start; use d2, greedy or none:i,j,...")

    @property
    def mode(self) -> str:
        return "epsilon" if self.epsilon is not None else "target_error" if self.target_error is not None else "f_stop"

    def explicit_start(self) -> List[int]:
        if self.init == "none":
            return []
        return [int(x) for x in self.init.split(":", 1)[1].split(",") if x.strip()]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    config: dict
    init: dict
    trace: list
    result: dict
    alpha: dict
    oracle: Optional[dict] = None
    report: Optional[dict] = None
    timings_ms: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, timings: bool = True) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ("oracle", "report"):
            if d[key] is None:
                del d[key]
        if not timings:
            del d["timings_ms"]
        return d

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**{f.name: d.get(f.name) for f in fields(cls) if f.name in d})


def write_record(record: RunRecord, path) -> None:
    with open(path, "w") as fh:
        fh.write(record.to_json())


def load_record(path) -> RunRecord:
    with open(path) as fh:
        return RunRecord.from_dict(json.load(fh))


# ---------------------------------------------------------------------------


def build_objective(config: RunConfig, X: Optional[np.ndarray] = None, Y: Optional[np.ndarray] = None):
    """Instantiate the objective named in ``config`` from its input files (or given arrays)."""
    if X is None:
        if config.input is None:
            raise ConfigError("an input matrix is required")
        X = load_matrix(config.input)
    if config.objective == "kmedian":
        return KMedianObjective(X)
    if config.objective == "kmeans":
        return KMeansObjective(X)
    if config.objective == "css":
        return css_objective(X)
    if Y is None:
        if config.target is None:
            raise ConfigError(f"objective {config.objective} needs a target matrix")
        Y = load_matrix(config.target)
    if config.objective == "sparse":
        if Y.ndim == 2 and Y.shape[0] == 1 and X.shape[0] != 1:
            Y = Y.T
        if Y.shape[1] != 1:
            raise ConfigError(f"sparse regression needs a single target column, got {Y.shape[1]}")
    return SMLRObjective(RegressionInstance(X, Y))


def _sampled_subsets(n: int, k: int, rng: np.random.Generator, extra=()):
    subsets = [[i] for i in range(n)]
    top = max(1, min(n, 3 * k))
    for _ in range(SAMPLED_SUBSETS):
        size = int(rng.integers(1, top + 1))
        subsets.append(sorted(rng.choice(n, size=size, replace=False).tolist()))
    subsets.extend(list(s) for s in extra)
    return subsets


def certify_alpha(config: RunConfig, f) -> AlphaCertificate:
    """Weak-supermodularity parameter used for iteration budgets."""
    mode = config.alpha
    if mode not in ("auto", "exact", "spectral"):
        return AlphaCertificate(float(mode.split(":", 1)[-1]), "manual", "user supplied")
    if isinstance(f, KMedianObjective):
        return AlphaCertificate(1.0, "exact", "k-median objectives are supermodular")
    inst = f.instance
    if mode == "exact":
        return alpha_exact(inst)
    if mode == "spectral":
        return alpha_spectral_bound(inst)
    n = inst.design.shape[1]
    if sum(comb(n, j) for j in range(1, n + 1)) <= AUTO_EXACT_LIMIT:
        return alpha_exact(inst)
    try:
        return alpha_spectral_bound(inst)
    except RankDeficientError:
        warnings.warn("alpha is estimated from sampled subsets; the size guarantee is heuristic")
        rng = np.random.default_rng(config.seed)
        return alpha_sampled(inst, _sampled_subsets(n, config.k, rng))


def initialize(config: RunConfig, f) -> InitializerResult:
    if config.init == "d2":
        return d2_adaptive_sample(f, config.k, config.beta, np.random.default_rng(config.seed))
    if config.init == "greedy":
        return greedy_init(f, config.k)
    start = SolutionSet(config.explicit_start(), f.n)
    if not len(start):
        return None
    return InitializerResult(start, None, "explicit", f.evaluate(start))


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


def run(config: RunConfig, X: Optional[np.ndarray] = None, Y: Optional[np.ndarray] = None) -> RunRecord:
    """Execute one configured solve and return its record (also written to ``config.output``)."""
    t_total = time.perf_counter()
    timings = {}
    f = build_objective(config, X, Y)

    t0 = time.perf_counter()
    alpha = certify_alpha(config, f)
    timings["alpha"] = _ms(t0)

    t0 = time.perf_counter()
    init = initialize(config, f)
    timings["init"] = _ms(t0)
    S0 = init.solution if init is not None else SolutionSet((), f.n)
    init_rec = {
        "method": init.method if init else "empty",
        "set": list(S0),
        "value": f.evaluate(S0),
        "claimed_rho": init.claimed_rho if init else None,
    }

    report = None
    t0 = time.perf_counter()
    if config.mode == "epsilon":
        rho = config.rho if config.rho is not None else (init.claimed_rho if init else None)
        if rho is None:
            raise ConfigError(f"initializer {init_rec['method']!r} has no approximation guarantee; pass --rho")
        S, trace = bicriteria_solve(f, lambda *_: S0, rho, config.k, alpha.alpha, config.epsilon)
        init_rec["rho_used"] = rho
    elif config.mode == "target_error":
        S, trace = greedy_extend(f, S0, GreedyBudget(alpha.alpha, config.k, config.target_error))
    elif config.objective == "sparse" and not len(S0):
        S, trace, rep = sparse_regress(f.instance, config.f_stop, k=config.k, alpha=alpha)
        report = rep.to_dict()
    else:
        S, trace = greedy_extend_until(f, S0, config.f_stop, config.max_steps)
        if trace.stop_reason == "stalled" and trace.final_value > config.f_stop:
            raise StallError(f"no element lowers the objective below {trace.final_value:.6g}")
    timings["solve"] = _ms(t0)

    if alpha.scope == "subset-sampled":
        prefixes = [list(S)[:j] for j in range(1, len(S) + 1)]
        post = alpha_sampled(f.instance, prefixes)
        if post.alpha > alpha.alpha:
            alpha = AlphaCertificate(post.alpha, "subset-sampled", alpha.detail + "; raised by subsets on the greedy path")

    result = {
        "set": list(S),
        "value": trace.final_value,
        "size": len(S),
        "stop_reason": trace.stop_reason,
        "budget": trace.budget,
    }
    if trace.target_error is not None:
        result["target_error"] = trace.target_error
    if config.objective == "kmeans" and config.mode == "epsilon":
        result["unconstrained_ratio_bound"] = unconstrained_ratio_bound(config.epsilon)

    oracle = None
    if config.oracle:
        t0 = time.perf_counter()
        rep = brute_force_min(f, config.k)
        opt = rep.optimum_value
        ratio = 1.0 if opt == 0 and trace.final_value == 0 else (trace.final_value / opt if opt > 0 else None)
        oracle = {"optimum": opt, "set": list(rep.optimum_set), "ratio": ratio}
        timings["oracle"] = _ms(t0)

    timings["total"] = _ms(t_total)
    record = RunRecord(
        config=config.to_dict(),
        init=init_rec,
        trace=trace.to_list(),
        result=result,
        alpha={"value": alpha.alpha, "scope": alpha.scope, "detail": alpha.detail},
        oracle=oracle,
        report=report,
        timings_ms=timings,
    )
    if config.output:
        write_record(record, config.output)
    return record


def recheck_record(record: RunRecord, X: Optional[np.ndarray] = None, Y: Optional[np.ndarray] = None) -> float:
    """Re-evaluate the recorded final set from the recorded inputs."""
    config = RunConfig(**record.config)
    f = build_objective(config, X, Y)
    return f.evaluate(record.result["set"])


# ---------------------------------------------------------------------------
# benchmark sweep
# ---------------------------------------------------------------------------

BENCH_COLUMNS = [
    "objective",
    "n",
    "k",
    "epsilon",
    "instances",
    "mean_ratio",
    "max_ratio",
    "mean_size",
    "size_bound",
    "runtime_ms",
]


def random_instance(objective: str, n: int, rng: np.random.Generator, d: int = 2):
    """Random desk-scale objective for the benchmark."""
    if objective == "kmedian":
        return KMedianObjective(rng.uniform(0.0, 1.0, size=(n, n)))
    if objective == "kmeans":
        return KMeansObjective(rng.normal(size=(n, d)))
    if objective == "css":
        return css_objective(rng.normal(size=(n, n)))
    if objective in ("smlr", "sparse"):
        ell = 1 if objective == "sparse" else 2
        return SMLRObjective(RegressionInstance(rng.normal(size=(n, n)), rng.normal(size=(n, ell))))
    raise ConfigError(f"unknown objective {objective!r}")


def _bench_instance(objective, n, k, epsilons, seed, d, beta):
    rng = np.random.default_rng(seed)
    f = random_instance(objective, n, rng, d)
    if objective == "kmeans":
        init = d2_adaptive_sample(f, k, beta, rng)
    else:
        init = greedy_init(f, k)
    alpha = 1.0 if isinstance(f, KMedianObjective) else alpha_exact(f.instance).alpha
    opt = brute_force_min(f, k).optimum_value
    f0 = f.evaluate(init.solution)
    rho = max(1.0, f0 / opt) if opt > 0 else 1.0
    rows = []
    for eps in epsilons:
        t0 = time.perf_counter()
        S, trace = bicriteria_solve(f, lambda *_: init.solution, rho, k, alpha, eps)
        elapsed = (time.perf_counter() - t0) * 1000.0
        value = trace.final_value
        ratio = value / opt if opt > 0 else 1.0
        bound = len(init.solution) + (iteration_budget(alpha, k, rho, eps) if rho > eps else 0)
        rows.append((eps, ratio, len(S), bound, elapsed))
    return rows


def bench(
    objectives: Sequence[str],
    n: int,
    k: int,
    epsilons: Sequence[float],
    repetitions: int,
    seed: int = 0,
    d: int = 2,
    beta: float = 2.0,
    threads: Optional[int] = None,
) -> List[Dict[str, Any]]:
    """Sweep ``epsilon`` over random instances and tabulate approximation ratios.

    Instance ``r`` of every objective uses seed ``seed + r``, so the same
    instances are shared across the epsilon sweep. Ratios use the
    brute-force optimum, and the warm-start ratio fed to the solver is the
    measured one.
    """
    if repetitions < 0:
        raise ConfigError("repetitions must be >= 0")
    threads = default_threads() if threads is None else threads
    table = []
    for objective in objectives:
        if objective == "kmeans" and math.ceil(beta * k) > n:
            raise ConfigError(f"kmeans bench needs n >= ceil(beta*k) = {math.ceil(beta * k)}")
        jobs = [(objective, n, k, list(epsilons), seed + r, d, beta) for r in range(repetitions)]
        if threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(lambda a: _bench_instance(*a), jobs))
        else:
            results = [_bench_instance(*a) for a in jobs]
        if not results:
            continue
        for j, eps in enumerate(epsilons):
            col = [res[j] for res in results]
            table.append(
                {
                    "objective": objective,
                    "n": n,
                    "k": k,
                    "epsilon": eps,
                    "instances": len(col),
                    "mean_ratio": float(np.mean([c[1] for c in col])),
                    "max_ratio": float(np.max([c[1] for c in col])),
                    "mean_size": float(np.mean([c[2] for c in col])),
                    "size_bound": int(max(c[3] for c in col)),
                    "runtime_ms": float(np.mean([c[4] for c in col])),
                }
            )
    return table


def write_bench_table(table, fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow(row)
