"""Empirical hardness runs: draw a hypothesis, sample, decode by exact ML, score.

For each sample size ``n`` the harness estimates the decoder's error rate
on a hard ensemble and sets it beside the single-ball Fano floor
``1 - (n rho + log 2) / log|T|``, evaluated both with the certified radius
and with the exact largest KL from a member to the center.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .bounds import fano_floor
from .ensembles import HardEnsemble, build, load_ensemble, validate_ensemble
from .errors import ArgumentError
from .graph import Graph
from .ising import ExactSampler, IsingModel, SampleSet, infer_exact, kl_exact
from .seeding import derive_seed

CI_METHOD = "wilson"
CI_LEVEL = 0.95
Z95 = 1.959963984540054

CSV_COLUMNS = ["n", "trials", "errors", "p_hat", "ci_low", "ci_high",
               "fano_floor_certified", "fano_floor_exact"]


def ml_decode(candidates: Sequence[Graph], samples: SampleSet, lam: float,
              log_partitions: Sequence[float] | None = None) -> int:
    """Index of the maximum-likelihood candidate; ties go to the lowest index.

    All candidates share ``lam``, so the samples enter only through the pair
    sums ``S = X^T X`` and each log-likelihood is
    ``lam * sum_{(i,j) in E} S_ij - n log Z``.
    """
    if not candidates:
        raise ArgumentError("no candidates")
    if log_partitions is None:
        log_partitions = [infer_exact(IsingModel(g, lam)).log_partition for g in candidates]
    n = samples.num_samples
    if n == 0:
        return 0
    x = samples.samples.astype(np.float64)
    pair = x.T @ x
    best, best_ll = 0, -math.inf
    for i, (g, log_z) in enumerate(zip(candidates, log_partitions)):
        if g.num_vertices != samples.p:
            raise ArgumentError(f"candidate {i} has {g.num_vertices} vertices, samples have {samples.p}")
        stat = sum(pair[u, v] for u, v in g.edges)
        ll = lam * stat - n * log_z
        if ll > best_ll:
            best, best_ll = i, ll
    return best


def wilson_interval(errors: int, trials: int) -> tuple[float, float]:
    ci = binomtest(errors, trials).proportion_ci(confidence_level=CI_LEVEL, method=CI_METHOD)
    return float(ci.low), float(ci.high)


def wilson_se(errors: int, trials: int) -> float:
    """Half-width of the 95% Wilson interval divided by z: a Wilson standard error."""
    lo, hi = wilson_interval(errors, trials)
    return (hi - lo) / (2.0 * Z95)


@dataclass
class ExperimentConfig:
    ensemble: str | dict
    lam: float
    n_values: list[int]
    trials: int = 100
    seed: int = 0
    decoder: str = "ML_EXACT"
    metric: str = "AVG"
    include_center: bool = False
    validate: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ArgumentError("trials must be at least 1")
        if not self.n_values or any(int(n) < 1 for n in self.n_values):
            raise ArgumentError("every n must be at least 1")
        self.n_values = [int(n) for n in self.n_values]
        self.metric = self.metric.upper()
        if self.metric not in ("AVG", "MAX"):
            raise ArgumentError("metric must be AVG or MAX")
        if self.decoder.upper() != "ML_EXACT":
            raise ArgumentError("only the ML_EXACT decoder is available")
        if not self.lam > 0:
            raise ArgumentError("lambda must be positive")
        if self.workers < 1:
            raise ArgumentError("workers must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        if "n" in d:
            d["n_values"] = d.pop("n")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        cfg = cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        if isinstance(cfg.ensemble, str) and not Path(cfg.ensemble).is_absolute():
            cfg.ensemble = str((Path(path).parent / cfg.ensemble).resolve())
        return cfg


@dataclass
class ResultRow:
    n: int
    trials: int
    errors: int
    p_hat: float
    ci_low: float
    ci_high: float
    fano_floor_certified: float
    fano_floor_exact: float
    worst_member: int | None = None


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    hypothesis_count: int
    rho_certified: float
    rho_exact: float
    metric: str
    ci_method: str = CI_METHOD
    config: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.n, r.trials, r.errors, repr(r.p_hat), repr(r.ci_low), repr(r.ci_high),
                        repr(r.fano_floor_certified), repr(r.fano_floor_exact)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_time")
        return d


def resolve_ensemble(spec, lam: float) -> HardEnsemble:
    """An ensemble from a directory path or an inline ``{"class": ..., params}`` dict."""
    if isinstance(spec, dict):
        kw = dict(spec)
        name = kw.pop("class")
        kw.setdefault("lam", lam)
        return build(name, **kw)
    e = load_ensemble(spec)
    if e.lam != lam:
        raise ArgumentError(f"ensemble was built for lambda={e.lam}, config asks for {lam}")
    return e


def exact_radius(e: HardEnsemble) -> float:
    """Largest exact KL from a member to the center."""
    center = IsingModel(e.center, e.lam)
    return max(kl_exact(IsingModel(m, e.lam), center) for m in e.members)


def _uniform_index(seed: int, count: int) -> int:
    return int(((seed >> 11) * (1.0 / (1 << 53))) * count)


def run_experiment(cfg: ExperimentConfig, ensemble: HardEnsemble | None = None) -> ExperimentResult:
    """Estimate the ML decoder's error for every ``n`` in the config.

    AVG draws the true member uniformly per trial; MAX runs ``trials`` trials
    on every member and reports the worst one.  Trial ``j`` at the ``i``-th
    sample size uses the seed ``derive_seed(seed, i, j)``, so results do not
    depend on execution order or on ``workers``.  Wall time is kept on the
    result object but never written to the result files.
    """
    start = time.perf_counter()
    e = ensemble or resolve_ensemble(cfg.ensemble, cfg.lam)
    if cfg.validate:
        rep = validate_ensemble(e, kl_max_p=0)
        if not rep.ok:
            raise ArgumentError("ensemble failed validation: " + "; ".join(rep.violations[:5]))
    truth = list(e.members)
    candidates = truth + ([e.center] if cfg.include_center else [])
    log_z = [infer_exact(IsingModel(g, e.lam)).log_partition for g in candidates]
    # every table is built up front so worker threads only ever read shared state
    samplers = [ExactSampler(IsingModel(g, e.lam)) for g in truth]
    size = len(truth)

    def trial(i: int, seed: int, n: int) -> int:
        x = samplers[i].draw(n, derive_seed(seed, 1))
        return int(ml_decode(candidates, x, e.lam, log_z) != i)

    def run_all(jobs):
        if cfg.workers == 1:
            return [trial(*j) for j in jobs]
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda j: trial(*j), jobs))

    rho_exact = exact_radius(e)
    rows = []
    for ni, n in enumerate(cfg.n_values):
        if cfg.metric == "AVG":
            jobs = []
            for j in range(cfg.trials):
                s = derive_seed(cfg.seed, ni, j)
                jobs.append((_uniform_index(derive_seed(s, 0), size), s, n))
            errors = sum(run_all(jobs))
            worst = None
        else:
            jobs = [(i, derive_seed(cfg.seed, ni, i, j), n)
                    for i in range(size) for j in range(cfg.trials)]
            flags = run_all(jobs)
            per_member = [sum(flags[i * cfg.trials:(i + 1) * cfg.trials]) for i in range(size)]
            worst = int(np.argmax(per_member))
            errors = per_member[worst]
        lo, hi = wilson_interval(errors, cfg.trials)
        rows.append(ResultRow(
            n=n, trials=cfg.trials, errors=int(errors), p_hat=errors / cfg.trials,
            ci_low=lo, ci_high=hi,
            fano_floor_certified=fano_floor(n, e.rho, size),
            fano_floor_exact=fano_floor(n, rho_exact, size),
            worst_member=worst,
        ))
    cfg_echo = asdict(cfg)
    return ExperimentResult(rows, size, e.rho, rho_exact, cfg.metric, config=cfg_echo,
                            wall_time=time.perf_counter() - start)


def write_result(result: ExperimentResult, out_dir, plot: bool = True) -> list[Path]:
    """Write ``result.csv``, ``result.json`` and (optionally) ``fano.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "result.csv", out / "result.json"]
    paths[0].write_text(result.to_csv(), encoding="utf-8")
    paths[1].write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if plot:
        from .plotting import plot_fano

        paths.append(plot_fano(result, out / "fano.png"))
    return paths
