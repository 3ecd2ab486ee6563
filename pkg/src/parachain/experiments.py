"""Replication engine: coverage tables and running-statistic tables.

Each replication j simulates m chains of max(n_grid) iterations; chain k
uses the random stream mix64(base_seed, replication_offset + j, k), so
replications are embarrassingly parallel and the output is independent
of worker count. Aggregation folds per-replication results in
replication order, making every table deterministic given the seed.

Replications where an indefinite lugsail estimate reaches a determinant
or inverse are excluded from that cell and counted in its ``excluded``
column, never hidden.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chainio import read_chains
from .config import ExperimentConfig
from .diagnostics import confidence_region_test, ess
from .errors import ConfigError, NotPositiveDefinite
from .estimators import (
    BatchSpec,
    CovarianceEstimate,
    abm,
    default_batch_size,
    lugsail_bm,
    naive,
    rbm,
)
from .numerics import ChainSet, RngState, frobenius_norm, mix64
from .samplers import (
    ROSENBROCK_TRUE_MEAN,
    RwmParams,
    gibbs_run,
    gibbs_start_points,
    gibbs_true_sigma,
    rosenbrock_logpdf,
    rosenbrock_start_points,
    rwm_run,
)

RUNNING_STATS = ("frobenius", "ess_per_sample")

_HIT, _MISS, _EXCLUDED = 0, 1, 2


@dataclass(frozen=True)
class CoverageRow:
    """One cell of a coverage table."""

    n: int
    estimator: str
    coverage: float
    mc_se: float
    excluded: int


@dataclass(frozen=True)
class RunningRow:
    """One cell of a running-statistic table."""

    n: int
    estimator: str
    mean: float
    se: float
    excluded: int


def resolve_threads(threads: int | None) -> int:
    """CLI --threads wins; PARACHAIN_THREADS is the fallback; default 1."""
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("PARACHAIN_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PARACHAIN_THREADS must be an integer, got {env!r}") from None
    return 1


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def true_mean(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.target == "gibbs":
        return np.array([cfg.mu1, cfg.mu2])
    if cfg.target == "rosenbrock":
        return ROSENBROCK_TRUE_MEAN.copy()
    raise ConfigError(f"target {cfg.target!r} has no known true mean")


def simulate_replication(cfg: ExperimentConfig, replication: int) -> ChainSet:
    """Simulate the m chains of one replication at max(n_grid) iterations."""
    n_max = max(cfg.n_grid)
    j = cfg.replication_offset + replication
    states = [
        RngState(seed=cfg.base_seed, stream=mix64(cfg.base_seed, j, k))
        for k in range(cfg.m)
    ]
    if cfg.target == "gibbs":
        params = cfg.gibbs_params()
        starts = gibbs_start_points(params, cfg.m)
        chains = [
            gibbs_run(params, n_max, starts[k], states[k]) for k in range(cfg.m)
        ]
    elif cfg.target == "rosenbrock":
        starts = rosenbrock_start_points(cfg.m, cfg.init_spread)
        chains = [
            rwm_run(
                RwmParams(rosenbrock_logpdf, cfg.proposal_sd, starts[k]),
                n_max,
                states[k],
            ).chain
            for k in range(cfg.m)
        ]
    else:
        raise ConfigError("external targets are read from file, not simulated")
    return ChainSet(np.stack(chains), validate=False)


def sigma_estimate(
    cs: ChainSet, name: str, spec: BatchSpec, cfg: ExperimentConfig | None = None
) -> CovarianceEstimate:
    """Dispatch one estimator name against a (prefix of a) chain set."""
    if name == "rbm":
        return rbm(cs, spec)
    if name == "abm":
        return abm(cs, spec)
    if name == "naive":
        return naive(cs)
    if name == "bm":
        return lugsail_bm(cs.chain(0), spec)
    if name == "true":
        if cfg is None or cfg.target != "gibbs":
            raise ConfigError("the 'true' covariance needs a gibbs experiment config")
        return CovarianceEstimate(
            matrix=gibbs_true_sigma(cfg.gibbs_params()),
            method="true",
            r=1,
            c=0.0,
            b=0,
            n=cs.n,
            m=cs.m,
        )
    raise ConfigError(f"unknown estimator {name!r}")


def _map_replications(cfg: ExperimentConfig, threads: int, fn):
    if threads <= 1:
        return [fn(j) for j in range(cfg.replications)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(cfg.replications)))


def _load_external(cfg: ExperimentConfig) -> ChainSet:
    cs = read_chains(cfg.chains_file)
    if cs.m != cfg.m:
        raise ConfigError(f"config m={cfg.m} but {cfg.chains_file!r} holds m={cs.m}")
    if cs.n < max(cfg.n_grid):
        raise ConfigError(
            f"n_grid needs {max(cfg.n_grid)} iterations but the file holds {cs.n}"
        )
    if cfg.replications != 1:
        raise ConfigError("an external target supports exactly one replication")
    return cs


# ---------------------------------------------------------------------------
# coverage
# ---------------------------------------------------------------------------

def run_coverage(cfg: ExperimentConfig, threads: int = 1) -> list[CoverageRow]:
    """Coverage of the level-% confidence regions across replications.

    Every replication is prefix-evaluated at each n in n_grid and each
    estimator; the region either contains the true mean (hit), misses,
    or is excluded because the estimate was not positive definite.
    """
    mu0 = true_mean(cfg)  # rejects targets without a known mean
    grid = cfg.n_grid
    names = cfg.estimators

    def one(j: int) -> np.ndarray:
        cs_full = simulate_replication(cfg, j)
        codes = np.empty((len(grid), len(names)), dtype=np.int8)
        for i, n in enumerate(grid):
            cs = cs_full.prefix(n)
            mu_hat = cs.values.mean(axis=(0, 1))
            b = default_batch_size(n, cfg.batch_mode, cfg.batch_multiplier)
            spec = BatchSpec(b=b, r=cfg.r, c=cfg.c)
            for e, name in enumerate(names):
                try:
                    est = sigma_estimate(cs, name, spec, cfg)
                    outcome = confidence_region_test(
                        mu_hat, est, mu0, cfg.level, cs.m, n
                    )
                    codes[i, e] = _HIT if outcome.contains else _MISS
                except NotPositiveDefinite:
                    codes[i, e] = _EXCLUDED
        return codes

    all_codes = np.stack(_map_replications(cfg, threads, one))
    rows = []
    for i, n in enumerate(grid):
        for e, name in enumerate(names):
            col = all_codes[:, i, e]
            excluded = int((col == _EXCLUDED).sum())
            used = cfg.replications - excluded
            if used == 0:
                coverage = float("nan")
                mc_se = float("nan")
            else:
                coverage = float((col == _HIT).sum()) / used
                mc_se = float(
                    np.sqrt(coverage * (1.0 - coverage) / cfg.replications)
                )
            rows.append(CoverageRow(n=n, estimator=name, coverage=coverage, mc_se=mc_se, excluded=excluded))
    return rows


# ---------------------------------------------------------------------------
# running statistics
# ---------------------------------------------------------------------------

def run_running_stat(
    cfg: ExperimentConfig, stat: str = "frobenius", threads: int = 1
) -> list[RunningRow]:
    """Mean and standard error of a statistic along the n_grid.

    ``frobenius`` tracks the Frobenius norm of each covariance estimate
    (for the gibbs target, the 'true' estimator contributes the oracle
    norm as a horizontal reference line). ``ess_per_sample`` tracks
    ESS/(m*n), with the average sample covariance re-estimated on each
    prefix.
    """
    if stat not in RUNNING_STATS:
        raise ConfigError(f"stat must be one of {RUNNING_STATS}, got {stat!r}")
    grid = cfg.n_grid
    names = cfg.estimators
    external = _load_external(cfg) if cfg.target == "external" else None

    def one(j: int) -> np.ndarray:
        cs_full = external if external is not None else simulate_replication(cfg, j)
        vals = np.full((len(grid), len(names)), np.nan)
        for i, n in enumerate(grid):
            cs = cs_full.prefix(n)
            b = default_batch_size(n, cfg.batch_mode, cfg.batch_multiplier)
            spec = BatchSpec(b=b, r=cfg.r, c=cfg.c)
            for e, name in enumerate(names):
                try:
                    est = sigma_estimate(cs, name, spec, cfg)
                    if stat == "frobenius":
                        vals[i, e] = frobenius_norm(est.matrix)
                    else:
                        vals[i, e] = ess(cs, est).per_sample
                except NotPositiveDefinite:
                    pass  # leave nan; counted as excluded below
        return vals

    all_vals = np.stack(_map_replications(cfg, threads, one))
    rows = []
    for i, n in enumerate(grid):
        for e, name in enumerate(names):
            col = all_vals[:, i, e]
            keep = col[np.isfinite(col)]
            excluded = int(col.size - keep.size)
            if keep.size == 0:
                mean = float("nan")
                se = float("nan")
            else:
                mean = float(keep.mean())
                se = (
                    float(keep.std(ddof=1) / np.sqrt(keep.size))
                    if keep.size >= 2
                    else 0.0
                )
            rows.append(RunningRow(n=n, estimator=name, mean=mean, se=se, excluded=excluded))
        # the gibbs Frobenius table always carries the oracle reference line
        if cfg.target == "gibbs" and stat == "frobenius" and "true" not in names:
            oracle = frobenius_norm(gibbs_true_sigma(cfg.gibbs_params()))
            rows.append(RunningRow(n=n, estimator="true", mean=oracle, se=0.0, excluded=0))
    return rows


# ---------------------------------------------------------------------------
# delimited output
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return repr(float(value))


def coverage_rows_to_csv(rows: list[CoverageRow]) -> str:
    buf = io.StringIO()
    buf.write("n,estimator,coverage,mc_se,excluded\n")
    for row in rows:
        buf.write(
            f"{row.n},{row.estimator},{_fmt(row.coverage)},{_fmt(row.mc_se)},{row.excluded}\n"
        )
    return buf.getvalue()


def running_rows_to_csv(rows: list[RunningRow]) -> str:
    buf = io.StringIO()
    buf.write("n,estimator,mean,se,excluded\n")
    for row in rows:
        buf.write(
            f"{row.n},{row.estimator},{_fmt(row.mean)},{_fmt(row.se)},{row.excluded}\n"
        )
    return buf.getvalue()
