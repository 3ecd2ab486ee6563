"""Experiment configuration: a flat JSON document with fail-fast validation.

Unknown keys are errors so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .samplers import (
    DEFAULT_ROSENBROCK_INIT_SPREAD,
    DEFAULT_ROSENBROCK_PROPOSAL_SD,
    GibbsParams,
)

VALID_TARGETS = ("gibbs", "rosenbrock", "external")
VALID_ESTIMATORS = ("bm", "abm", "rbm", "naive", "true")
VALID_BATCH_MODES = ("sqrt", "cube_root")


@dataclass(frozen=True)
class ExperimentConfig:
    """One coverage or running-statistic experiment.

    ``n_grid`` holds the prefix lengths at which each replication is
    evaluated; every replication simulates max(n_grid) iterations per
    chain. ``replication_offset`` shifts the replication indices used
    for seeding, which lets one experiment be split across invocations
    (offsets 0 and R1) whose union reproduces a single run of R1 + R2
    replications exactly.
    """

    target: str
    m: int
    n_grid: tuple[int, ...]
    replications: int
    estimators: tuple[str, ...]
    base_seed: int
    batch_mode: str = "sqrt"
    batch_multiplier: float = 1.0
    r: int = 3
    c: float = 0.5
    level: float = 0.95
    replication_offset: int = 0
    # gibbs target
    mu1: float = 0.0
    mu2: float = 0.0
    omega1: float = 1.0
    omega2: float = 1.0
    rho: float = 0.0
    # rosenbrock target
    proposal_sd: float = DEFAULT_ROSENBROCK_PROPOSAL_SD
    init_spread: float = DEFAULT_ROSENBROCK_INIT_SPREAD
    # external target
    chains_file: str = ""

    def __post_init__(self):
        if self.target not in VALID_TARGETS:
            raise ConfigError(f"target must be one of {VALID_TARGETS}, got {self.target!r}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.replication_offset < 0:
            raise ConfigError(f"replication_offset must be >= 0, got {self.replication_offset}")
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if any(not isinstance(n, int) or n < 4 for n in self.n_grid):
            raise ConfigError(f"every n in n_grid must be an integer >= 4, got {self.n_grid}")
        if any(hi <= lo for lo, hi in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing, got {self.n_grid}")
        if not self.estimators:
            raise ConfigError("estimators must not be empty")
        for name in self.estimators:
            if name not in VALID_ESTIMATORS:
                raise ConfigError(
                    f"unknown estimator {name!r}; valid: {VALID_ESTIMATORS}"
                )
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError(f"estimators listed twice: {self.estimators}")
        if self.batch_mode not in VALID_BATCH_MODES:
            raise ConfigError(
                f"batch_mode must be one of {VALID_BATCH_MODES}, got {self.batch_mode!r}"
            )
        if self.batch_multiplier <= 0:
            raise ConfigError(f"batch_multiplier must be positive, got {self.batch_multiplier}")
        if self.r < 1:
            raise ConfigError(f"lugsail r must be >= 1, got {self.r}")
        if not 0.0 <= self.c < 1.0:
            raise ConfigError(f"lugsail c must be in [0, 1), got {self.c}")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must be inside (0, 1), got {self.level}")
        if "true" in self.estimators and self.target != "gibbs":
            raise ConfigError(
                "the 'true' oracle covariance is only available for the gibbs target"
            )
        if "bm" in self.estimators and self.m != 1:
            raise ConfigError("estimator 'bm' is single-chain; use abm/rbm for m > 1")
        if self.target == "gibbs":
            try:
                self.gibbs_params()
            except Exception as err:
                raise ConfigError(f"invalid gibbs parameters: {err}") from None
        if self.target == "rosenbrock" and self.proposal_sd <= 0:
            raise ConfigError(f"proposal_sd must be positive, got {self.proposal_sd}")
        if self.target == "external" and not self.chains_file:
            raise ConfigError("an external target needs a chains_file path")

    def gibbs_params(self) -> GibbsParams:
        return GibbsParams(
            mu1=self.mu1, mu2=self.mu2, omega1=self.omega1, omega2=self.omega2, rho=self.rho
        )


_INT_KEYS = {"m", "replications", "base_seed", "r", "replication_offset"}
_LIST_KEYS = {"n_grid", "estimators"}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build and validate a config from a flat key-value mapping."""
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    missing = [k for k in ("target", "m", "n_grid", "replications", "estimators", "base_seed") if k not in raw]
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    kwargs = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
        if key in _LIST_KEYS:
            if not isinstance(value, list):
                raise ConfigError(f"config key {key!r} must be a list, got {value!r}")
            value = tuple(value)
        kwargs[key] = value
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    """Load an experiment config from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object of key-value pairs")
    return config_from_dict(raw)
