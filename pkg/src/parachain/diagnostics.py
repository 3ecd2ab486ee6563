"""Decision-grade diagnostics built on a covariance estimate.

Multivariate effective sample size, chi-square confidence regions for
the combined mean, and the ESS-threshold stopping rule. Indefinite
lugsail estimates reaching these consumers raise NotPositiveDefinite;
they are never silently repaired, since masking them would hide exactly
the underestimation pathology these tools exist to expose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError, NotPositiveDefinite
from .estimators import CovarianceEstimate
from .numerics import (
    as_chain_set,
    chisq_quantile,
    det_spd,
    quad_form_inv,
    sample_covariance,
)


@dataclass(frozen=True)
class EssReport:
    """Effective sample size and the determinants behind it."""

    ess: float
    per_sample: float
    lambda_det: float
    sigma_det: float
    method: str


@dataclass(frozen=True)
class RegionTest:
    """Outcome of one confidence-region membership test."""

    level: float
    statistic: float
    threshold: float
    contains: bool


def average_sample_covariance(chains, centering: str = "per_chain") -> np.ndarray:
    """Estimate of the target covariance from the pooled chains.

    "per_chain" (default) averages the m per-chain sample covariances,
    each centered at its own chain mean. "global" centers every row at
    the grand mean with divisor m*n - 1; the two differ when chains have
    not yet met, which makes the choice worth a sensitivity check.
    """
    cs = as_chain_set(chains)
    if centering == "per_chain":
        total = np.zeros((cs.p, cs.p))
        for chain in cs:
            total = total + sample_covariance(chain)
        return total / cs.m
    if centering == "global":
        stacked = cs.values.reshape(cs.m * cs.n, cs.p)
        return sample_covariance(stacked)
    raise DomainError(f"unknown centering {centering!r}; use 'per_chain' or 'global'")


def ess(chains, sigma_hat: CovarianceEstimate, centering: str = "per_chain") -> EssReport:
    """Multivariate effective sample size m*n*(det Lambda / det Sigma)^(1/p).

    Lambda is the average sample covariance of the chains (the iid-world
    variance) and Sigma the supplied long-run estimate; determinants are
    evaluated through Cholesky factors. An indefinite sigma_hat raises
    NotPositiveDefinite; a singular Lambda raises DegenerateInput.
    """
    cs = as_chain_set(chains)
    lam = average_sample_covariance(cs, centering=centering)
    try:
        lambda_det = det_spd(lam)
    except NotPositiveDefinite as err:
        raise DegenerateInput(
            "chain covariance is singular; ESS is undefined"
        ) from err
    sigma_det = det_spd(sigma_hat.matrix)
    ratio = lambda_det / sigma_det
    total = cs.m * cs.n
    value = total * ratio ** (1.0 / cs.p)
    return EssReport(
        ess=value,
        per_sample=value / total,
        lambda_det=lambda_det,
        sigma_det=sigma_det,
        method=sigma_hat.method,
    )


def confidence_region_test(
    mu_hat,
    sigma_hat: CovarianceEstimate,
    mu0,
    level: float,
    m: int,
    n: int,
    quantile=chisq_quantile,
) -> RegionTest:
    """Does the level-% ellipsoid around mu_hat contain mu0?

    The statistic is m*n*(mu_hat - mu0)^T Sigma^{-1} (mu_hat - mu0),
    compared against the chi-square quantile with p degrees of freedom
    (the large-sample calibration; pass another quantile function for
    sensitivity checks).
    """
    mu_hat = np.asarray(mu_hat, dtype=float).reshape(-1)
    mu0 = np.asarray(mu0, dtype=float).reshape(-1)
    if mu_hat.shape != mu0.shape:
        raise DomainError(
            f"mean vectors differ in length: {mu_hat.shape} vs {mu0.shape}"
        )
    statistic = m * n * quad_form_inv(sigma_hat.matrix, mu_hat - mu0)
    threshold = quantile(mu_hat.shape[0], level)
    return RegionTest(
        level=level,
        statistic=statistic,
        threshold=threshold,
        contains=statistic <= threshold,
    )


def termination_check(report: EssReport, threshold: float) -> bool:
    """Stop once the estimated ESS strictly exceeds the target count."""
    if threshold <= 0:
        raise DomainError(f"ESS threshold must be positive, got {threshold}")
    return report.ess > threshold
