"""Benchmark targets and samplers.

Two built-in targets with known ground truth drive the experiment
harness: a deterministic-scan Gibbs sampler for a bivariate Gaussian
(whose asymptotic covariance has a closed form, making it a rare exact
benchmark) and a random-walk Metropolis sampler for the banana-shaped
Rosenbrock density (whose mean is known but whose asymptotic covariance
is not).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError
from .numerics import RngState

# Isotropic proposal scale for the Rosenbrock target, fixed once by a
# pilot run so the dispersed-start chains accept about 25% of proposals.
DEFAULT_ROSENBROCK_PROPOSAL_SD = 0.35

# The density factorizes as x1 ~ N(1, 10) with x2 | x1 ~ N(x1^2, 1/10),
# so E[x2] = Var(x1) + (E x1)^2 = 10 + 1 = 11.
ROSENBROCK_TRUE_MEAN = np.array([1.0, 11.0])

# Default half-width of the x1 range for dispersed Rosenbrock starts.
DEFAULT_ROSENBROCK_INIT_SPREAD = 10.0


# ---------------------------------------------------------------------------
# bivariate Gaussian Gibbs sampler
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GibbsParams:
    """Target N((mu1, mu2), [[omega1, rho], [rho, omega2]]).

    Stationarity of the two-block scan needs rho^2 < omega1 * omega2.
    The chain mixes arbitrarily slowly as rho^2 / (omega1 * omega2)
    approaches 1.
    """

    mu1: float = 0.0
    mu2: float = 0.0
    omega1: float = 1.0
    omega2: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if self.omega1 <= 0 or self.omega2 <= 0:
            raise DomainError("omega1 and omega2 must be positive")
        if self.rho**2 >= self.omega1 * self.omega2:
            raise DomainError(
                f"need rho^2 < omega1*omega2; got rho={self.rho}, "
                f"omega1*omega2={self.omega1 * self.omega2}"
            )

    @property
    def ar_coefficient(self) -> float:
        """phi = rho^2 / (omega1 omega2): the lag-1 coefficient of each coordinate."""
        return self.rho**2 / (self.omega1 * self.omega2)


def gibbs_conditional_x1(params: GibbsParams, x2: float) -> tuple[float, float]:
    """(mean, variance) of the first coordinate given the second."""
    mean = params.mu1 + params.rho / params.omega2 * (x2 - params.mu2)
    var = params.omega1 - params.rho**2 / params.omega2
    return mean, var


def gibbs_conditional_x2(params: GibbsParams, x1: float) -> tuple[float, float]:
    """(mean, variance) of the second coordinate given the first."""
    mean = params.mu2 + params.rho / params.omega1 * (x1 - params.mu1)
    var = params.omega2 - params.rho**2 / params.omega1
    return mean, var


def gibbs_run(params: GibbsParams, n: int, init, rng: RngState) -> np.ndarray:
    """Run the deterministic-scan Gibbs sampler for n sweeps; returns (n, 2).

    Each sweep draws X1 from its conditional given the current X2, then
    X2 given the new X1, and records the pair after both updates. The
    stream consumes one (n, 2) block of standard normals, row t holding
    the X1 draw then the X2 draw of sweep t.

    Substituting the X2 update into the X1 update shows X1 follows an
    AR(1) recursion with coefficient phi = rho^2/(omega1 omega2) driven
    by a combination of consecutive conditional noises; the run is
    evaluated through that recursion (a linear filter), which keeps long
    slow-mixing chains cheap.
    """
    if n < 1:
        raise DomainError(f"need n >= 1 iterations, got {n}")
    init = np.asarray(init, dtype=float).reshape(-1)
    if init.shape != (2,):
        raise DomainError(f"init must have two coordinates, got shape {init.shape}")
    mu1, mu2, w1, w2, rho = (
        params.mu1,
        params.mu2,
        params.omega1,
        params.omega2,
        params.rho,
    )
    phi = params.ar_coefficient
    sd1 = np.sqrt(w1 - rho**2 / w2)
    sd2 = np.sqrt(w2 - rho**2 / w1)

    z = rng.generator().standard_normal((n, 2))
    eps1 = sd1 * z[:, 0]
    eps2 = sd2 * z[:, 1]

    # Innovations of the X1 recursion: the first sweep sees the initial
    # X2, later sweeps see the previous sweep's X2 noise.
    drive = np.empty(n)
    drive[0] = rho / w2 * (init[1] - mu2) + eps1[0]
    drive[1:] = rho / w2 * eps2[:-1] + eps1[1:]
    dev1 = lfilter([1.0], [1.0, -phi], drive)

    x1 = mu1 + dev1
    x2 = mu2 + rho / w1 * dev1 + eps2
    return np.column_stack([x1, x2])


def gibbs_true_sigma(params: GibbsParams) -> np.ndarray:
    """Closed-form asymptotic covariance of the sample mean of the scan.

    Diagonal entries omega_i (omega1 omega2 + rho^2) / (omega1 omega2 -
    rho^2); off-diagonal 2 omega1 omega2 rho / (omega1 omega2 - rho^2).
    """
    w1, w2, rho = params.omega1, params.omega2, params.rho
    den = w1 * w2 - rho**2
    off = 2.0 * w1 * w2 * rho / den
    return np.array(
        [
            [w1 * (w1 * w2 + rho**2) / den, off],
            [off, w2 * (w1 * w2 + rho**2) / den],
        ]
    )


def gibbs_true_gamma(params: GibbsParams) -> np.ndarray:
    """Closed-form lag-weighted autocovariance sum governing small-b bias.

    This is -sum_{s>=1} s [C_s + C_s^T] where C_s is the lag-s stationary
    cross-covariance matrix of the scan. With phi = rho^2/(omega1 omega2)
    the lag-s covariances are geometric (omega_i phi^s on the diagonal;
    rho phi^s and rho phi^{s-1} off it), and sum_s s phi^{s-1} =
    (1-phi)^{-2} collapses the series.
    """
    w1, w2, rho = params.omega1, params.omega2, params.rho
    phi = params.ar_coefficient
    den = (1.0 - phi) ** 2
    off = -rho * (1.0 + phi) / den
    return np.array(
        [
            [-2.0 * w1 * phi / den, off],
            [off, -2.0 * w2 * phi / den],
        ]
    )


def gibbs_start_points(params: GibbsParams, m: int, radius_factor: float = 10.0) -> np.ndarray:
    """m overdispersed starts, equally spaced on a circle around the mean.

    The radius is radius_factor times the larger marginal standard
    deviation, so every chain starts far out in the tails.
    """
    if m < 1:
        raise DomainError(f"need m >= 1 starting points, got {m}")
    radius = radius_factor * max(np.sqrt(params.omega1), np.sqrt(params.omega2))
    angles = 2.0 * np.pi * np.arange(m) / m
    return np.column_stack(
        [params.mu1 + radius * np.cos(angles), params.mu2 + radius * np.sin(angles)]
    )


# ---------------------------------------------------------------------------
# Rosenbrock target and random-walk Metropolis
# ---------------------------------------------------------------------------

def rosenbrock_logpdf(x) -> float:
    """Unnormalized log density -(x1-1)^2/20 - 5 (x2 - x1^2)^2."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(-((x[0] - 1.0) ** 2) / 20.0 - 5.0 * (x[1] - x[0] ** 2) ** 2)


def rosenbrock_start_points(m: int, spread: float = DEFAULT_ROSENBROCK_INIT_SPREAD) -> np.ndarray:
    """m starts on the density ridge: x1 equally spaced, x2 = x1^2.

    x1 runs over [1 - spread/2, 1 + spread/2]; a single chain starts at
    the center x1 = 1.
    """
    if m < 1:
        raise DomainError(f"need m >= 1 starting points, got {m}")
    if m == 1:
        x1 = np.array([1.0])
    else:
        x1 = np.linspace(1.0 - spread / 2.0, 1.0 + spread / 2.0, m)
    return np.column_stack([x1, x1**2])


@dataclass(frozen=True)
class RwmParams:
    """Random-walk Metropolis setup: target log density, isotropic
    Gaussian proposal scale, and the starting point."""

    log_density: Callable[[np.ndarray], float]
    proposal_sd: float
    init: Sequence[float] | np.ndarray

    def __post_init__(self):
        if self.proposal_sd <= 0:
            raise DomainError(f"proposal_sd must be positive, got {self.proposal_sd}")


class RwmResult(NamedTuple):
    chain: np.ndarray
    acceptance_rate: float


def rwm_run(params: RwmParams, n: int, rng: RngState) -> RwmResult:
    """Random-walk Metropolis for n iterations; records the state each step.

    Proposals are x + proposal_sd * z with z standard normal per
    coordinate; acceptance probability min(1, exp(logpi(x') - logpi(x))).
    The stream consumes an (n, p) block of proposal normals followed by
    n acceptance uniforms.
    """
    if n < 1:
        raise DomainError(f"need n >= 1 iterations, got {n}")
    x = np.asarray(params.init, dtype=float).reshape(-1).copy()
    logpdf = params.log_density
    lp = float(logpdf(x))
    if not np.isfinite(lp):
        raise DomainError(f"log density is not finite at the starting point {x}")

    gen = rng.generator()
    steps = params.proposal_sd * gen.standard_normal((n, x.shape[0]))
    uniforms = gen.random(n)

    out = np.empty((n, x.shape[0]))
    accepted = 0
    for t in range(n):
        proposal = x + steps[t]
        lp_new = float(logpdf(proposal))
        diff = lp_new - lp
        if diff >= 0.0 or uniforms[t] < np.exp(diff):
            x, lp = proposal, lp_new
            accepted += 1
        out[t] = x
    return RwmResult(chain=out, acceptance_rate=accepted / n)
