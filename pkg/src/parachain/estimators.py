"""Estimators of the long-run covariance matrix of Monte Carlo averages.

Given m parallel chains of length n, the estimators are:

* ``bm``    batch means on one chain: (b/(a-1)) sum_l (Ybar_l - mu_k)(...)^T
  over the a = floor(n/b) nonoverlapping batch means Ybar_l, centered at
  that chain's mean mu_k.
* ``abm``   averaged batch means: the mean over chains of per-chain
  (lugsail) batch means estimates.
* ``rbm``   replicated batch means: pools all a*m batch means and centers
  them at the global mean, (b/(am-1)) sum_{k,l} (Ybar_kl - mu)(...)^T,
  which picks up between-chain separation that abm cannot see.
* ``naive`` n/(m-1) times the scatter of the m chain means around the
  global mean; it needs no batching but is not consistent for fixed m.

Lugsail versions recombine two batch sizes, (1/(1-c)) S_b - (c/(1-c))
S_{floor(b/r)}, flipping the sign of the leading small-b bias so slow
mixing is less likely to produce underestimates. Lugsail combinations may
be indefinite; that is deliberately NOT repaired here and only surfaces
as NotPositiveDefinite when a consumer needs a determinant or inverse.

When b does not divide n, the first a*b iterations are kept and the tail
is discarded (everywhere except ``naive``, which has no batching).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadLugsailParams, DomainError, TooFewBatches, TooFewChains
from .numerics import ChainSet, as_chain_matrix, as_chain_set

VALID_METHODS = ("bm", "abm", "rbm", "naive")


@dataclass(frozen=True)
class BatchSpec:
    """Batch size plus lugsail parameters (r, c).

    r = 1 or c = 0 means no lugsail correction; otherwise the companion
    batch size floor(b/r) must stay at least 1.
    """

    b: int
    r: int = 1
    c: float = 0.0

    def __post_init__(self):
        if self.b < 1:
            raise DomainError(f"batch size must be >= 1, got {self.b}")
        if self.r < 1:
            raise BadLugsailParams(f"lugsail ratio r must be >= 1, got {self.r}")
        if not 0.0 <= self.c < 1.0:
            raise BadLugsailParams(f"lugsail weight c must be in [0, 1), got {self.c}")
        if self.r > 1 and self.b // self.r < 1:
            raise BadLugsailParams(
                f"floor(b/r) = floor({self.b}/{self.r}) < 1; lugsail needs a sub-batch"
            )

    @property
    def sub_batch(self) -> int:
        return self.b // self.r

    @property
    def plain(self) -> bool:
        return self.r == 1 or self.c == 0.0


@dataclass(frozen=True)
class CovarianceEstimate:
    """A p x p covariance estimate with its provenance.

    matrix is symmetric (to 1e-12 relative); method is one of
    VALID_METHODS; (r, c) are the lugsail parameters used (1, 0 for
    plain estimates); b is the batch size (0 for naive); (n, m) is the
    sample geometry the estimate came from.
    """

    matrix: np.ndarray
    method: str
    r: int
    c: float
    b: int
    n: int
    m: int

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        """Stable-key-order payload for the JSON output format."""
        return {
            "method": self.method,
            "b": self.b,
            "r": self.r,
            "c": self.c,
            "m": self.m,
            "n": self.n,
            "p": self.p,
            "matrix": [float(v) for v in self.matrix.reshape(-1)],
        }


def _symmetrize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


# ---------------------------------------------------------------------------
# batching
# ---------------------------------------------------------------------------

def batch_means(chain, b: int) -> np.ndarray:
    """Means of the a = floor(n/b) nonoverlapping size-b batches, as (a, p).

    Batch l covers rows (l-1)b .. lb-1 of the first a*b rows; trailing
    rows beyond a*b are discarded.
    """
    arr = as_chain_matrix(chain, validate=False)
    if b < 1:
        raise DomainError(f"batch size must be >= 1, got {b}")
    n, p = arr.shape
    a = n // b
    if a < 2:
        raise TooFewBatches(f"batch size {b} leaves {a} batch(es) of n={n}; need >= 2")
    return arr[: a * b].reshape(a, b, p).mean(axis=1)


def default_batch_size(n: int, mode: str = "sqrt", multiplier: float = 1.0) -> int:
    """Plug-in batch size: floor(sqrt(n)), or multiplier * floor(cbrt(n)).

    The result is clamped so at least two batches remain. The multiplier
    stands in for data-driven tuning of the cube-root rule and is
    recorded by the experiment harness alongside results.
    """
    if n < 4:
        raise DomainError(f"need n >= 4 to form two batches, got n={n}")
    if multiplier <= 0:
        raise DomainError(f"multiplier must be positive, got {multiplier}")
    if mode == "sqrt":
        b = math.isqrt(n)
    elif mode == "cube_root":
        k = round(n ** (1.0 / 3.0))
        while (k + 1) ** 3 <= n:
            k += 1
        while k**3 > n:
            k -= 1
        b = max(1, math.floor(multiplier * k))
    else:
        raise DomainError(f"unknown batch mode {mode!r}; use 'sqrt' or 'cube_root'")
    b = min(b, n // 2)
    if n // b < 2:
        raise DomainError(f"batch size {b} leaves fewer than two batches of n={n}")
    return b


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def bm(chain, b: int) -> CovarianceEstimate:
    """Single-chain batch means estimate with batch size b."""
    arr = as_chain_matrix(chain, validate=False)
    means = batch_means(arr, b)
    a = means.shape[0]
    center = arr[: a * b].mean(axis=0)
    dev = means - center
    mat = _symmetrize(b / (a - 1) * (dev.T @ dev))
    return CovarianceEstimate(
        matrix=mat, method="bm", r=1, c=0.0, b=b, n=arr.shape[0], m=1
    )


def lugsail_combine(
    est_b: CovarianceEstimate, est_br: CovarianceEstimate, r: int, c: float
) -> CovarianceEstimate:
    """Combine base and sub-batch estimates: (1/(1-c)) S_b - (c/(1-c)) S_br.

    r = 1 or c = 0 returns the base estimate unchanged (metadata aside).
    The result may be indefinite; that is not an error here.
    """
    if r < 1:
        raise BadLugsailParams(f"lugsail ratio r must be >= 1, got {r}")
    if not 0.0 <= c < 1.0:
        raise BadLugsailParams(f"lugsail weight c must be in [0, 1), got {c}")
    if r == 1 or c == 0.0:
        return replace(est_b, r=int(r), c=float(c))
    if (est_b.method, est_b.n, est_b.m) != (est_br.method, est_br.n, est_br.m):
        raise BadLugsailParams(
            "lugsail parts must come from the same method on the same data"
        )
    if est_br.b != est_b.b // r:
        raise BadLugsailParams(
            f"sub-batch size {est_br.b} is not floor({est_b.b}/{r})"
        )
    mat = est_b.matrix / (1.0 - c) - est_br.matrix * (c / (1.0 - c))
    return CovarianceEstimate(
        matrix=mat,
        method=est_b.method,
        r=int(r),
        c=float(c),
        b=est_b.b,
        n=est_b.n,
        m=est_b.m,
    )


def _lugsail_of(plain_fn, spec: BatchSpec) -> CovarianceEstimate:
    base = plain_fn(spec.b)
    if spec.plain:
        return replace(base, r=spec.r, c=spec.c)
    return lugsail_combine(base, plain_fn(spec.sub_batch), spec.r, spec.c)


def lugsail_bm(chain, spec: BatchSpec) -> CovarianceEstimate:
    """Single-chain lugsail batch means estimate."""
    return _lugsail_of(lambda b: bm(chain, b), spec)


def abm(chains, spec: BatchSpec) -> CovarianceEstimate:
    """Averaged batch means: mean of per-chain lugsail estimates."""
    cs = as_chain_set(chains)
    total = np.zeros((cs.p, cs.p))
    for chain in cs:
        total = total + lugsail_bm(chain, spec).matrix
    return CovarianceEstimate(
        matrix=total / cs.m,
        method="abm",
        r=spec.r,
        c=spec.c,
        b=spec.b,
        n=cs.n,
        m=cs.m,
    )


def _rbm_plain(cs: ChainSet, b: int) -> CovarianceEstimate:
    per_chain = [batch_means(chain, b) for chain in cs]
    a = per_chain[0].shape[0]
    pooled = np.concatenate(per_chain, axis=0)
    # Center at the mean of the retained a*b rows of every chain, so the
    # exact decomposition into abm plus the between-chain term holds.
    retained = np.concatenate([chain[: a * b] for chain in cs], axis=0)
    center = retained.mean(axis=0)
    dev = pooled - center
    mat = _symmetrize(b / (a * cs.m - 1) * (dev.T @ dev))
    return CovarianceEstimate(
        matrix=mat, method="rbm", r=1, c=0.0, b=b, n=cs.n, m=cs.m
    )


def rbm(chains, spec: BatchSpec) -> CovarianceEstimate:
    """Replicated batch means: pooled batch means centered at the global mean."""
    cs = as_chain_set(chains)
    est = _lugsail_of(lambda b: _rbm_plain(cs, b), spec)
    if cs.m == 1:
        # Single chain: identical to lugsail_bm by construction; keep the
        # method tag honest anyway.
        return replace(est, method="rbm")
    return est


def naive(chains) -> CovarianceEstimate:
    """Between-chain-mean scatter scaled by n/(m-1); no batching, full n."""
    cs = as_chain_set(chains)
    if cs.m < 2:
        raise TooFewChains(f"naive estimator needs m >= 2 chains, got {cs.m}")
    chain_means = cs.values.mean(axis=1)
    dev = chain_means - chain_means.mean(axis=0)
    mat = _symmetrize(cs.n / (cs.m - 1) * (dev.T @ dev))
    return CovarianceEstimate(
        matrix=mat, method="naive", r=1, c=0.0, b=0, n=cs.n, m=cs.m
    )


def autocovariance(chain, s: int) -> np.ndarray:
    """Lag-s sample autocovariance (1/n) sum_t (Y_t - Ybar)(Y_{t+s} - Ybar)^T.

    Divisor n (not n - s), the usual time-series convention; not symmetric
    for s > 0.
    """
    arr = as_chain_matrix(chain, validate=False)
    n = arr.shape[0]
    if not 0 <= s < n:
        raise DomainError(f"lag must satisfy 0 <= s < n={n}, got {s}")
    dev = arr - arr.mean(axis=0)
    if s == 0:
        return dev.T @ dev / n
    return dev[: n - s].T @ dev[s:] / n
