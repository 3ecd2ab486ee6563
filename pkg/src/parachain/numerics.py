"""Numeric substrate: chain containers, small dense matrix helpers,
sample moments, chi-square quantiles, and the reproducible RNG contract.

Everything here is a pure function of its inputs; random state is passed
explicitly as :class:`RngState` values, never hidden in module globals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import chi2

from .errors import (
    DegenerateInput,
    DomainError,
    NotPositiveDefinite,
    UnequalChainLengths,
)

_MASK64 = (1 << 64) - 1

# Scale-aware pivot floor: a Cholesky pivot at or below
# PD_REL_TOL * trace(m) / p marks the matrix as not positive definite.
PD_REL_TOL = 1e-12

# Entrywise relative tolerance for the symmetry check.
SYM_REL_TOL = 1e-12


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def _splitmix64(z: int) -> int:
    """One application of the splitmix64 finalizer."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Collapse integers into one well-mixed 64-bit stream id.

    Each part is folded into a running hash through the splitmix64
    finalizer, so tuples like (base seed, replication, chain) map to
    distinct streams and the mapping is independent of evaluation order
    across workers.
    """
    h = 0
    for part in parts:
        h = _splitmix64((h ^ (int(part) & _MASK64)) & _MASK64)
    return h


@dataclass(frozen=True)
class RngState:
    """A (seed, stream) pair selecting one reproducible random stream.

    The stream is the Philox4x64-10 counter-based generator keyed with
    the two 64-bit words (seed, stream); normal variates come from
    numpy's ziggurat implementation on top of it. Equal (seed, stream)
    therefore replays the identical draw sequence on every platform.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


def standard_normal(state: RngState, size=None):
    """First draws of the standard-normal stream selected by ``state``."""
    return state.generator().standard_normal(size)


# ---------------------------------------------------------------------------
# chain containers
# ---------------------------------------------------------------------------

def as_chain_matrix(values, validate: bool = True) -> np.ndarray:
    """Coerce one chain's output to an (n, p) float array.

    A one-dimensional input is treated as a univariate chain. Rows are
    iteration-ordered; entries must be finite.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError(f"chain must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"chain must be non-empty, got shape {arr.shape}")
    if validate and not np.isfinite(arr).all():
        raise DomainError("chain contains non-finite entries")
    return arr


class ChainSet:
    """m equal-length chains of one target, held as an (m, n, p) array."""

    __slots__ = ("values",)

    def __init__(self, chains, validate: bool = True):
        if isinstance(chains, np.ndarray) and chains.ndim == 3:
            values = np.asarray(chains, dtype=float)
            if validate and not np.isfinite(values).all():
                raise DomainError("chains contain non-finite entries")
        else:
            arrs = [as_chain_matrix(c, validate=validate) for c in chains]
            if not arrs:
                raise DomainError("a ChainSet needs at least one chain")
            shapes = {a.shape for a in arrs}
            if len(shapes) != 1:
                raise UnequalChainLengths(
                    f"chains must share one (n, p) shape, got {sorted(shapes)}"
                )
            values = np.stack(arrs)
        if values.shape[1] < 1 or values.shape[2] < 1:
            raise DomainError(f"chains must be non-empty, got shape {values.shape}")
        self.values = values

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.values.shape[2]

    def chain(self, k: int) -> np.ndarray:
        return self.values[k]

    def __len__(self) -> int:
        return self.m

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.values)

    def prefix(self, n: int) -> "ChainSet":
        """The first ``n`` iterations of every chain (a shared-memory view)."""
        if not 1 <= n <= self.n:
            raise DomainError(f"prefix length {n} outside [1, {self.n}]")
        return ChainSet(self.values[:, :n], validate=False)

    def __repr__(self) -> str:
        return f"ChainSet(m={self.m}, n={self.n}, p={self.p})"


def as_chain_set(chains) -> ChainSet:
    if isinstance(chains, ChainSet):
        return chains
    return ChainSet(chains)


# ---------------------------------------------------------------------------
# matrix helpers
# ---------------------------------------------------------------------------

def check_symmetric(m) -> np.ndarray:
    """Validate that ``m`` is a square symmetric float matrix and return it.

    Entries may differ by at most SYM_REL_TOL * (1 + |entry|) across the
    diagonal.
    """
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {arr.shape}")
    if not (np.abs(arr - arr.T) <= SYM_REL_TOL * (1.0 + np.abs(arr))).all():
        raise DomainError("matrix is not symmetric")
    return arr


def cholesky(m) -> np.ndarray:
    """Lower-triangular L with L L^T = m for symmetric positive definite m.

    Raises NotPositiveDefinite as soon as a pivot falls at or below
    PD_REL_TOL * trace(m) / p, which is how indefinite lugsail estimates
    surface to consumers that need a determinant or inverse.
    """
    arr = check_symmetric(m)
    p = arr.shape[0]
    tol = PD_REL_TOL * np.trace(arr) / p
    lower = np.zeros_like(arr)
    for j in range(p):
        pivot = arr[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at index {j} is at or below tolerance {tol:.3e}"
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < p:
            lower[j + 1 :, j] = (arr[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def quad_form_inv(m, v) -> float:
    """v^T m^{-1} v for symmetric positive definite m, via triangular solves.

    With m = L L^T and L y = v, the value is |y|^2 = v^T L^{-T} L^{-1} v,
    which is nonnegative by construction.
    """
    lower = cholesky(m)
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.shape[0] != lower.shape[0]:
        raise DomainError(
            f"vector length {vec.shape[0]} does not match matrix order {lower.shape[0]}"
        )
    y = solve_triangular(lower, vec, lower=True)
    return float(y @ y)


def frobenius_norm(m) -> float:
    """Entrywise l2 norm of a matrix."""
    arr = np.asarray(m, dtype=float)
    return float(np.sqrt((arr * arr).sum()))


def log_det_spd(m) -> float:
    """log det of a symmetric positive definite matrix via its Cholesky factor."""
    lower = cholesky(m)
    return float(2.0 * np.log(np.diag(lower)).sum())


def det_spd(m) -> float:
    """Determinant of a symmetric positive definite matrix via Cholesky."""
    lower = cholesky(m)
    return float(np.prod(np.diag(lower)) ** 2)


# ---------------------------------------------------------------------------
# sample moments
# ---------------------------------------------------------------------------

def sample_mean(chain) -> np.ndarray:
    """Componentwise mean over the rows of one chain."""
    arr = as_chain_matrix(chain, validate=False)
    return arr.mean(axis=0)


def sample_covariance(chain) -> np.ndarray:
    """Sample covariance of the rows (divisor n - 1)."""
    arr = as_chain_matrix(chain, validate=False)
    n = arr.shape[0]
    if n < 2:
        raise DegenerateInput(f"sample covariance needs n >= 2 rows, got {n}")
    dev = arr - arr.mean(axis=0)
    cov = dev.T @ dev / (n - 1)
    return 0.5 * (cov + cov.T)


def chisq_quantile(p: int, level: float) -> float:
    """Chi-square quantile with ``p`` degrees of freedom.

    Evaluated as the inverse regularized incomplete gamma function
    (scipy.stats.chi2.ppf), accurate well past 1e-6 absolute.
    """
    if p < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {p}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be inside (0, 1), got {level}")
    return float(chi2.ppf(level, df=p))
