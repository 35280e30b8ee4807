"""Resolvent diagonal, normalized trace, eigenvalues and the counting law.

The resolvent of a sample is G(z) = (H - z I)^{-1}.  The banded route
factors the shifted matrix as L D L^T and reads the inverse diagonal off the
factors in O(N w^2); a dense eigendecomposition provides the independent
oracle and the spectral route for counting-function experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .banded import PivotBreakdown, band_inverse_diagonal, ldlt_banded
from .ensemble import BandMatrixSample
from .theory import semicircle_cdf

DENSE_EIG_CAP = 4096

_MIN_IMAG_SHIFT = 1e-12
_PIVOT_FLOOR_FACTOR = 1e-8


class DenseCapExceeded(RuntimeError):
    def __init__(self, N, cap):
        super().__init__(
            f"dense eigensolve refused: N = {N} exceeds the configured cap {cap}"
        )
        self.N = N
        self.cap = cap


@dataclass(frozen=True)
class ShiftedBandFactorization:
    """Unit lower banded factor and complex pivots of H - z I.

    ``fallback_dense`` marks the rare pivot-monitor path where the factors
    are abandoned and the diagonal is computed by a dense solve instead.
    """

    z: complex
    lb: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    min_pivot: float
    sample: BandMatrixSample = field(repr=False)
    fallback_dense: bool = False

    @property
    def N(self) -> int:
        return self.d.shape[0] if not self.fallback_dense else self.sample.N

    @property
    def bandwidth(self) -> int:
        return self.lb.shape[0] - 1 if not self.fallback_dense else self.sample.bandwidth


@dataclass(frozen=True)
class SpectralSample:
    """Sorted eigenvalues of one realization."""

    eigenvalues: np.ndarray = field(repr=False)
    config: object
    replica_index: int

    def __post_init__(self):
        lam = self.eigenvalues
        if np.any(np.diff(lam) < 0):
            raise ValueError("eigenvalues must be sorted nondecreasingly")

    @property
    def N(self) -> int:
        return self.eigenvalues.shape[0]


def shifted_band(sample: BandMatrixSample, z: complex) -> np.ndarray:
    ab = sample.band.astype(complex)
    ab[0] -= z
    return ab


def factorize(sample: BandMatrixSample, z: complex) -> ShiftedBandFactorization:
    """Pivot-free complex-symmetric banded LDL^T of H - z I.

    Every leading principal submatrix of H - z I has imaginary part
    -Im z times the identity, so |pivot| >= |Im z| and the factorization
    cannot break down; a monitor at 1e-8 |Im z| enforces the claim and falls
    back to a dense solve if it ever fires.
    """
    z = complex(z)
    if abs(z.imag) < _MIN_IMAG_SHIFT:
        raise ValueError(f"|Im z| < {_MIN_IMAG_SHIFT}: shift too close to the real axis")
    ab = shifted_band(sample, z)
    try:
        lb, d, min_pivot = ldlt_banded(ab, pivot_floor=_PIVOT_FLOOR_FACTOR * abs(z.imag))
    except PivotBreakdown as exc:
        return ShiftedBandFactorization(
            z=z, lb=np.empty((0, 0)), d=np.empty(0), min_pivot=exc.magnitude,
            sample=sample, fallback_dense=True,
        )
    return ShiftedBandFactorization(
        z=z, lb=lb, d=d, min_pivot=min_pivot, sample=sample,
    )


def resolvent_diagonal(fact: ShiftedBandFactorization) -> np.ndarray:
    """All diagonal entries G(x, x; z) from the banded factors."""
    if fact.fallback_dense:
        A = fact.sample.to_dense().astype(complex)
        np.fill_diagonal(A, A.diagonal() - fact.z)
        return np.diagonal(np.linalg.inv(A)).copy()
    return band_inverse_diagonal(fact.lb, fact.d)


def normalized_trace(fact: ShiftedBandFactorization) -> complex:
    """f(z) = (1/N) Tr (H - z I)^{-1}."""
    return complex(np.mean(resolvent_diagonal(fact)))


def trace_from_eigenvalues(eigs: np.ndarray, z: complex) -> complex:
    return complex(np.mean(1.0 / (eigs - z)))


def eigenvalues_dense(sample: BandMatrixSample, cap: int = DENSE_EIG_CAP) -> SpectralSample:
    """All eigenvalues via symmetric reduction (band-aware when the stored
    bandwidth is narrow) and a standard tridiagonal eigensolver."""
    N = sample.N
    if N > cap:
        raise DenseCapExceeded(N, cap)
    w = sample.bandwidth
    if w < N // 4:
        lam = scipy.linalg.eig_banded(
            sample.band, lower=True, eigvals_only=True, check_finite=False
        )
    else:
        lam = np.linalg.eigvalsh(sample.to_dense())
    lam = np.sort(lam)
    return SpectralSample(eigenvalues=lam, config=sample.config,
                          replica_index=sample.replica_index)


def counting_function_distance(eigs: SpectralSample, v: float) -> float:
    """Kolmogorov-Smirnov distance between the empirical counting function
    and the semicircle law, evaluated at the eigenvalue locations."""
    lam = eigs.eigenvalues
    N = lam.shape[0]
    F = semicircle_cdf(lam, v)
    upper = np.arange(1, N + 1) / N
    lower = np.arange(0, N) / N
    return float(np.max(np.maximum(np.abs(upper - F), np.abs(F - lower))))


def boundary_set(n: int, b: float, L: int) -> range:
    """Bulk index set {x : |x| <= n - b L} in centered coordinates."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    edge = n - b * L
    if edge < 0:
        raise ValueError(f"empty bulk set: b*L = {b * L:.6g} exceeds n = {n}")
    m = int(math.floor(edge + 1e-12))
    return range(-m, m + 1)


def boundary_slice(n: int, b: float, L: int) -> slice:
    """Array-index slice corresponding to boundary_set."""
    r = boundary_set(n, b, L)
    return slice(r.start + n, r.stop + n)
