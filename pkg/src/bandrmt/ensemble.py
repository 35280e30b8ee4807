"""Seeded sampling of the Gaussian band ensemble and the GOE reference.

Entries H(x, y) = a(x, y) sqrt(U(x, y)) with jointly independent centered
Gaussians a of variance v (1 + delta_xy) and the banded variance matrix
U(x, y) = u((x - y)/b) / b.  Indices run over x in {-n, ..., n}, N = 2n + 1;
internally arrays are 0-based with array index x + n.

Reproducibility: each diagonal d of each replica is drawn from its own
Philox stream keyed by (base_seed, replica_index) with the counter block
d << 128, so a stored entry is a pure function of (base_seed, replica_index,
x, y) and never depends on thread scheduling or evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .profiles import Profile, eval_profile


@dataclass(frozen=True)
class EnsembleConfig:
    """Band ensemble parameters; N = 2n + 1, real band width 1 <= b <= N."""

    n: int
    b: float
    v: float
    profile: Profile
    base_seed: int
    truncation: float = 1e-12

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.b > self.N:
            raise ValueError("b exceeds N")
        if self.b < 1.0:
            raise ValueError("b must be at least 1")
        if self.v < 0:
            raise ValueError("variance scale must be nonnegative")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must fit in 64 bits")
        if not 0.0 < self.truncation < 1.0:
            raise ValueError("truncation threshold must lie in (0, 1)")

    @property
    def N(self) -> int:
        return 2 * self.n + 1

    @property
    def chi(self) -> float:
        """Exponent chi with b = n^chi; the expansion regime is chi in (1/3, 1)."""
        return math.log(self.b) / math.log(self.n) if self.n > 1 else math.inf

    @property
    def in_recommended_regime(self) -> bool:
        return 1.0 / 3.0 < self.chi < 1.0

    @property
    def stored_bandwidth(self) -> int:
        return stored_bandwidth(self)


@dataclass(frozen=True)
class GOEConfig:
    """Full symmetric ensemble A(x, y) = a(x, y)/sqrt(N); indices 1..N."""

    N: int
    v: float
    base_seed: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.v < 0:
            raise ValueError("variance scale must be nonnegative")

    @property
    def stored_bandwidth(self) -> int:
        return self.N - 1


AnyConfig = Union[EnsembleConfig, GOEConfig]


def stored_bandwidth(config: EnsembleConfig) -> int:
    """Smallest k with u(k/b) <= truncation * sup u, capped at N - 1.

    For the box profile this reproduces ceil(b/2); for unbounded-support
    profiles entries beyond the cutoff have standard deviation below
    sqrt(truncation) of the retained scale and are stored as exact zeros.
    """
    prof, b, N = config.profile, config.b, config.N
    thresh = config.truncation * prof.peak
    if eval_profile(prof, (N - 1) / b) > thresh:
        return N - 1
    lo, hi = 0, N - 1  # u(lo/b) > thresh >= u(hi/b); u nonincreasing
    if eval_profile(prof, 0.0) <= thresh:
        return 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if eval_profile(prof, mid / b) <= thresh:
            hi = mid
        else:
            lo = mid
    return hi


def variance_entry(x: int, y: int, config: EnsembleConfig) -> float:
    """Variance profile U(x, y) = u((x - y)/b) / b, symmetric in (x, y)."""
    if abs(x) > config.n or abs(y) > config.n:
        raise ValueError("indices must lie in {-n, ..., n}")
    return eval_profile(config.profile, (x - y) / config.b) / config.b


@dataclass(frozen=True)
class BandMatrixSample:
    """One realization in symmetric banded storage.

    ``band[d, j] = H[j + d, j]`` for subdiagonal offsets d = 0..w and 0-based
    array columns j (entries with j + d >= N are zero padding).  Entries
    outside the stored band are exactly zero.
    """

    config: AnyConfig
    replica_index: int
    band: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.band.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.band.shape[0] - 1

    def to_dense(self) -> np.ndarray:
        N = self.N
        H = np.zeros((N, N))
        for d in range(self.bandwidth + 1):
            vals = self.band[d, : N - d]
            idx = np.arange(N - d)
            H[idx + d, idx] = vals
            if d:
                H[idx, idx + d] = vals
        return H

    def entry(self, x: int, y: int) -> float:
        """H(x, y) in the ensemble's native index labels."""
        i, j = self._to_array_index(x), self._to_array_index(y)
        d = abs(i - j)
        if d > self.bandwidth:
            return 0.0
        return float(self.band[d, min(i, j)])

    def _to_array_index(self, x: int) -> int:
        if isinstance(self.config, EnsembleConfig):
            return x + self.config.n
        return x - 1

    def frobenius_sq(self) -> float:
        """sum_{x,y} H(x,y)^2 from the banded storage."""
        total = float(np.sum(self.band[0] ** 2))
        if self.bandwidth:
            total += 2.0 * float(np.sum(self.band[1:] ** 2))
        return total

    def row_sum_norm(self) -> float:
        """Max row sum of |H| (an eigenvalue bound)."""
        N = self.N
        acc = np.zeros(N)
        for d in range(self.bandwidth + 1):
            a = np.abs(self.band[d, : N - d])
            acc[: N - d] += a
            if d:
                acc[d:] += a
        return float(acc.max())

    def dump_triplets(self, stream) -> None:
        """Debug dump: `x y value` per line, lower triangle only."""
        off = -self.config.n if isinstance(self.config, EnsembleConfig) else 1
        N = self.N
        for d in range(self.bandwidth + 1):
            for j in range(N - d):
                stream.write(f"{j + d + off} {j + off} {float(self.band[d, j])!r}\n")


def _diagonal_generator(base_seed: int, replica_index: int, d: int) -> np.random.Generator:
    key = int(base_seed) + (int(replica_index) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(d) << 128))


def _sample_banded(config: AnyConfig, replica_index: int, sigma_of_d) -> BandMatrixSample:
    if isinstance(config, EnsembleConfig):
        N, w = config.N, stored_bandwidth(config)
    else:
        N, w = config.N, config.N - 1
    band = np.zeros((w + 1, N))
    for d in range(w + 1):
        sd = sigma_of_d(d)
        if sd == 0.0:
            continue
        g = _diagonal_generator(config.base_seed, replica_index, d)
        band[d, : N - d] = sd * g.standard_normal(N - d)
    return BandMatrixSample(config=config, replica_index=replica_index, band=band)


def sample(config: EnsembleConfig, replica_index: int) -> BandMatrixSample:
    """Draw one replica of the band ensemble, bit-reproducible from
    (base_seed, replica_index)."""

    prof, b, v = config.profile, config.b, config.v

    def sigma(d: int) -> float:
        u = eval_profile(prof, d / b)
        return math.sqrt(v * (2.0 if d == 0 else 1.0) * u / b)

    return _sample_banded(config, replica_index, sigma)


def sample_goe(N: int, v: float, base_seed: int, replica_index: int) -> BandMatrixSample:
    """Draw one GOE replica A(x, y) = a(x, y)/sqrt(N) as a full-bandwidth
    banded sample."""
    config = GOEConfig(N=N, v=v, base_seed=base_seed)

    def sigma(d: int) -> float:
        return math.sqrt(v * (2.0 if d == 0 else 1.0) / N)

    return _sample_banded(config, replica_index, sigma)


def sample_any(config: AnyConfig, replica_index: int) -> BandMatrixSample:
    if isinstance(config, EnsembleConfig):
        return sample(config, replica_index)
    return sample_goe(config.N, config.v, config.base_seed, replica_index)
