"""Study drivers binding sampling, resolvents and theory into reproducible
experiments.  Each driver is a pure function of its arguments (seeds
included) and returns plain result objects; the CLI serializes them, the
acceptance suite asserts on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleConfig, GOEConfig, sample, sample_goe
from .montecarlo import (
    EstimatorResult,
    PointwiseResult,
    ScalingFit,
    correlation_estimate,
    pointwise_diagonal_study,
    scaling_fit,
    trace_samples,
    variance_trace,
)
from .profiles import Profile, small_p_constants
from .resolvent import counting_function_distance, eigenvalues_dense
from .theory import (
    b_nu,
    boundary_w,
    q_integral,
    s_leading,
    sigma_asymptotic,
    sigma_smoothed,
    stieltjes_w,
)


@dataclass(frozen=True)
class SemicircleRow:
    label: str
    N: int
    b: float
    v: float
    ks_distance: float
    eigenvalues: np.ndarray = field(repr=False)


def semicircle_study(profiles: list[Profile], n: int, b: float, v: float,
                     seed: int, goe_n: int | None = None) -> list[SemicircleRow]:
    """Counting-function distance to the semicircle law, one sample per row."""
    rows = []
    for prof in profiles:
        cfg = EnsembleConfig(n=n, b=b, v=v, profile=prof, base_seed=seed)
        eigs = eigenvalues_dense(sample(cfg, 0))
        rows.append(SemicircleRow(
            label=f"band:{prof.kind}", N=cfg.N, b=b, v=v,
            ks_distance=counting_function_distance(eigs, v),
            eigenvalues=eigs.eigenvalues,
        ))
    if goe_n:
        eigs = eigenvalues_dense(sample_goe(goe_n, v, seed, 0))
        rows.append(SemicircleRow(
            label="goe", N=goe_n, b=float(goe_n), v=v,
            ks_distance=counting_function_distance(eigs, v),
            eigenvalues=eigs.eigenvalues,
        ))
    return rows


@dataclass(frozen=True)
class CorrelationStudy:
    z1: complex
    z2: complex
    estimate: EstimatorResult
    scaled_mean: complex        # N b * C_hat
    scaled_stderr: float
    s_value: complex
    abs_deviation: float
    tolerance: float            # 3 * scaled stderr + 20% * |S|
    within_tolerance: bool
    traces: np.ndarray = field(repr=False)


def correlation_study(config: EnsembleConfig, z1: complex, z2: complex,
                      replicas: int, *, threads: int = 1, method: str = "auto",
                      traces=None) -> CorrelationStudy:
    """Scaled trace covariance N b C(z1, z2) against the leading coefficient.

    Tolerance policy: three jackknife standard errors plus a 20% allowance
    for the uncontrolled subleading term at finite (n, b).  ``traces`` may
    supply a precomputed TraceSamples for the same config and pair.
    """
    tr = traces
    if tr is None:
        tr = trace_samples(config, [z1, z2], replicas, threads=threads, method=method)
    est = correlation_estimate(tr, 0, 1)
    scale = config.N * config.b
    s_val = s_leading(z1, z2, config.v, config.profile)
    scaled = scale * est.mean
    scaled_err = scale * est.stderr
    dev = abs(scaled - s_val)
    tol = 3.0 * scaled_err + 0.2 * abs(s_val)
    return CorrelationStudy(
        z1=z1, z2=z2, estimate=est, scaled_mean=scaled, scaled_stderr=scaled_err,
        s_value=s_val, abs_deviation=dev, tolerance=tol,
        within_tolerance=bool(dev <= tol), traces=tr.values,
    )


@dataclass(frozen=True)
class ScalingStudy:
    grid: tuple
    abscissas: tuple            # N*b per grid point
    correlations: tuple         # |C_hat|
    stderrs: tuple
    fit: ScalingFit


def scaling_study(grid, profile: Profile, v: float, z1: complex, z2: complex,
                  replicas: int, seed: int, *, threads: int = 1) -> ScalingStudy:
    """|C| against N b across a grid of (N, b); the expansion predicts a
    log-log slope of -1."""
    xs, ys, es = [], [], []
    for N, b in grid:
        if N % 2 == 0:
            raise ValueError("grid sizes must be odd (N = 2n + 1)")
        cfg = EnsembleConfig(n=(N - 1) // 2, b=b, v=v, profile=profile, base_seed=seed)
        tr = trace_samples(cfg, [z1, z2], replicas, threads=threads)
        est = correlation_estimate(tr, 0, 1)
        xs.append(N * b)
        ys.append(abs(est.mean))
        es.append(est.stderr)
    fit = scaling_fit(list(zip(xs, ys)))
    return ScalingStudy(grid=tuple(grid), abscissas=tuple(xs),
                        correlations=tuple(ys), stderrs=tuple(es), fit=fit)


@dataclass(frozen=True)
class LocalScaleStudy:
    lam: float
    deltas: tuple
    sigma_values: tuple         # Sigma * N b (prefactor-stripped)
    asymptotic_values: tuple
    nu: float
    c1: float
    slope: float
    slope_expected: float
    asym_rel_deviation_at: dict


def local_scale_study(profile: Profile, v: float, lam: float, deltas,
                      check_delta: float | None = 1e-3) -> LocalScaleStudy:
    """Exact smoothed correlation over a gap grid, its log-log slope, and the
    relative deviation from the small-gap asymptotics."""
    mom = small_p_constants(profile, self_check=False)
    sig = [sigma_smoothed(lam + d / 2.0, lam - d / 2.0, v, profile) for d in deltas]
    rho = boundary_w(lam, v).rho
    expo = 2.0 - 1.0 / mom.nu
    asym = [2.0 * b_nu(mom.c1, mom.nu) / (2.0 * rho) ** (1.0 / mom.nu) * d**-expo
            for d in deltas]
    fit = scaling_fit([(d, abs(s)) for d, s in zip(deltas, sig)])
    rel = {}
    if check_delta is not None:
        r = sigma_asymptotic(lam, check_delta, v, profile, N=1, b=1.0)
        rel[check_delta] = abs(r.sigma_value / r.asymptotic_value - 1.0)
    return LocalScaleStudy(
        lam=lam, deltas=tuple(deltas), sigma_values=tuple(sig),
        asymptotic_values=tuple(asym), nu=mom.nu, c1=mom.c1,
        slope=fit.slope, slope_expected=-expo, asym_rel_deviation_at=rel,
    )


def pointwise_study(n: int, b_values, profile: Profile, v: float, z: complex,
                    L: int, replicas: int, seed: int, *,
                    threads: int = 1) -> list[PointwiseResult]:
    """Pointwise diagonal convergence study across band widths."""
    out = []
    for b in b_values:
        cfg = EnsembleConfig(n=n, b=float(b), v=v, profile=profile, base_seed=seed)
        out.append(pointwise_diagonal_study(cfg, z, L, replicas, threads=threads))
    return out


@dataclass(frozen=True)
class GOEVarianceStudy:
    sizes: tuple
    variances: tuple
    stderrs: tuple
    fit: ScalingFit


def goe_variance_study(sizes, v: float, z: complex, replicas: int, seed: int, *,
                       threads: int = 1) -> GOEVarianceStudy:
    """Trace variance across GOE sizes; the self-averaging bound predicts a
    log-log slope of -2 against N."""
    ys, es = [], []
    for N in sizes:
        cfg = GOEConfig(N=N, v=v, base_seed=seed)
        tr = trace_samples(cfg, [z], replicas, threads=threads)
        est = variance_trace(tr, 0)
        ys.append(abs(est.mean))
        es.append(est.stderr)
    fit = scaling_fit(list(zip(sizes, ys)))
    return GOEVarianceStudy(sizes=tuple(sizes), variances=tuple(ys),
                            stderrs=tuple(es), fit=fit)


@dataclass(frozen=True)
class TheoryTable:
    w_rows: tuple       # (z, w)
    s_rows: tuple       # (z1, z2, S, Q)
    sigma_rows: tuple   # (lambda, delta, sigma*Nb, asym*Nb, nu, c1)


def theory_table(profile: Profile, v: float, z_points=(), z_pairs=(),
                 lam: float = 0.0, deltas=()) -> TheoryTable:
    w_rows = tuple((z, stieltjes_w(z, v).w) for z in z_points)
    s_rows = tuple(
        (z1, z2, s_leading(z1, z2, v, profile), q_integral(z1, z2, v, profile))
        for z1, z2 in z_pairs
    )
    sigma_rows = []
    if deltas:
        mom = small_p_constants(profile, self_check=False)
        rho = boundary_w(lam, v).rho
        expo = 2.0 - 1.0 / mom.nu
        for d in deltas:
            sig = sigma_smoothed(lam + d / 2.0, lam - d / 2.0, v, profile)
            asym = 2.0 * b_nu(mom.c1, mom.nu) / (2.0 * rho) ** (1.0 / mom.nu) * d**-expo
            sigma_rows.append((lam, d, sig, asym, mom.nu, mom.c1))
    return TheoryTable(w_rows=w_rows, s_rows=s_rows, sigma_rows=tuple(sigma_rows))
