import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandrmt.ensemble import EnsembleConfig, sample, sample_goe
from bandrmt.profiles import make_profile
from bandrmt.resolvent import (
    DenseCapExceeded,
    SpectralSample,
    boundary_set,
    boundary_slice,
    counting_function_distance,
    eigenvalues_dense,
    factorize,
    normalized_trace,
    resolvent_diagonal,
    trace_from_eigenvalues,
)
from bandrmt.theory import semicircle_quantile

BOX = make_profile("box")
EXP = make_profile("exponential")
GAUSS = make_profile("gaussian")
PL = make_profile("power_law", 1.5)


def zero_sample(n=1):
    cfg = EnsembleConfig(n=n, b=1.0, v=0.0, profile=BOX, base_seed=0)
    return sample(cfg, 0)


class TestFactorize:
    def test_zero_matrix(self):
        f = factorize(zero_sample(), 1j)
        assert np.allclose(f.d, -1j)
        assert np.allclose(resolvent_diagonal(f), 1j)
        assert normalized_trace(f) == pytest.approx(1j, abs=1e-15)

    def test_reconstruction_residual(self):
        from bandrmt.banded import band_to_dense, unit_lower_from_band

        cfg = EnsembleConfig(n=25, b=8.0, v=1.0, profile=EXP, base_seed=2)
        s = sample(cfg, 1)
        z = 3j
        f = factorize(s, z)
        L = unit_lower_from_band(f.lb)
        A = s.to_dense() - z * np.eye(s.N)
        resid = np.max(np.abs(L @ np.diag(f.d) @ L.T - A))
        assert resid <= 1e-10 * (np.max(np.abs(s.to_dense())) + abs(z))

    def test_conjugate_shift_conjugate_pivots(self):
        cfg = EnsembleConfig(n=20, b=6.0, v=1.0, profile=BOX, base_seed=3)
        s = sample(cfg, 0)
        f1 = factorize(s, 0.4 + 2.5j)
        f2 = factorize(s, 0.4 - 2.5j)
        assert np.array_equal(f2.d, np.conj(f1.d))

    def test_near_real_axis_rejected(self):
        with pytest.raises(ValueError):
            factorize(zero_sample(), 1.0 + 1e-13j)

    def test_min_pivot_at_least_imag_shift(self):
        cfg = EnsembleConfig(n=40, b=10.0, v=1.0, profile=GAUSS, base_seed=4)
        f = factorize(sample(cfg, 0), 0.1 + 1.7j)
        assert f.min_pivot >= 1.7 - 1e-12
        assert not f.fallback_dense


class TestResolventDiagonal:
    @settings(max_examples=20, deadline=None)
    @given(st.integers(3, 40), st.floats(1.5, 12.0), st.integers(0, 100))
    def test_dense_oracle(self, n, b, replica):
        cfg = EnsembleConfig(n=n, b=min(b, 2 * n + 1), v=1.0, profile=EXP, base_seed=6)
        s = sample(cfg, replica)
        z = 0.5 + 3.2j
        diag = resolvent_diagonal(factorize(s, z))
        ref = np.diagonal(np.linalg.inv(s.to_dense() - z * np.eye(s.N)))
        assert np.max(np.abs(diag - ref)) <= 1e-10

    def test_herglotz_and_bound(self):
        cfg = EnsembleConfig(n=50, b=10.0, v=1.0, profile=BOX, base_seed=8)
        s = sample(cfg, 2)
        for z in (3j, -2.5j, 0.7 + 1.4j):
            diag = resolvent_diagonal(factorize(s, z))
            assert np.all(diag.imag * z.imag >= 0)
            assert np.max(np.abs(diag)) <= 1.0 / abs(z.imag) + 1e-12


class TestNormalizedTrace:
    def test_eigenvalue_route_agreement(self):
        cfg = EnsembleConfig(n=60, b=9.0, v=1.0, profile=EXP, base_seed=10)
        s = sample(cfg, 0)
        eigs = eigenvalues_dense(s)
        for z in (3j, 0.5 + 3.2j):
            t1 = normalized_trace(factorize(s, z))
            t2 = trace_from_eigenvalues(eigs.eigenvalues, z)
            assert abs(t1 - t2) <= 1e-9

    def test_conjugation_and_herglotz(self):
        cfg = EnsembleConfig(n=30, b=5.0, v=1.0, profile=BOX, base_seed=12)
        s = sample(cfg, 1)
        f = normalized_trace(factorize(s, 2j))
        fc = normalized_trace(factorize(s, -2j))
        assert abs(fc - np.conj(f)) <= 1e-14
        assert f.imag > 0
        assert abs(f) <= 0.5


class TestEigenvalues:
    def test_zero_matrix(self):
        eigs = eigenvalues_dense(zero_sample(3))
        assert np.array_equal(eigs.eigenvalues, np.zeros(7))

    def test_two_by_two_exact(self):
        # explicit 2x2 [[0,1],[1,0]] via a handcrafted sample
        from bandrmt.ensemble import BandMatrixSample, GOEConfig

        band = np.array([[0.0, 0.0], [1.0, 0.0]])
        sm = BandMatrixSample(config=GOEConfig(N=2, v=1.0, base_seed=0),
                              replica_index=0, band=band)
        eigs = eigenvalues_dense(sm)
        assert np.allclose(eigs.eigenvalues, [-1.0, 1.0])

    def test_frobenius_identity(self):
        cfg = EnsembleConfig(n=99, b=12.0, v=1.0, profile=EXP, base_seed=13)
        s = sample(cfg, 0)
        eigs = eigenvalues_dense(s)
        assert float(np.sum(eigs.eigenvalues**2)) == pytest.approx(
            s.frobenius_sq(), rel=1e-8)

    def test_trace_identity(self):
        cfg = EnsembleConfig(n=40, b=6.0, v=1.0, profile=BOX, base_seed=14)
        s = sample(cfg, 0)
        eigs = eigenvalues_dense(s)
        assert float(np.sum(eigs.eigenvalues)) == pytest.approx(
            float(np.sum(s.band[0])), abs=1e-8 * max(1.0, s.frobenius_sq()))

    def test_weyl_bound(self):
        cfg = EnsembleConfig(n=60, b=14.0, v=1.0, profile=GAUSS, base_seed=15)
        s = sample(cfg, 0)
        eigs = eigenvalues_dense(s)
        bound = s.row_sum_norm()
        assert eigs.eigenvalues[0] >= -bound - 1e-12
        assert eigs.eigenvalues[-1] <= bound + 1e-12

    def test_band_and_dense_reductions_agree(self):
        cfg = EnsembleConfig(n=80, b=6.0, v=1.0, profile=BOX, base_seed=16)
        s = sample(cfg, 0)  # w = 3 << N/4: band-aware route
        lam_band = eigenvalues_dense(s).eigenvalues
        lam_dense = np.sort(np.linalg.eigvalsh(s.to_dense()))
        assert np.max(np.abs(lam_band - lam_dense)) < 1e-10

    def test_cap_refused(self):
        cfg = EnsembleConfig(n=2100, b=4.0, v=1.0, profile=BOX, base_seed=17)
        s = sample(cfg, 0)
        with pytest.raises(DenseCapExceeded, match="4096"):
            eigenvalues_dense(s)

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            SpectralSample(eigenvalues=np.array([1.0, 0.0]), config=None,
                           replica_index=0)


class TestCountingDistance:
    def test_exact_quantiles(self):
        N = 1000
        lam = np.array([semicircle_quantile((i + 0.5) / N, 1.0) for i in range(N)])
        sp = SpectralSample(eigenvalues=lam, config=None, replica_index=0)
        assert counting_function_distance(sp, 1.0) <= 1.0 / N

    def test_goe_sample_close(self):
        eigs = eigenvalues_dense(sample_goe(600, 1.0, 21, 0))
        assert counting_function_distance(eigs, 1.0) <= 0.05

    def test_wrong_scale_detected(self):
        eigs = eigenvalues_dense(sample_goe(600, 1.0, 21, 0))
        assert counting_function_distance(eigs, 4.0) > 0.2


class TestBoundarySet:
    def test_direct_substitution(self):
        assert boundary_set(100, 10.0, 2) == range(-80, 81)
        assert boundary_set(100, 10.0, 0) == range(-100, 101)
        assert boundary_set(100, 10.0, 10) == range(0, 1)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            boundary_set(100, 10.0, 11)

    def test_slice_consistency(self):
        n, b, L = 37, 4.5, 3
        r = boundary_set(n, b, L)
        sl = boundary_slice(n, b, L)
        idx = np.arange(-n, n + 1)
        assert list(idx[sl]) == list(r)
