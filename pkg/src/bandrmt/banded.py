"""Complex-symmetric banded LDL^T and selected inversion of the band diagonal.

Storage convention (lower band layout): ``ab[d, j] = A[j + d, j]`` for
subdiagonal offsets d = 0..w.  The shifted matrices factored here are
H - z I with H real symmetric banded and Im z != 0, which makes every
leading principal submatrix nonsingular with |pivot| >= |Im z|; no pivoting
is needed, and a floor monitor guards the claim.

Both kernels run in O(N w^2) with BLAS-3 constants: the factorization is
panel right-looking (scalar rank-1 updates inside a narrow panel, one GEMM
per panel for the trailing band), and the inverse diagonal comes from the
block-tridiagonal backward recursion on w-sized blocks

    S_k   = -Z_{k+1,k+1} E_k Lam_k^{-1}
    Z_kk  = Lam_k^{-T} (D_k^{-1} Lam_k^{-1} - E_k^T S_k)

where Lam_k, E_k are the diagonal/subdiagonal blocks of the unit factor.
All inverse entries produced lie within the block band pattern; only the
diagonal is returned.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

_PANEL = 48


class PivotBreakdown(RuntimeError):
    """A pivot fell below the configured floor (triggers the dense fallback)."""

    def __init__(self, column, magnitude, floor):
        super().__init__(
            f"pivot {magnitude:.3e} below floor {floor:.3e} at column {column}"
        )
        self.column = column
        self.magnitude = magnitude
        self.floor = floor


def ldlt_banded(ab: np.ndarray, pivot_floor: float = 0.0, panel: int = _PANEL):
    """Factor a complex-symmetric banded matrix as L D L^T without pivoting.

    ``ab`` is the lower band layout above and is not modified.  Returns
    ``(lb, d, min_pivot)`` where ``lb`` holds the unit lower factor in the
    same layout (row 0 is ones) and ``d`` the complex pivots.
    """
    w1, N = ab.shape
    w = w1 - 1
    pad = 2 * panel + 1
    lb = np.zeros((w1 + pad, N), dtype=complex)
    lb[:w1] = ab
    d = np.empty(N, dtype=complex)
    min_pivot = np.inf

    for k0 in range(0, N, panel):
        k1 = min(k0 + panel, N)
        for j in range(k0, k1):
            dj = lb[0, j]
            mag = abs(dj)
            if mag < min_pivot:
                min_pivot = mag
            if mag <= pivot_floor:
                raise PivotBreakdown(j, mag, pivot_floor)
            d[j] = dj
            hj = min(w, N - 1 - j)
            if hj > 0:
                lb[1 : hj + 1, j] /= dj
            # immediate rank-1 updates of the remaining panel columns
            for k in range(j + 1, k1):
                m = k - j
                if m > hj:
                    break
                ljk = lb[m, j]
                if ljk == 0.0:
                    continue
                span = min(w, N - 1 - k)
                lb[: span + 1, k] -= (dj * ljk) * lb[m : m + span + 1, j]
        # trailing band update by the whole panel (one GEMM)
        nb = k1 - k0
        h = min(w + nb - 1, N - k1)
        if h <= 0:
            continue
        rows = (k1 - k0) + np.arange(h)[:, None] - np.arange(nb)[None, :]
        V = lb[rows, np.arange(k0, k1)[None, :]]
        M = (V * d[k0:k1][None, :]) @ V.T
        lim = min(h - 1, w)
        flat = M.ravel()
        for delta in range(lim + 1):
            cnt = h - delta
            lb[delta, k1 : k1 + cnt] -= flat[delta * h : delta * h + (cnt - 1) * (h + 1) + 1 : h + 1]

    lb[0, :] = 1.0
    return lb[:w1], d, min_pivot


def _gather_block(lb, w, col0, rows0, nrows, ncols):
    """Dense (nrows x ncols) block L[rows0:rows0+nrows, col0:col0+ncols]."""
    cols = np.arange(col0, col0 + ncols)
    offs = rows0 + np.arange(nrows)[:, None] - cols[None, :]
    valid = (offs >= 0) & (offs <= w)
    out = np.zeros((nrows, ncols), dtype=complex)
    idx = np.where(valid)
    out[idx] = lb[offs[idx], cols[idx[1]]]
    return out


def band_inverse_diagonal(lb: np.ndarray, d: np.ndarray, block: int | None = None):
    """Diagonal of (L D L^T)^{-1} from banded unit factors, O(N w^2)."""
    w1, N = lb.shape
    w = w1 - 1
    if w == 0:
        return 1.0 / d.copy()
    m = max(w, 32) if block is None else block
    m = min(m, N)
    starts = list(range(0, N, m))
    K = len(starts)
    diag = np.empty(N, dtype=complex)

    def lam_block(k):
        s = starts[k]
        size = min(m, N - s)
        return _gather_block(lb, w, s, s, size, size), s, size

    # last block: Z = Lam^{-T} D^{-1} Lam^{-1}
    lam, s, size = lam_block(K - 1)
    X = solve_triangular(lam, np.eye(size, dtype=complex), lower=True, unit_diagonal=True)
    Z = X.T @ (X / d[s : s + size][:, None])
    diag[s : s + size] = np.diagonal(Z)

    for k in range(K - 2, -1, -1):
        lam, s, size = lam_block(k)
        s_next = starts[k + 1]
        size_next = min(m, N - s_next)
        E = _gather_block(lb, w, s, s_next, size_next, size)
        # Y = E Lam^{-1} via Lam^T W = E^T
        Y = solve_triangular(lam, E.T, trans="T", lower=True, unit_diagonal=True).T
        S = -Z @ Y
        X = solve_triangular(lam, np.eye(size, dtype=complex), lower=True, unit_diagonal=True)
        core = X / d[s : s + size][:, None] - E.T @ S
        Z = solve_triangular(lam, core, trans="T", lower=True, unit_diagonal=True)
        diag[s : s + size] = np.diagonal(Z)

    return diag


def band_to_dense(ab: np.ndarray) -> np.ndarray:
    """Symmetric dense matrix from the lower band layout (test helper)."""
    w1, N = ab.shape
    A = np.zeros((N, N), dtype=ab.dtype)
    for dd in range(w1):
        vals = ab[dd, : N - dd]
        idx = np.arange(N - dd)
        A[idx + dd, idx] = vals
        if dd:
            A[idx, idx + dd] = vals
    return A


def unit_lower_from_band(lb: np.ndarray) -> np.ndarray:
    """Dense unit lower-triangular factor from banded storage (test helper)."""
    w1, N = lb.shape
    L = np.eye(N, dtype=complex)
    for dd in range(1, w1):
        vals = lb[dd, : N - dd]
        idx = np.arange(N - dd)
        L[idx + dd, idx] = vals
    return L
