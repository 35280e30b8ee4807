"""Adaptive panel quadrature used throughout the package.

Two kinds of integrands appear: Fourier-type integrals of band profiles
(finitely supported, exponentially decaying, or heavy-tailed with an
oscillatory kernel) and the spectral-correlation integrand, which is smooth
but develops a sharp peak near p = 0 when evaluated at boundary spectral
values.  Both are handled by a Gauss-Legendre panel scheme with greedy
bisection refinement; the error estimate of a panel is the difference
between the two Gauss orders.
"""

from __future__ import annotations

import heapq
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

GL_LO = 16
GL_HI = 32


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be resolved to the requested accuracy.

    Carries the best value obtained and the achieved error estimate.
    """

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


@lru_cache(maxsize=16)
def _gl_rule(order: int):
    x, w = roots_legendre(order)
    return x, w


def _panel_nodes(a, b, order):
    x, w = _gl_rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return mid + half * x, half * w


def panel_integral(f, a, b, order=GL_HI):
    nodes, weights = _panel_nodes(a, b, order)
    return np.sum(weights * f(nodes))


def adaptive_panels(f, breakpoints, abs_tol, rel_tol=1e-12, max_panels=4000):
    """Integrate a vectorized callable over consecutive panels with refinement.

    ``breakpoints`` seeds the panel structure (it should already resolve any
    known oscillation or peak scales).  Panels with the largest error are
    bisected until the summed estimate meets ``max(abs_tol, rel_tol*|I|)``.

    Returns ``(value, error_estimate)``; value is complex if f is.
    """
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
        raise ValueError("breakpoints must be strictly increasing with >= 2 entries")

    def eval_panel(a, b):
        lo = panel_integral(f, a, b, GL_LO)
        hi = panel_integral(f, a, b, GL_HI)
        return hi, abs(hi - lo)

    heap = []
    total = 0.0 + 0.0j
    total_err = 0.0
    for a, b in zip(bp[:-1], bp[1:]):
        val, err = eval_panel(a, b)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, a, b, val, err))

    n_panels = bp.size - 1
    while total_err > max(abs_tol, rel_tol * abs(total)) and heap and n_panels < max_panels:
        _, a, b, val, err = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            # panel no longer splittable in float64
            heapq.heappush(heap, (0.0, a, b, val, err))
            break
        v1, e1 = eval_panel(a, mid)
        v2, e2 = eval_panel(mid, b)
        total += (v1 + v2) - val
        total_err += (e1 + e2) - err
        heapq.heappush(heap, (-e1, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, b, v2, e2))
        n_panels += 1

    return total, total_err


def geometric_breakpoints(lo, hi, factor=2.0):
    """Strictly increasing grid 0, lo, lo*factor, ..., >= hi."""
    if lo <= 0 or hi <= lo:
        raise ValueError("need 0 < lo < hi")
    pts = [0.0, lo]
    p = lo
    while p < hi:
        p *= factor
        pts.append(min(p, hi))
    if pts[-1] < hi:
        pts.append(hi)
    return np.array(pts)


def with_oscillation_splits(breakpoints, half_period):
    """Subdivide panels so none is wider than the oscillation half period."""
    if not np.isfinite(half_period) or half_period <= 0:
        return np.asarray(breakpoints, dtype=float)
    out = [breakpoints[0]]
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        n = int(np.ceil((b - a) / half_period))
        if n > 1:
            out.extend(np.linspace(a, b, n + 1)[1:])
        else:
            out.append(b)
    return np.array(out)


def alternating_pi_panel_sum(f, offset=0.0, n_panels=60, gl_order=16):
    """Sum of f over [offset + k*pi, offset + (k+1)*pi) accelerated by
    iterated averaging of the partial sums.

    Intended for oscillatory tails whose per-panel contributions alternate in
    sign with slowly decaying magnitude; iterated averaging (repeated Euler
    transform) turns the alternating partial sums into a rapidly convergent
    sequence.  Returns (value, error_estimate).
    """
    if n_panels < 4:
        raise ValueError("need at least 4 panels")
    vals = np.empty(n_panels, dtype=complex)
    for k in range(n_panels):
        a = offset + k * np.pi
        vals[k] = panel_integral(f, a, a + np.pi, gl_order)
    partial = np.cumsum(vals)
    tail = partial[n_panels // 2:]
    finals = [tail[-1]]
    while tail.size > 1:
        tail = 0.5 * (tail[1:] + tail[:-1])
        finals.append(tail[-1])
    value = tail[0]
    est = abs(finals[-1] - finals[-2]) + abs(value - finals[-1])
    return value, est
