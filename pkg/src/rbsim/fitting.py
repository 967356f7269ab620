"""Least-squares fitting of the exponential decay A0 + B0 * p^m."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["DecayFit", "fit_decay", "r_from_p"]

_GRID_SIZE = 512
_MAX_ITERATIONS = 200
_STEP_TOL = 1e-12


@dataclass(frozen=True)
class DecayFit:
    """Result of fitting values against sequence length."""

    a0: float
    b0: float
    p: float
    residual_rms: float
    converged: bool
    degenerate: bool = False
    at_boundary: bool = False
    covariance: np.ndarray | None = field(default=None, repr=False)

    def value(self, m) -> np.ndarray:
        return self.a0 + self.b0 * self.p ** np.asarray(m, dtype=float)


def r_from_p(p: float, d: int) -> float:
    """Average gate infidelity (d - 1)(1 - p)/d of a depolarizing parameter."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return (d - 1) * (1.0 - p) / d


def _coeffs_unbounded(x, ys, sw):
    a = np.vstack([np.ones_like(x), x]).T * sw[:, None]
    coef, *_ = np.linalg.lstsq(a, ys * sw, rcond=None)
    resid = (ys - coef[0] - coef[1] * x) * sw
    return coef, float(resid @ resid)


def _coeffs_bounded(x, ys, sw, bounds):
    """Exact box-constrained weighted LSQ for y ~ a + b x (2 variables)."""
    (a_lo, a_hi), (b_lo, b_hi) = bounds
    w = sw * sw
    candidates = []
    coef, _ = _coeffs_unbounded(x, ys, sw)
    if a_lo <= coef[0] <= a_hi and b_lo <= coef[1] <= b_hi:
        candidates.append(coef)
    for a in (a_lo, a_hi):  # a clamped, solve b
        den = float(np.dot(x * w, x))
        b = float(np.dot(x * w, ys - a)) / den if den > 0 else 0.0
        candidates.append(np.array([a, min(max(b, b_lo), b_hi)]))
    for b in (b_lo, b_hi):  # b clamped, solve a
        a = float(np.dot(w, ys - b * x)) / float(np.sum(w))
        candidates.append(np.array([min(max(a, a_lo), a_hi), b]))
    best, best_sse = None, np.inf
    for c in candidates:
        resid = (ys - c[0] - c[1] * x) * sw
        sse = float(resid @ resid)
        if sse < best_sse:
            best, best_sse = c, sse
    return best, best_sse


def _profile_sse(p, ms, ys, sw, bounds):
    x = p ** ms
    if bounds is None:
        return _coeffs_unbounded(x, ys, sw)
    return _coeffs_bounded(x, ys, sw, bounds)


def fit_decay(points, weights=None, coefficient_bounds=None) -> DecayFit:
    """Fit ``value = A0 + B0 * p^m`` to (m, value) points.

    Coarse log-spaced grid over p in [0, 1), linear least squares for
    (A0, B0) at each grid point, then Gauss-Newton refinement from the best
    one.  ``weights`` follow the usual 1/stderr^2 convention.  When
    ``coefficient_bounds`` is given as ((a_lo, a_hi), (b_lo, b_hi)) the
    linear coefficients are box-constrained (profile fit with a bounded
    1-D refinement over p instead of Gauss-Newton).
    """
    pts = sorted((float(m), float(v)) for m, v in points)
    ms = np.array([m for m, _ in pts])
    ys = np.array([v for _, v in pts])
    if ms.size < 3 or np.unique(ms).size < 3:
        raise ValueError("need at least 3 points with 3 distinct lengths")
    if weights is None:
        w = np.ones_like(ys)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != ys.shape:
            raise ValueError("weights must match points")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
    sw = np.sqrt(w)

    if np.allclose(ys, ys[0], rtol=0.0, atol=1e-15):
        return DecayFit(a0=float(ys[0]), b0=0.0, p=1.0, residual_rms=0.0,
                        converged=False, degenerate=True, at_boundary=True)

    # stage 1: coarse grid, log-spaced in 1 - p (plus the p = 0 endpoint)
    grid = 1.0 - np.logspace(-9.0, 0.0, _GRID_SIZE)
    sses = np.empty(_GRID_SIZE)
    for i, p in enumerate(grid):
        sses[i] = _profile_sse(p, ms, ys, sw, coefficient_bounds)[1]
    best = int(np.argmin(sses))
    p = float(grid[best])

    if coefficient_bounds is None:
        coef, _ = _profile_sse(p, ms, ys, sw, None)
        theta = np.array([coef[0], coef[1], p])
        converged = False
        for _ in range(_MAX_ITERATIONS):
            a0, b0, p = theta
            p = min(max(p, 0.0), 1.0 - 1e-15)
            x = p ** ms
            resid = a0 + b0 * x - ys
            jac = np.vstack([np.ones_like(x), x, b0 * ms * p ** (ms - 1.0)]).T
            jw = jac * sw[:, None]
            try:
                step, *_ = np.linalg.lstsq(jw, -(resid * sw), rcond=None)
            except np.linalg.LinAlgError:
                break
            theta = theta + step
            theta[2] = min(max(theta[2], 0.0), 1.0)
            if float(np.max(np.abs(step))) < _STEP_TOL:
                converged = True
                break
        a0, b0, p = theta
        cov = None
        x = p ** ms
        jac = np.vstack([np.ones_like(x), x, b0 * ms * p ** (np.maximum(ms - 1.0, 0.0))]).T
        jw = jac * sw[:, None]
        jtj = jw.T @ jw
        if np.linalg.matrix_rank(jtj) == 3:
            dof = max(ms.size - 3, 1)
            resid = (a0 + b0 * x - ys) * sw
            cov = np.linalg.inv(jtj) * float(resid @ resid) / dof
    else:
        # bounded path: golden-section refine p between neighbouring grid points
        lo = float(grid[min(best + 1, _GRID_SIZE - 1)])  # grid is decreasing in p
        hi = float(grid[max(best - 1, 0)])
        lo, hi = min(lo, hi), max(hi, lo)
        gr = (np.sqrt(5.0) - 1.0) / 2.0
        c1 = hi - gr * (hi - lo)
        c2 = lo + gr * (hi - lo)
        f1 = _profile_sse(c1, ms, ys, sw, coefficient_bounds)[1]
        f2 = _profile_sse(c2, ms, ys, sw, coefficient_bounds)[1]
        for _ in range(_MAX_ITERATIONS):
            if hi - lo < _STEP_TOL:
                break
            if f1 < f2:
                hi, c2, f2 = c2, c1, f1
                c1 = hi - gr * (hi - lo)
                f1 = _profile_sse(c1, ms, ys, sw, coefficient_bounds)[1]
            else:
                lo, c1, f1 = c1, c2, f2
                c2 = lo + gr * (hi - lo)
                f2 = _profile_sse(c2, ms, ys, sw, coefficient_bounds)[1]
        p = (lo + hi) / 2.0
        coef, _ = _profile_sse(p, ms, ys, sw, coefficient_bounds)
        a0, b0 = float(coef[0]), float(coef[1])
        converged = True
        cov = None

    p = min(max(float(p), 0.0), 1.0)
    resid = (a0 + b0 * p ** ms - ys)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return DecayFit(
        a0=float(a0),
        b0=float(b0),
        p=p,
        residual_rms=rms,
        converged=bool(converged),
        degenerate=False,
        at_boundary=bool(p <= 0.0 or p >= 1.0 - 1e-12),
        covariance=cov,
    )
