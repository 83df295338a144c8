"""Linear least squares and the split-data (subset-average) approximation.

The split method sorts the data by one independent variable, cuts it into
contiguous disjoint subsets, replaces each subset by its average point and
solves the resulting square system.  With two subsets and the straight-line
model ``y = P1 + P2 x`` only a 2x2 system is solved, independently of N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, SingularMatrixError
from .processes import TimeSeries, as_samples
from .summoments import PolySpec

COND_LIMIT = 1e12


def _design(design) -> np.ndarray:
    w = np.asarray(design, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2:
        raise ValueError("design matrix must be 2-D (N x D)")
    n, d = w.shape
    if n < d:
        raise ValueError(f"need N >= D, got N={n}, D={d}")
    if not np.all(np.isfinite(w)):
        raise ValueError("design matrix entries must be finite")
    return w


def ls_fit(design, y) -> np.ndarray:
    """Least-squares parameters ``(sum w w^T)^{-1} sum w X``.

    The normal equations are solved directly for ``D <= 2``; larger systems
    go through an orthogonal (SVD-based) solver.
    """
    w = _design(design)
    y = np.asarray(as_samples(y), dtype=float).reshape(-1)
    if y.size != w.shape[0]:
        raise ValueError(f"{y.size} observations for {w.shape[0]} design rows")
    d = w.shape[1]
    if d <= 2:
        g = w.T @ w
        cond = np.linalg.cond(g)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularMatrixError(f"normal matrix is singular (condition {cond:.3e})", condition=cond)
        return np.linalg.solve(g, w.T @ y)
    p, _, rank, sv = np.linalg.lstsq(w, y, rcond=None)
    if rank < d or sv[0] / sv[-1] > math.sqrt(COND_LIMIT):
        cond = float(sv[0] / sv[-1]) ** 2 if sv[-1] > 0 else float("inf")
        raise SingularMatrixError(f"normal matrix is singular (condition {cond:.3e})", condition=cond)
    return p


def vandermonde(t, degree: int) -> np.ndarray:
    """Rows ``(t^0, t^1, ..., t^degree)``."""
    return np.vander(np.asarray(t, dtype=float), degree + 1, increasing=True)


def poly_ls_fit(x, degree: int, t=None) -> PolySpec:
    """Fit a degree-``degree`` polynomial in time to the samples of ``x``.

    Times default to ``x.times`` for a :class:`TimeSeries`, else ``0..N-1``.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    y = np.asarray(as_samples(x), dtype=float).reshape(-1)
    if t is None:
        t = x.times if isinstance(x, TimeSeries) else np.arange(y.size, dtype=float)
    t = np.asarray(t, dtype=float).reshape(-1)
    if t.size != y.size:
        raise ValueError("times and samples differ in length")
    if y.size < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples for degree {degree}")
    if np.unique(t).size < degree + 1:
        raise SingularMatrixError("Vandermonde matrix is singular: too few distinct times",
                                  condition=float("inf"))
    return PolySpec(ls_fit(vandermonde(t, degree), y), degree)


@dataclass(frozen=True, eq=False)
class SplitLsResult:
    """Output of :func:`split_ls_fit`.

    ``w_bar`` holds the subset-averaged rows ``(1/a_l) sum w_1i w_i`` and
    ``x_bar`` the averaged observations ``(1/a_l) sum w_1i y_i``; ``a`` the
    normalizers (subset sizes).  ``totals`` are the full-data sums
    ``(||w1||^2, w_12, sum w1 y)`` used by the consistency identity.
    """

    estimates: np.ndarray
    subsets: tuple
    w_bar: np.ndarray
    x_bar: np.ndarray
    a: np.ndarray
    totals: tuple
    order: np.ndarray

    def consistency_residual(self) -> float:
        """Max relative violation of ``a1 W_l1 + a2 W_l2 = total`` over the identities."""
        lhs = (self.a[:, None] * np.column_stack([self.w_bar[:, 0], self.w_bar[:, 1], self.x_bar])).sum(axis=0)
        tot = np.asarray(self.totals, dtype=float)
        scale = np.maximum(np.abs(tot), 1.0)
        return float(np.max(np.abs(lhs - tot) / scale))


def split_ls_solve(design, y, sizes, sort_by=None) -> SplitLsResult:
    """Split LS with one contiguous sorted subset per parameter.

    ``sizes`` gives the subset cardinalities in ascending sort order (must
    sum to N, one per column of ``design``).  Rows are sorted by column
    ``sort_by`` (default: the last column).
    """
    w = _design(design)
    y = np.asarray(as_samples(y), dtype=float).reshape(-1)
    n, d = w.shape
    if y.size != n:
        raise ValueError(f"{y.size} observations for {n} design rows")
    sizes = [int(s) for s in sizes]
    if len(sizes) != d or sum(sizes) != n or min(sizes) < 1:
        raise ValueError(f"need {d} positive subset sizes summing to {n}, got {sizes}")
    col = d - 1 if sort_by is None else sort_by
    order = np.argsort(w[:, col], kind="stable")
    ws, ys = w[order], y[order]
    bounds = np.cumsum([0] + sizes)
    subsets = tuple(order[bounds[l]:bounds[l + 1]] for l in range(d))
    a = np.asarray(sizes, dtype=float)
    w_bar = np.empty((d, d))
    x_bar = np.empty(d)
    for l in range(d):
        blk = slice(bounds[l], bounds[l + 1])
        w1 = ws[blk, 0]
        w_bar[l] = (w1[:, None] * ws[blk]).sum(axis=0) / a[l]
        x_bar[l] = (w1 * ys[blk]).sum() / a[l]
    cond = np.linalg.cond(w_bar)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateDataError(f"subset averages do not determine the parameters (condition {cond:.3e})")
    est = np.linalg.solve(w_bar, x_bar)
    totals = (float(w[:, 0] @ w[:, 0]), float(w[:, 0] @ w[:, min(1, d - 1)]), float(w[:, 0] @ y))
    return SplitLsResult(est, subsets, w_bar, x_bar, a, totals, order)


def split_ls_fit(x_indep, y, n_lower: int | None = None) -> SplitLsResult:
    """Two-subset split LS for the straight line ``y = P1 + P2 x``.

    Data are sorted by ``x``; the lower subset takes ``n_lower`` points
    (default ``ceil(N/2)``, so odd N puts the extra point low).  Estimates
    are ``(P1, P2)``.
    """
    x = np.asarray(as_samples(x_indep), dtype=float).reshape(-1)
    y = np.asarray(as_samples(y), dtype=float).reshape(-1)
    n = x.size
    if n < 2:
        raise ValueError("split_ls_fit needs at least two points")
    if y.size != n:
        raise ValueError("x and y differ in length")
    if n_lower is None:
        n_lower = (n + 1) // 2
    if not 1 <= n_lower <= n - 1:
        raise ValueError(f"n_lower must be in [1, {n - 1}], got {n_lower}")
    design = np.column_stack([np.ones(n), x])
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if xs[n_lower:].mean() == xs[:n_lower].mean():
        raise DegenerateDataError("subset means of the independent variable coincide")
    return split_ls_solve(design, y, [n_lower, n - n_lower], sort_by=1)


def split_ls_fit_batch(x_indep, y_batch, n_lower: int | None = None) -> np.ndarray:
    """Row-wise :func:`split_ls_fit` estimates for a batch ``(trials, N)`` sharing ``x``.

    Returns an array ``(trials, 2)`` of ``(P1, P2)``.
    """
    x = np.asarray(as_samples(x_indep), dtype=float).reshape(-1)
    y = np.atleast_2d(np.asarray(y_batch, dtype=float))
    n = x.size
    if y.shape[1] != n:
        raise ValueError(f"rows of length {y.shape[1]} for {n} abscissae")
    if n_lower is None:
        n_lower = (n + 1) // 2
    if not 1 <= n_lower <= n - 1:
        raise ValueError(f"n_lower must be in [1, {n - 1}], got {n_lower}")
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[:, order]
    x1, x2 = xs[:n_lower].mean(), xs[n_lower:].mean()
    if x1 == x2:
        raise DegenerateDataError("subset means of the independent variable coincide")
    y1 = ys[:, :n_lower].mean(axis=1)
    y2 = ys[:, n_lower:].mean(axis=1)
    slope = (y2 - y1) / (x2 - x1)
    return np.column_stack([y1 - slope * x1, slope])


def split_line_closed_form(y, delta: float = 1.0):
    """Closed-form two-half split LS on ``x_i = delta * i``, ``i = 1..N`` (N even).

    Cross-check for :func:`split_ls_fit`; uses the self-consistent slope
    ``2 (Y2 - Y1) / (delta N)``.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.size
    if n % 2:
        raise ValueError("closed form needs even N")
    y1 = y[: n // 2].mean()
    y2 = y[n // 2:].mean()
    p2 = 2.0 * (y2 - y1) / (delta * n)
    p1 = y1 - p2 * delta * (n + 2) / 4.0
    return np.array([p1, p2])


def split_gradient_bounds(result: SplitLsResult, noise_var: float, xi: float):
    """Gradient interval ``(b_l, b_u, width)`` around the split-LS slope.

    Subset means are the observed averages; their variances follow the
    stationary scaling ``var(X_l) = var(X) N_l / (a_l^2 N)`` with
    ``var(X) = N noise_var`` for white noise.  ``width = 2 xi (sd1 + sd2) /
    (W22 - W12)``.
    """
    if not noise_var > 0:
        raise ValueError("noise_var must be positive")
    if xi < 0:
        raise ValueError("xi must be non-negative")
    n_l = np.array([s.size for s in result.subsets], dtype=float)
    n = n_l.sum()
    var_total = n * noise_var
    sd = np.sqrt(var_total * n_l / (result.a**2 * n))
    denom = result.w_bar[1, 1] - result.w_bar[0, 1]
    x1, x2 = result.x_bar[0], result.x_bar[1]
    b_l = ((x2 - xi * sd[1]) - (x1 + xi * sd[0])) / denom
    b_u = ((x2 + xi * sd[1]) - (x1 - xi * sd[0])) / denom
    width = 2.0 * xi * (sd[0] + sd[1]) / denom
    return float(b_l), float(b_u), float(width)


def total_squared_error(y, x_indep, params):
    """``sum_i (y_i - P1 - P2 x_i)^2``; batched over leading axes of ``y`` and ``params``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x_indep, dtype=float)
    p = np.asarray(params, dtype=float)
    r = y - p[..., 0:1] - p[..., 1:2] * x
    out = np.sum(r * r, axis=-1)
    return float(out) if out.ndim == 0 else out


def relative_excess_mse(y, x_indep, estimates, truth):
    """``T = 100 (S_apr - S_opt) / S_opt`` with ``S_opt`` at the true parameters."""
    s_apr = total_squared_error(y, x_indep, estimates)
    s_opt = total_squared_error(y, x_indep, truth)
    if np.any(np.asarray(s_opt) == 0):
        raise DegenerateDataError("total error at the true parameters is zero")
    return 100.0 * (s_apr - s_opt) / s_opt
