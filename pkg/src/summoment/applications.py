"""Signal-processing uses of the Markov covariance models.

* covariance of a first-order Markov process after a unit-tap MA filter;
* fitting a second-order Markov kernel to a covariance sequence, directly
  (golden-section on the squared error) and through the Lambert W_{-1}
  linearization;
* one-step LMMSE prediction from a covariance kernel;
* time alignment of two jointly stationary sequences, by cross-covariance
  argmax or by a Lambert-linearized line fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DomainError, NumericError
from .moments import autocov_est, crosscov_est
from .processes import as_samples
from .specfun import lambert_w_m1

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
NORMALIZATION_CLAMP = 1e-9


def cov_1mp_ma(alpha: float, sigma2: float, n_taps: int, k):
    """``sum_{|j|<N} (N - |j|) sigma2 exp(-alpha |k - j|)`` for ``N = n_taps``."""
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    j = np.arange(-n_taps + 1, n_taps)
    w = n_taps - np.abs(j)
    kk = np.asarray(k, dtype=float)
    out = sigma2 * np.exp(-alpha * np.abs(kk[..., None] - j)) @ w
    return float(out) if np.ndim(k) == 0 else out


def markov2_shape(alpha, k):
    k = np.abs(np.asarray(k, dtype=float))
    return np.exp(-alpha * k) * (1.0 + alpha * k)


def experiment_lags(n_taps: int, n_x: int) -> np.ndarray:
    """Symmetric lag window of ``2 N (n_x + 1) - 3`` lags for the MA experiment."""
    half = n_taps * (n_x + 1) - 2
    return np.arange(-half, half + 1)


def _normalize(values, lags):
    values = np.asarray(values, dtype=float)
    lags = np.asarray(lags)
    zero = np.flatnonzero(lags == 0)
    if zero.size == 0:
        raise ValueError("lag window must contain lag 0 for peak normalization")
    peak = values[zero[0]]
    if not peak > 0:
        raise DomainError(f"covariance at lag 0 must be positive, got {peak}")
    c = values / peak
    if np.any(c > 1.0 + NORMALIZATION_CLAMP):
        raise DomainError("normalized covariance exceeds 1: not a valid 2MP shape")
    return np.minimum(c, 1.0), peak


def lambert_tilde(c):
    """``-1 - W_{-1}(-c/e)`` elementwise; inverts ``c = e^{-x}(1 + x)`` for ``x >= 0``."""
    c = np.asarray(c, dtype=float)
    out = np.empty(c.shape)
    for idx, v in np.ndenumerate(c):
        if not 0.0 < v <= 1.0:
            raise DomainError(f"normalized covariance {v!r} outside (0, 1]")
        out[idx] = 0.0 if v == 1.0 else -1.0 - lambert_w_m1(max(-v / math.e, -math.exp(-1.0)))
    return out


def golden_section(f, lo, hi, xtol=1e-12, max_iter=500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * (1.0 + abs(c) + abs(d)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class Fit2mpResult:
    alpha_hat: float
    alpha_lambert: float
    peak: float
    mse_percent: float


def fit_2mp(target, lags, alpha_range=(1e-6, 50.0), grid_points=400) -> Fit2mpResult:
    """Fit ``peak * exp(-alpha|k|)(1 + alpha|k|)`` to a covariance sequence.

    ``alpha_hat`` minimizes the squared error (log-grid scan to bracket, then
    golden-section).  ``alpha_lambert`` solves the linearized condition
    ``sum_k (alpha |k| - vtilde_k) = 0`` with ``vtilde_k = -1 - W_{-1}(-c_k/e)``
    on the peak-normalized values ``c_k``.
    """
    lags = np.asarray(lags)
    target = np.asarray(target, dtype=float)
    if target.shape != lags.shape:
        raise ValueError("target and lags differ in shape")
    c, peak = _normalize(target, lags)
    absk = np.abs(lags).astype(float)
    if not np.any(absk > 0):
        raise ValueError("lag window needs at least one nonzero lag")

    def sse(alpha):
        r = c - markov2_shape(alpha, absk)
        return float(r @ r)

    grid = np.geomspace(alpha_range[0], alpha_range[1], grid_points)
    vals = np.array([sse(g) for g in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise NumericError(f"2MP fit minimum not bracketed within alpha in {alpha_range}")
    alpha_hat = golden_section(sse, grid[i - 1], grid[i + 1])

    nz = absk > 0
    alpha_lambert = float(np.sum(lambert_tilde(c[nz])) / np.sum(absk[nz]))
    fitted = peak * markov2_shape(alpha_hat, absk)
    return Fit2mpResult(float(alpha_hat), alpha_lambert, float(peak), mse_percent(target, fitted))


def mse_percent(target, fitted) -> float:
    """``100 sum (target - fit)^2 / sum target^2``."""
    target = np.asarray(target, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    den = float(target @ target)
    if den == 0:
        raise DegenerateDataError("target covariance is identically zero")
    r = target - fitted
    return 100.0 * float(r @ r) / den


def fit_mse_metric(target, lags, alpha_hat: float) -> float:
    """Percent MSE of the peak-scaled 2MP kernel at ``alpha_hat`` against ``target``."""
    lags = np.asarray(lags)
    _, peak = _normalize(target, lags)
    return mse_percent(target, peak * markov2_shape(alpha_hat, lags))


def lmmse_predict(x, kernel) -> float:
    """One-step prediction ``X_N * kernel(1) / kernel(0)``."""
    samples = np.asarray(as_samples(x), dtype=float).reshape(-1)
    if samples.size == 0:
        raise ValueError("empty series")
    c0 = float(kernel(0))
    if not c0 > 0:
        raise DomainError("kernel(0) must be positive")
    return float(samples[-1] * float(kernel(1)) / c0)


def align_by_argmax(x1, x2, max_lag: int) -> int:
    """Lag maximizing ``crosscov_est(x1, x2, lag)`` over ``|lag| <= max_lag``.

    Ties go to the smaller ``|lag|``.
    """
    n = min(np.size(as_samples(x1)), np.size(as_samples(x2)))
    if max_lag < 0 or max_lag > n / 4:
        raise ValueError(f"max_lag must be in [0, N/4 = {n / 4:g}], got {max_lag}")
    best, best_val = 0, -math.inf
    for lag in sorted(range(-max_lag, max_lag + 1), key=abs):
        v = crosscov_est(x1, x2, lag, check_lag=False)
        if v > best_val:
            best, best_val = lag, v
    return best


@dataclass(frozen=True)
class AlignmentEstimate:
    delta_hat: float
    delta_rounded: int
    alpha_hat: float
    residual: float


def align_from_normalized(v) -> AlignmentEstimate:
    """Line fit ``vtilde_k = alpha Delta + alpha k`` to normalized cross-covariances ``v_k``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size < 2:
        raise ValueError("need at least two lag equations")
    if np.any(v > 1.0) and np.all(v <= 1.0 + NORMALIZATION_CLAMP):
        v = np.minimum(v, 1.0)
    vt = lambert_tilde(v)
    k = np.arange(v.size, dtype=float)
    design = np.column_stack([np.ones_like(k), k])
    coef, *_ = np.linalg.lstsq(design, vt, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    if not slope > 0:
        raise DomainError(f"fitted decay rate {slope:.3g} is not positive; data inconsistent with the model")
    r = vt - design @ coef
    delta = intercept / slope
    return AlignmentEstimate(delta, int(round(delta)), slope, float(r @ r))


def align_by_lambert(x1, x2, k_max: int = 6) -> AlignmentEstimate:
    """Estimate delay and 2MP decay rate from ``k_max`` lagged cross-covariances.

    ``v_k = crosscov(x1, x2, -k) / sqrt(var1 var2)`` for ``k = 0..k_max-1``,
    the side of the cross-covariance that decays away from a non-negative
    delay (``x2[j] = x1[j - Delta]``).
    """
    s = math.sqrt(autocov_est(x1, 0) * autocov_est(x2, 0))
    if s == 0:
        raise DegenerateDataError("zero-variance input")
    v = np.array([crosscov_est(x1, x2, -k, check_lag=False) / s for k in range(k_max)])
    return align_from_normalized(v)
