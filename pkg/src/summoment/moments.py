"""Method-of-moments estimators and vector similarity measures.

Divisor conventions
-------------------
* single-statistic, variance-like estimators (:func:`central_moment`) divide
  by ``N - 1``;
* lagged covariance estimators divide by ``N - k``;
* ensemble statistics (joint moments, mean cosine similarity, mean Minkowski
  distance) divide by the number of realizations and centre with ensemble
  (per-coordinate) means.

Ensembles are 2-D arrays with one realization per row.
"""

from __future__ import annotations

import math

import numpy as np

from .processes import as_samples
from .errors import DegenerateDataError, LagGuardError


def _batch(x) -> np.ndarray:
    a = np.asarray(as_samples(x), dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError("empty input")
    return a


def _ensemble(x, name="ensemble") -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array (realizations x dimension)")
    return a


def mean_and_stderr(values):
    """Sample mean of ``values`` and its standard error ``std / sqrt(n)``."""
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("empty input")
    if v.size == 1:
        return float(v[0]), float("nan")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def gaussian_abs_moment(m: float) -> float:
    """``E|U|^m`` for a standard normal ``U``: ``2^{m/2} Gamma((m+1)/2) / sqrt(pi)``."""
    from .specfun import gamma_fn

    return 2.0 ** (m / 2.0) * gamma_fn((m + 1.0) / 2.0) / math.sqrt(math.pi)


def general_moment(x, m: int) -> float:
    """Sample estimate of ``g_m = E|X|^m``: ``mean(|x|^m)``."""
    _check_order(m)
    a = _batch(x)
    return float(np.mean(np.abs(a) ** m))


def central_moment(x, m: int, normalized: bool = False) -> float:
    """``sum |x_i - mean|^m / (N - 1)``, optionally over ``var^{m/2}``.

    The variance used for normalization is the ``N - 1`` sample variance.
    """
    _check_order(m)
    a = _batch(x)
    if a.size < 2:
        raise ValueError("central_moment needs at least two samples")
    d = a - a.mean()
    mu = float(np.sum(np.abs(d) ** m) / (a.size - 1))
    if normalized:
        var = float(np.sum(d * d) / (a.size - 1))
        if var == 0.0:
            raise DegenerateDataError("cannot normalize: zero sample variance")
        mu /= var ** (m / 2.0)
    return mu


def _check_order(m):
    if int(m) != m or m < 1:
        raise ValueError(f"moment order must be a positive integer, got {m}")


def _guard(k, n, check_lag):
    if check_lag and abs(k) > n / 10:
        raise LagGuardError(f"lag {k} exceeds N/10 = {n / 10:g}; pass check_lag=False to override")
    if abs(k) >= n:
        raise LagGuardError(f"lag {k} must be smaller than the series length {n}")


def autocov_est(x, k: int, demean: bool = True, check_lag: bool = True) -> float:
    """Autocovariance ``sum_{i<N-k} (x_i - m)(x_{i+k} - m) / (N - k)``.

    With ``demean=False`` the raw product moment is returned.
    """
    a = _batch(x)
    k = abs(int(k))
    _guard(k, a.size, check_lag)
    if demean:
        a = a - a.mean()
    n = a.size
    return float(a[:n - k] @ a[k:] / (n - k))


def crosscov_est(x1, x2, k: int, demean: bool = True, check_lag: bool = True) -> float:
    """Cross-covariance ``E[x1_i x2_{i+k}]`` estimated over ``N = min(N1, N2)``.

    Negative ``k`` swaps the roles of the two series.
    """
    a = _batch(x1)
    b = _batch(x2)
    n = min(a.size, b.size)
    a, b = a[:n], b[:n]
    k = int(k)
    _guard(k, n, check_lag)
    if demean:
        a = a - a.mean()
        b = b - b.mean()
    if k < 0:
        a, b, k = b, a, -k
    return float(a[:n - k] @ b[k:] / (n - k))


def autocov_stderr(kernel, k: int, n: int, terms: int | None = None) -> float:
    """Bartlett standard error of the lag-``k`` sample autocovariance.

    ``Var ~ (1/n) sum_j [C(j)^2 + C(j+k) C(j-k)]`` for a Gaussian process
    with covariance ``kernel``; the sum is truncated at ``|j| <= terms``
    (default ``n - 1`` capped at 10000).
    """
    if terms is None:
        terms = min(n - 1, 10000)
    j = np.arange(-terms, terms + 1)
    c = np.asarray(kernel(j), dtype=float)
    var = np.sum(c * c) + np.sum(np.asarray(kernel(j + k)) * np.asarray(kernel(j - k)))
    return float(math.sqrt(max(var, 0.0) / n))


def cosine_similarity(x1, x2) -> float:
    a = _batch(x1)
    b = _batch(x2)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateDataError("cosine similarity of a zero vector is undefined")
    return float(np.clip((a @ b) / (na * nb), -1.0, 1.0))


def mean_cosine_similarity(x1, x2) -> float:
    """Ensemble cosine similarity of paired realizations.

    ``sum_i cov(X1i, X2i) / sqrt(sum_i var X1i * sum_i var X2i)`` with
    expectations taken across realizations (rows).
    """
    a = _ensemble(x1, "x1")
    b = _ensemble(x2, "x2")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    ma = a.mean(axis=0)
    mb = b.mean(axis=0)
    num = np.sum(np.mean(a * b, axis=0) - ma * mb)
    va = np.sum(np.mean(a * a, axis=0) - ma * ma)
    vb = np.sum(np.mean(b * b, axis=0) - mb * mb)
    if va <= 0 or vb <= 0:
        raise DegenerateDataError("zero ensemble variance")
    return float(num / math.sqrt(va * vb))


def minkowski_distance(x1, x2, m: int) -> float:
    """``(sum |x1_i - x2_i|^m)^{1/m}``."""
    _check_order(m)
    a = _batch(x1)
    b = _batch(x2)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.sum(np.abs(a - b) ** m) ** (1.0 / m))


def mean_minkowski(x1, x2, m: int, normalized: bool = False) -> float:
    """Ensemble mean Minkowski distance between paired realizations.

    Unnormalized: ``(sum_i E|X1i - X2i|^m)^{1/m}``.  Normalized: the
    coordinate average of ``E|D_i - ED_i|^m / (E|D_i - ED_i|^2)^{m/2}`` for
    the difference ``D = X1 - X2``.
    """
    _check_order(m)
    a = _ensemble(x1, "x1")
    b = _ensemble(x2, "x2")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a - b
    if not normalized:
        return float(np.sum(np.mean(np.abs(d) ** m, axis=0)) ** (1.0 / m))
    d = d - d.mean(axis=0)
    mu2 = np.mean(d * d, axis=0)
    if np.any(mu2 == 0):
        raise DegenerateDataError("zero-variance coordinate in the difference")
    mum = np.mean(np.abs(d) ** m, axis=0)
    return float(np.mean(mum / mu2 ** (m / 2.0)))


def joint_central_moment(x, orders) -> float:
    """``E prod_i (X_i - mean_i)^{m_i}`` over an ensemble, divisor = #realizations."""
    a = _ensemble(x)
    orders = np.asarray(orders, dtype=int).reshape(-1)
    if orders.size != a.shape[1]:
        raise ValueError(f"{orders.size} orders for dimension {a.shape[1]}")
    if np.any(orders < 1):
        raise ValueError("orders must be positive integers")
    d = a - a.mean(axis=0)
    return float(np.mean(np.prod(d ** orders, axis=1)))


def mean_total_variation_sq(x) -> float:
    """Sum of squared first differences, averaged over realizations if 2-D."""
    a = np.asarray(as_samples(x), dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[-1] < 2:
        raise ValueError("need at least two samples per realization")
    return float(np.mean(np.sum(np.diff(a, axis=-1) ** 2, axis=-1)))


def mean_tv_closed(kernel, n: int) -> float:
    """``2 n (C(0) - C(1))`` for ``n`` first differences of a stationary process."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(2 * n * (kernel(0) - kernel(1)))
