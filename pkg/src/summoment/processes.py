"""Correlated Gaussian process generation and covariance kernels.

Covariance kernels are small frozen dataclasses that are callable on an
integer lag (scalar or array).  Covariance matrices are Toeplitz matrices
built from a kernel, or any symmetric PSD matrix, wrapped in
:class:`CovMatrix` which caches its eigen-factor.

Generators are pure functions of ``(spec, seed)``; see :mod:`summoment._rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import eigh, solve, toeplitz
from scipy.signal import lfilter

from ._rng import make_rng
from .errors import DomainError, InfeasibleSpecError, NotPositiveSemidefiniteError

PSD_CLIP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One realization of a discretely sampled real process."""

    samples: np.ndarray
    dt: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).reshape(-1)
        if samples.size < 1:
            raise ValueError("TimeSeries needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("TimeSeries samples must be finite")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)

    @property
    def times(self) -> np.ndarray:
        return self.origin + self.dt * np.arange(self.samples.size)


def as_samples(x) -> np.ndarray:
    """Return the sample array of a TimeSeries or array-like."""
    if isinstance(x, TimeSeries):
        return x.samples
    return np.asarray(x, dtype=float)


# --------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class MarkovParams:
    alpha: float
    sigma2: float = 1.0
    order: int = 1

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")

    def kernel(self):
        if self.order == 1:
            return Markov1Kernel(self.alpha, self.sigma2)
        return Markov2Kernel(self.alpha, self.sigma2)


def _markov_core(alpha, k, order):
    k = np.abs(np.asarray(k, dtype=float))
    if math.isinf(alpha):
        return np.where(k == 0, 1.0, 0.0)
    decay = np.exp(-alpha * k)
    if order == 2:
        decay = decay * (1.0 + alpha * k)
    return decay


def _scalar_or_array(value, k):
    return float(value) if np.ndim(k) == 0 else value


def cov_markov1(params: MarkovParams, k):
    """First-order Markov autocovariance ``sigma2 * exp(-alpha |k|)``."""
    return _scalar_or_array(params.sigma2 * _markov_core(params.alpha, k, 1), k)


def cov_markov2(params: MarkovParams, k):
    """Second-order Markov autocovariance ``sigma2 exp(-alpha|k|)(1 + alpha|k|)``."""
    return _scalar_or_array(params.sigma2 * _markov_core(params.alpha, k, 2), k)


@dataclass(frozen=True)
class WhiteKernel:
    sigma2: float = 1.0

    def __call__(self, k):
        return _scalar_or_array(np.where(np.asarray(k) == 0, self.sigma2, 0.0), k)


@dataclass(frozen=True)
class Markov1Kernel:
    alpha: float
    sigma2: float = 1.0

    def __call__(self, k):
        return _scalar_or_array(self.sigma2 * _markov_core(self.alpha, k, 1), k)


@dataclass(frozen=True)
class Markov2Kernel:
    alpha: float
    sigma2: float = 1.0

    def __call__(self, k):
        return _scalar_or_array(self.sigma2 * _markov_core(self.alpha, k, 2), k)


@dataclass(frozen=True, eq=False)
class FilteredKernel:
    """Output covariance of ``base`` passed through the FIR taps ``h``."""

    base: Callable
    taps: tuple

    def __call__(self, k):
        if np.ndim(k) == 0:
            return filter_cov(self.base, self.taps, int(k))
        return np.array([filter_cov(self.base, self.taps, int(kk)) for kk in np.ravel(k)]).reshape(np.shape(k))


Kernel = Callable[[Union[int, np.ndarray]], Union[float, np.ndarray]]


# --------------------------------------------------------------------------
# covariance matrices


def _check_psd(eigvals, what="matrix"):
    scale = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    lo = float(np.min(eigvals)) if eigvals.size else 0.0
    if lo < -PSD_CLIP_TOL * scale:
        raise NotPositiveSemidefiniteError(
            f"{what} is not positive semi-definite: min eigenvalue {lo:.3e}, "
            f"tolerance {-PSD_CLIP_TOL * scale:.3e}",
            min_eigenvalue=lo,
            max_eigenvalue=scale,
        )


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric PSD matrix with a lazily computed factor ``T @ T.T == entries``.

    ``kernel`` records the stationary covariance function the matrix was built
    from, if any.
    """

    entries: np.ndarray
    kernel: object = field(default=None)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"covariance must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("covariance entries must be finite")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def factor(self) -> np.ndarray:
        t = _factor(self.entries)
        t.setflags(write=False)
        return t


def _as_cov(cov) -> CovMatrix:
    return cov if isinstance(cov, CovMatrix) else CovMatrix(cov)


def kernel_to_cov(kernel: Kernel, n: int) -> CovMatrix:
    """Toeplitz covariance ``[C]_ij = kernel(j - i)`` of dimension ``n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    col = np.asarray(kernel(np.arange(n)), dtype=float)
    entries = toeplitz(col)
    _check_psd(np.linalg.eigvalsh(entries), "kernel Toeplitz matrix")
    return CovMatrix(entries, kernel=kernel)


def _factor(a: np.ndarray) -> np.ndarray:
    lam, u = eigh(a)
    _check_psd(lam)
    lam = np.clip(lam, 0.0, None)
    # fix eigenvector signs: largest-magnitude component positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    u = u * signs
    return u * np.sqrt(lam)


def factorize(cov) -> np.ndarray:
    """Return ``T = U sqrt(Lambda)`` with ``T @ T.T == cov``.

    Eigenvalues down to ``-1e-8 * max|lambda|`` are treated as rounding and
    clipped to zero; anything lower raises
    :class:`~summoment.errors.NotPositiveSemidefiniteError`.
    """
    if isinstance(cov, CovMatrix):
        return np.array(cov.factor)
    return _factor(CovMatrix(cov).entries)


# --------------------------------------------------------------------------
# generators


def gen_white(n: int, sigma2: float = 1.0, seed: int = 0, stream: int = 0) -> TimeSeries:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    u = make_rng(seed, stream).standard_normal(n)
    if sigma2 == 0:
        return TimeSeries(np.zeros(n))
    return TimeSeries(math.sqrt(sigma2) * u)


def sample_gaussian(cov, n_draws: int, seed: int = 0, mean=None, stream: int = 0) -> np.ndarray:
    """Draw ``n_draws`` rows ``X = T U + mean``; returns an ``(n_draws, dim)`` array."""
    cov = _as_cov(cov)
    t = cov.factor
    u = make_rng(seed, stream).standard_normal((n_draws, cov.dim))
    x = u @ t.T
    if mean is not None:
        mean = np.asarray(mean, dtype=float)
        if mean.shape != (cov.dim,):
            raise ValueError(f"mean must have length {cov.dim}, got shape {mean.shape}")
        x = x + mean
    return x


def gen_gaussian_vector(cov, mean=None, seed: int = 0, stream: int = 0) -> TimeSeries:
    """One Gaussian vector with covariance ``cov`` and the given mean."""
    return TimeSeries(sample_gaussian(cov, 1, seed=seed, mean=mean, stream=stream)[0])


def default_burn_in(alpha: float) -> int:
    return int(math.ceil(10.0 / alpha))


def ar2_double_pole_coeffs(params: MarkovParams):
    """``(a, b)`` of ``x(n) = 2a x(n-1) - a^2 x(n-2) + b u(n)`` with variance ``sigma2``."""
    a = math.exp(-params.alpha)
    b = math.sqrt(params.sigma2 * (1.0 - a * a) ** 3 / (1.0 + a * a))
    return a, b


def ar2_double_pole_autocov(params: MarkovParams, k):
    """Stationary autocovariance of the double-pole AR(2) recursion.

    ``sigma2 * a^|k| * (1 + |k| (1 - a^2) / (1 + a^2))``; close to, but not
    equal to, the exponential 2MP kernel.
    """
    a = math.exp(-params.alpha)
    kk = np.abs(np.asarray(k, dtype=float))
    out = params.sigma2 * a**kk * (1.0 + kk * (1.0 - a * a) / (1.0 + a * a))
    return _scalar_or_array(out, k)


def gen_markov_ar(params: MarkovParams, n: int, seed: int = 0, burn_in: int | None = None,
                  stream: int = 0) -> TimeSeries:
    """Markov process by AR recursion driven by white Gaussian noise.

    Order 1 is exact: ``x(n) = a x(n-1) + sigma sqrt(1 - a^2) u(n)`` with
    ``a = exp(-alpha)`` started from the stationary distribution.  Order 2 uses
    the double positive pole recursion (see :func:`ar2_double_pole_autocov`
    for its covariance) started at zero.  ``burn_in`` samples (default
    ``ceil(10 / alpha)``) are discarded in both cases.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not params.alpha > 0 or math.isinf(params.alpha):
        raise DomainError(f"AR recursion needs 0 < exp(-alpha) < 1, got alpha={params.alpha}")
    if burn_in is None:
        burn_in = default_burn_in(params.alpha)
    rng = make_rng(seed, stream)
    a = math.exp(-params.alpha)
    if params.order == 1:
        x0 = math.sqrt(params.sigma2) * rng.standard_normal()
        u = rng.standard_normal(n + burn_in)
        b = math.sqrt(params.sigma2 * (1.0 - a * a))
        x, _ = lfilter([b], [1.0, -a], u, zi=[a * x0])
    else:
        a, b = ar2_double_pole_coeffs(params)
        u = rng.standard_normal(n + burn_in)
        x = lfilter([b], [1.0, -2.0 * a, a * a], u)
    return TimeSeries(x[burn_in:])


def markov2_arma_coeffs(params: MarkovParams):
    """ARMA(2,1) coefficients reproducing the exponential 2MP kernel exactly.

    Returns ``(ar, ma)`` filter polynomials for ``scipy.signal.lfilter`` driven
    by unit-variance white noise.  The generating function of
    ``exp(-alpha|k|)(1 + alpha|k|)`` is ``(c0 + c1 (z + 1/z)) / |1 - a z|^4``;
    the MA part is the minimum-phase factor of the numerator.
    """
    alpha = params.alpha
    a = math.exp(-alpha)
    c0 = (1.0 - a**4) - 4.0 * alpha * a * a
    c1 = a * (alpha * (1.0 + a * a) - (1.0 - a * a))
    if c1 == 0.0:
        theta, b2 = 0.0, c0
    else:
        theta = (c0 - math.sqrt(max(c0 * c0 - 4.0 * c1 * c1, 0.0))) / (2.0 * c1)
        b2 = c1 / theta
    b = math.sqrt(params.sigma2 * b2)
    return np.array([1.0, -2.0 * a, a * a]), np.array([b, b * theta])


def gen_markov2_arma(params: MarkovParams, n: int, seed: int = 0, burn_in: int | None = None,
                     stream: int = 0) -> TimeSeries:
    """Long 2MP stream with exactly the exponential-form autocovariance.

    Default burn-in is ``ceil(40 / alpha)``; the double pole decays as
    ``k a^k`` so it needs longer than the first-order case.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not params.alpha > 0 or math.isinf(params.alpha):
        raise DomainError(f"ARMA recursion needs 0 < exp(-alpha) < 1, got alpha={params.alpha}")
    if burn_in is None:
        burn_in = int(math.ceil(40.0 / params.alpha))
    ar, ma = markov2_arma_coeffs(params)
    u = make_rng(seed, stream).standard_normal(n + burn_in)
    return TimeSeries(lfilter(ma, ar, u)[burn_in:])


def gen_shifted_pair(params: MarkovParams, n: int, delay: int, seed: int = 0,
                     noise_var: float = 0.0, stream: int = 0):
    """Two views of one Markov stream with ``x2[j] = x1[j - delay]``.

    Optional independent white noise of variance ``noise_var`` is added to
    each view.  The cross-covariance ``E[x1_i x2_{i+k}]`` peaks at
    ``k = delay``.
    """
    d = int(delay)
    total = n + abs(d)
    if params.order == 2:
        s = gen_markov2_arma(params, total, seed=seed, stream=stream).samples
    else:
        s = gen_markov_ar(params, total, seed=seed, stream=stream).samples
    if d >= 0:
        x1, x2 = s[d:d + n], s[:n]
    else:
        x1, x2 = s[:n], s[-d:-d + n]
    if noise_var > 0:
        rng = make_rng(seed, stream + 1)
        x1 = x1 + math.sqrt(noise_var) * rng.standard_normal(n)
        x2 = x2 + math.sqrt(noise_var) * rng.standard_normal(n)
    return TimeSeries(x1), TimeSeries(x2)


# --------------------------------------------------------------------------
# filtering


def ma_filter(x, n_taps: int) -> TimeSeries:
    """Unit-tap moving sum ``Y_i = sum_{j<n_taps} X_{i-j}``, valid region only."""
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    samples = as_samples(x)
    if samples.size < n_taps:
        raise ValueError(f"input of length {samples.size} is shorter than n_taps={n_taps}")
    y = np.convolve(samples, np.ones(n_taps), mode="valid")
    if isinstance(x, TimeSeries):
        return TimeSeries(y, dt=x.dt, origin=x.origin + (n_taps - 1) * x.dt)
    return TimeSeries(y)


def filter_cov(kernel: Kernel, h: Sequence[float], k: int) -> float:
    """Output autocovariance ``(h * h(-.) * C_x)(k)`` by direct double summation.

    ``C_y(k) = sum_i sum_m h(i) h(m) C_x(k - i + m)``.
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    idx = np.arange(h.size)
    lags = k - idx[:, None] + idx[None, :]
    c = np.asarray(kernel(lags), dtype=float)
    return float(h @ c @ h)


# --------------------------------------------------------------------------
# correlated pairs


@dataclass(frozen=True, eq=False)
class PairSpec:
    """``x1 = T1 u1 + K u2``, ``x2 = T2 u2`` with independent white ``u1, u2``."""

    t1: np.ndarray
    t2: np.ndarray
    k: np.ndarray
    sigma1_sq: float = 1.0
    sigma2_sq: float = 1.0

    def __post_init__(self):
        t1 = np.atleast_2d(np.asarray(self.t1, dtype=float))
        t2 = np.atleast_2d(np.asarray(self.t2, dtype=float))
        k = np.atleast_2d(np.asarray(self.k, dtype=float))
        n = t1.shape[1]
        if t2.shape[1] != n or k.shape[1] != n:
            raise ValueError(f"T1, T2 and K need a common column count, got {t1.shape}, {t2.shape}, {k.shape}")
        if k.shape[0] != t1.shape[0]:
            raise ValueError(f"K must have as many rows as T1, got {k.shape} vs {t1.shape}")
        if max(t1.shape[0], t2.shape[0]) > n:
            raise ValueError("max(N1, N2) must not exceed the driving-noise length N")
        if not (self.sigma1_sq >= 0 and self.sigma2_sq >= 0):
            raise ValueError("driving-noise variances must be >= 0")
        for name, arr in (("t1", t1), ("t2", t2), ("k", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n1(self) -> int:
        return self.t1.shape[0]

    @property
    def n2(self) -> int:
        return self.t2.shape[0]

    @property
    def n(self) -> int:
        return self.t1.shape[1]

    def c_x1(self) -> np.ndarray:
        return self.sigma1_sq * self.t1 @ self.t1.T + self.sigma2_sq * self.k @ self.k.T

    def c_x2(self) -> np.ndarray:
        return self.sigma2_sq * self.t2 @ self.t2.T

    def c_x1x2(self) -> np.ndarray:
        return self.sigma2_sq * self.k @ self.t2.T


def sample_pair(spec: PairSpec, n_draws: int, seed: int = 0, stream: int = 0):
    """``n_draws`` joint realizations; returns ``(X1, X2)`` of shapes ``(n_draws, N1)``, ``(n_draws, N2)``."""
    rng = make_rng(seed, stream)
    u1 = math.sqrt(spec.sigma1_sq) * rng.standard_normal((n_draws, spec.n))
    u2 = math.sqrt(spec.sigma2_sq) * rng.standard_normal((n_draws, spec.n))
    x1 = u1 @ spec.t1.T + u2 @ spec.k.T
    x2 = u2 @ spec.t2.T
    return x1, x2


def gen_correlated_pair(spec: PairSpec, seed: int = 0, stream: int = 0):
    x1, x2 = sample_pair(spec, 1, seed=seed, stream=stream)
    return TimeSeries(x1[0]), TimeSeries(x2[0])


def _pad_cols(a, n):
    out = np.zeros((a.shape[0], n))
    out[:, :a.shape[1]] = a
    return out


def solve_pair_spec(c_x1, c_x2, c_x1x2) -> PairSpec:
    """Construct a :class:`PairSpec` reproducing the three covariance blocks.

    ``T2`` factors ``C_x2``; ``K = C_x1x2 C_x2^{-1} T2`` so that
    ``K T2^T = C_x1x2``; ``T1`` factors the Schur complement
    ``C_x1 - K K^T``.  Driving variances are 1.
    """
    c1 = _as_cov(c_x1)
    c2 = _as_cov(c_x2)
    c12 = np.atleast_2d(np.asarray(c_x1x2, dtype=float))
    if c12.shape != (c1.dim, c2.dim):
        raise ValueError(f"cross block must be {c1.dim}x{c2.dim}, got {c12.shape}")
    t2 = c2.factor
    try:
        k = (t2.T @ solve(c2.entries, c12.T, assume_a="sym")).T
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"C_x2 is not invertible: {exc}") from exc
    schur = c1.entries - k @ k.T
    schur = 0.5 * (schur + schur.T)
    lam = np.linalg.eigvalsh(schur)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(c1.entries))))
    if lam[0] < -PSD_CLIP_TOL * scale:
        raise InfeasibleSpecError(
            f"cross-covariance too strong: C_x1 - K K^T has eigenvalue {lam[0]:.3e}",
            min_eigenvalue=float(lam[0]),
            max_eigenvalue=scale,
        )
    lam_c, u = eigh(schur)
    t1 = u * np.sqrt(np.clip(lam_c, 0.0, None))
    n = max(c1.dim, c2.dim)
    return PairSpec(_pad_cols(t1, n), _pad_cols(t2, n), _pad_cols(k, n))
