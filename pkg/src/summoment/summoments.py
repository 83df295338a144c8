"""Sum-moments: moments of the centred component sum of random vectors.

For an ensemble ``X`` (realizations x N) with per-coordinate means ``mu``
the m-th central sum-moment is ``E|sum_i (X_i - mu_i)|^m``.  The absolute
value is applied for every order, odd or even.  For several blocks the
sum runs over the concatenation of all blocks.

Means are taken as supplied; when omitted they are estimated per coordinate
from the ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .errors import NotPositiveSemidefiniteError, SpecValidationError
from .moments import gaussian_abs_moment, mean_and_stderr
from .processes import CovMatrix, Markov2Kernel, _as_cov, as_samples, sample_gaussian


@dataclass(frozen=True, eq=False)
class PolySpec:
    """Polynomial ``sum_l coeffs[l] x^l`` with a declared degree."""

    coeffs: np.ndarray
    degree: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.size != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs):
        c = np.asarray(coeffs, dtype=float).reshape(-1)
        return cls(c, c.size - 1)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def derivative(self, order: int = 1) -> "PolySpec":
        c = np.polynomial.polynomial.polyder(self.coeffs, order) if self.degree >= order else np.zeros(1)
        return PolySpec.from_coeffs(c)


def _ensemble(x) -> np.ndarray:
    a = np.asarray(as_samples(x), dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise ValueError("ensemble must be a non-empty 2-D array (realizations x dimension)")
    return a


def _centre(a, means):
    if means is None:
        return a - a.mean(axis=0)
    means = np.asarray(means, dtype=float)
    if means.ndim == 0:
        means = np.full(a.shape[1], float(means))
    if means.shape != (a.shape[1],):
        raise ValueError(f"means must have length {a.shape[1]}, got shape {means.shape}")
    return a - means


def sum_deviations(x, means=None) -> np.ndarray:
    """Per-realization centred sums ``sum_i (X_i - mu_i)``."""
    return _centre(_ensemble(x), means).sum(axis=1)


def poly_field_eval(x, means, poly: PolySpec):
    """``Y = sum_l p_l (sum_i (x_i - mu_i))^l``; vectorized over rows of ``x``."""
    x = np.asarray(as_samples(x), dtype=float)
    means = np.asarray(means, dtype=float)
    if x.shape[-1] != means.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {means.shape[-1]}")
    s = np.sum(x - means, axis=-1)
    y = poly(s)
    return float(y) if np.ndim(y) == 0 else y


def z_stat(x, means, a: float):
    """``Z(a) = (1/a) sum_i (x_i - mu_i)``; ``a = N`` gives the centred average."""
    if a == 0:
        raise ValueError("normalizer a must be nonzero")
    x = np.asarray(as_samples(x), dtype=float)
    means = np.asarray(means, dtype=float)
    if x.shape[-1] != means.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {means.shape[-1]}")
    z = np.sum(x - means, axis=-1) / a
    return float(z) if np.ndim(z) == 0 else z


def central_summoment(x, m: int, means=None) -> float:
    """m-th central sum-moment ``E|sum_i (X_i - mu_i)|^m`` of one ensemble."""
    _check_order(m)
    s = sum_deviations(x, means)
    return float(np.mean(np.abs(s) ** m))


def central_summoment_multi(blocks: Sequence, m: int, means: Sequence | None = None) -> float:
    """Central sum-moment of several blocks observed jointly (same row count).

    Equivalent to :func:`central_summoment` on the column-concatenated blocks.
    """
    _check_order(m)
    if len(blocks) == 0:
        raise ValueError("need at least one block")
    arrays = [_ensemble(b) for b in blocks]
    rows = {a.shape[0] for a in arrays}
    if len(rows) != 1:
        raise ValueError(f"blocks need the same number of realizations, got {sorted(rows)}")
    if means is None:
        means = [None] * len(arrays)
    if len(means) != len(arrays):
        raise ValueError("one means vector per block")
    s = sum(_centre(a, mu).sum(axis=1) for a, mu in zip(arrays, means))
    return float(np.mean(np.abs(s) ** m))


def summoment2_from_cov(cov) -> float:
    """Grand sum of a covariance matrix: the second central sum-moment."""
    entries = cov.entries if isinstance(cov, CovMatrix) else np.asarray(cov, dtype=float)
    return float(np.sum(entries))


def summoment2_markov2(alpha: float, sigma2: float, n: int) -> float:
    """Closed-form second central sum-moment of an ``n``-sample 2MP vector.

    ``sigma2 (n + 2 sum_{i=1}^{n-1} i (1 + (n-i) alpha) exp(-alpha (n-i)))``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    i = np.arange(1, n)
    return float(sigma2 * (n + 2.0 * np.sum(i * (1.0 + (n - i) * alpha) * np.exp(-alpha * (n - i)))))


def markov2_toeplitz_summoment2(alpha: float, sigma2: float, n: int) -> float:
    """Grand sum of the ``n x n`` 2MP Toeplitz matrix, by direct summation."""
    k = np.arange(n)
    kern = Markov2Kernel(alpha, sigma2)
    return float(n * kern(0) + 2.0 * np.sum((n - k[1:]) * kern(k[1:])))


def gaussian_summoment_closed(cov, m: int) -> float:
    """``||1^T T||_2^m E|U|^m`` for a zero-mean Gaussian vector with covariance ``T T^T``."""
    _check_order(m)
    cov = _as_cov(cov)
    s = np.linalg.norm(np.ones(cov.dim) @ cov.factor)
    return float(s**m * gaussian_abs_moment(m))


def summoment_l1(x, m: int, centered: bool = False, means=None) -> float:
    """``E (sum_i |X_i|)^m``; with ``centered`` the coordinates are centred first."""
    _check_order(m)
    a = _ensemble(x)
    if centered:
        a = _centre(a, means)
    return float(np.mean(np.sum(np.abs(a), axis=1) ** m))


def scaled_minkowski_moment(x, m: int) -> float:
    """``sum_i E|sqrt(N) X_i|^m`` for an ensemble of ``N``-vectors."""
    _check_order(m)
    a = _ensemble(x)
    n = a.shape[1]
    return float(np.sum(np.mean(np.abs(math.sqrt(n) * a) ** m, axis=0)))


def mgf_estimate(x, a: float, s: float, means=None) -> float:
    """Ensemble average of ``exp(s Z(a))``.

    Raises ``OverflowError`` naming the first realization whose term is not
    finite.
    """
    if a == 0:
        raise ValueError("normalizer a must be nonzero")
    z = sum_deviations(x, means) / a
    with np.errstate(over="ignore"):
        terms = np.exp(s * z)
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        raise OverflowError(f"exp(s Z) overflowed at trial index {int(bad[0])} (Z={z[bad[0]]:.6g})")
    return float(np.mean(terms))


def _compositions(m, n):
    """All ``n``-part weak compositions of ``m`` in lexicographic order."""
    for bars in combinations_with_replacement(range(n), m):
        counts = [0] * n
        for b in bars:
            counts[b] += 1
        yield tuple(counts)


def multinomial_expand_check(x, m: int):
    """``((sum x)^m, sum_{|n|=m} m!/n! x^n)`` by explicit composition enumeration."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size > 6 or m > 6:
        raise ValueError("multinomial_expand_check is limited to dimension <= 6 and m <= 6")
    _check_order(m)
    lhs = float(np.sum(x) ** m)
    rhs = 0.0
    fm = math.factorial(m)
    comps = sorted(_compositions(m, x.size), reverse=True)
    for n in comps:
        coef = fm
        for ni in n:
            coef //= math.factorial(ni)
        rhs += coef * float(np.prod(x ** np.asarray(n)))
    return lhs, rhs


def convex_poly_from_psd(q, q0: float = 0.0, q1: float = 0.0) -> PolySpec:
    """Degree-2m convex polynomial from an ``m x m`` PSD matrix.

    The second derivative is ``v^T Q v`` with ``v = (1, x, ..., x^{m-1})``,
    i.e. ``sum_i p_i x^i`` with ``p_i`` the anti-diagonal sums of ``Q``;
    integrating twice gives ``q0 + q1 x + sum_i p_i x^{i+2} / ((i+1)(i+2))``.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if q.shape[0] != q.shape[1]:
        raise ValueError(f"Q must be square, got {q.shape}")
    lam = np.linalg.eigvalsh(0.5 * (q + q.T))
    if np.max(np.abs(q - q.T)) > 1e-12 * max(1.0, np.max(np.abs(q))) or \
            lam[0] < -1e-8 * max(np.max(np.abs(lam)), 0.0):
        raise NotPositiveSemidefiniteError("Q must be symmetric positive semi-definite",
                                           min_eigenvalue=float(lam[0]))
    m = q.shape[0]
    coeffs = np.zeros(2 * m + 1)
    coeffs[0] = q0
    coeffs[1] = q1
    for i in range(2 * m - 1):
        p_i = sum(q[k, i - k] for k in range(max(0, i - m + 1), min(i, m - 1) + 1))
        coeffs[i + 2] = p_i / ((i + 1) * (i + 2))
    return PolySpec(coeffs, 2 * m)


def _check_order(m):
    if int(m) != m or m < 1:
        raise ValueError(f"moment order must be a positive integer, got {m}")


REQUEST_KINDS = ("central", "l1", "gaussian")


@dataclass(frozen=True, eq=False)
class SumMomentRequest:
    """A sum-moment query, JSON-serializable.

    ``kind="central"`` and ``kind="l1"`` take ``blocks`` as ensembles
    (realizations x block length, equal row counts).  ``kind="gaussian"``
    takes ``blocks`` as a single covariance matrix and compares the closed
    form against ``trials`` Monte Carlo draws seeded by ``seed``.
    """

    kind: str
    m: int
    blocks: tuple
    means: tuple | None = None
    trials: int = 0
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "SumMomentRequest":
        if not isinstance(doc, dict):
            raise SpecValidationError("<root>", "request must be a JSON object")
        doc = dict(doc)
        doc.pop("schema_version", None)
        unknown = sorted(set(doc) - {"kind", "m", "blocks", "means", "trials", "seed"})
        if unknown:
            raise SpecValidationError(unknown[0], "unknown field")
        for key in ("kind", "m", "blocks"):
            if key not in doc:
                raise SpecValidationError(key, "required field missing")
        kind = doc["kind"]
        if kind not in REQUEST_KINDS:
            raise SpecValidationError("kind", f"must be one of {REQUEST_KINDS}, got {kind!r}")
        m = doc["m"]
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise SpecValidationError("m", f"must be a positive integer, got {m!r}")
        raw = doc["blocks"]
        if not isinstance(raw, list) or not raw:
            raise SpecValidationError("blocks", "must be a non-empty list of 2-D arrays")
        blocks = []
        for i, b in enumerate(raw):
            try:
                arr = np.asarray(b, dtype=float)
            except (TypeError, ValueError):
                raise SpecValidationError(f"blocks[{i}]", "must be a rectangular numeric array") from None
            if arr.ndim != 2 or arr.size == 0 or not np.all(np.isfinite(arr)):
                raise SpecValidationError(f"blocks[{i}]", "must be a non-empty finite 2-D array")
            blocks.append(arr)
        means = doc.get("means")
        if means is not None:
            if not isinstance(means, list) or len(means) != len(blocks):
                raise SpecValidationError("means", "need one means vector per block")
            means = tuple(np.asarray(mu, dtype=float) for mu in means)
            for i, (mu, b) in enumerate(zip(means, blocks)):
                if mu.shape != (b.shape[1],):
                    raise SpecValidationError(f"means[{i}]", f"must have length {b.shape[1]}")
        trials = doc.get("trials", 0)
        seed = doc.get("seed", 0)
        for key, val in (("trials", trials), ("seed", seed)):
            if isinstance(val, bool) or not isinstance(val, int) or val < 0:
                raise SpecValidationError(key, f"must be a non-negative integer, got {val!r}")
        if kind == "gaussian":
            if len(blocks) != 1 or blocks[0].shape[0] != blocks[0].shape[1]:
                raise SpecValidationError("blocks", "gaussian kind takes exactly one square covariance matrix")
            if trials < 2:
                raise SpecValidationError("trials", "gaussian kind needs trials >= 2")
        elif len({b.shape[0] for b in blocks}) != 1:
            raise SpecValidationError("blocks", "blocks need the same number of realizations")
        return cls(kind, m, tuple(blocks), means, trials, seed)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "m": self.m, "blocks": [b.tolist() for b in self.blocks],
               "trials": self.trials, "seed": self.seed}
        if self.means is not None:
            out["means"] = [mu.tolist() for mu in self.means]
        return out


def evaluate_request(req: SumMomentRequest) -> tuple[dict, dict]:
    """``(result, stderr)`` dictionaries for a :class:`SumMomentRequest`."""
    m = req.m
    if req.kind == "gaussian":
        cov = _as_cov(req.blocks[0])
        x = sample_gaussian(cov, req.trials, seed=req.seed)
        mc, se = mean_and_stderr(np.abs(x.sum(axis=1)) ** m)
        return ({"closed_form": gaussian_summoment_closed(cov, m), "monte_carlo": mc,
                 "grand_sum": summoment2_from_cov(cov)}, {"monte_carlo": se})
    if req.kind == "central":
        means = list(req.means) if req.means is not None else None
        s = sum(_centre(b, None if means is None else means[i]).sum(axis=1) for i, b in enumerate(req.blocks))
        value = central_summoment_multi(list(req.blocks), m, means)
        _, se = mean_and_stderr(np.abs(s) ** m)
        return {"value": value}, {"value": se}
    joined = np.concatenate(req.blocks, axis=1)
    means = np.concatenate(req.means) if req.means is not None else None
    value = summoment_l1(joined, m, centered=means is not None, means=means)
    base = _centre(joined, means) if means is not None else joined
    _, se = mean_and_stderr(np.sum(np.abs(base), axis=1) ** m)
    return {"value": value}, {"value": se}
