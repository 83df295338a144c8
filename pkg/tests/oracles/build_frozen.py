"""Regenerate ``frozen.json``: reference values computed independently of the package.

Every value here comes from a method the package does not use: bisection or
mpmath for special functions, exact rational arithmetic, or brute-force
summation.  Run from the repository root::

    python3 tests/oracles/build_frozen.py
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
HERE = Path(__file__).resolve().parent


def wm1_bisection(x: float) -> float:
    """W_{-1}(x) by bisection on w e^w = x over [-50, -1] (w e^w is decreasing there)."""
    lo, hi = mp.mpf(-50), mp.mpf(-1)
    x = mp.mpf(x)
    for _ in range(300):
        mid = (lo + hi) / 2
        if mid * mp.e**mid > x:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def gamma_values():
    pts = [0.1, 0.5, 1.0, 1.5, 2.5, 5.0, 7.3, 12.0, 29.5, 30.0]
    return {repr(p): float(mp.gamma(p)) for p in pts}


def abs_normal_moments():
    """E|U|^m by quadrature of the normal density."""
    out = {}
    for m in range(1, 7):
        val = 2 * mp.quad(lambda u: u**m * mp.exp(-u * u / 2), [0, mp.inf]) / mp.sqrt(2 * mp.pi)
        out[str(m)] = float(val)
    return out


def ar2_impulse_autocov(alpha: float, sigma2: float, lags, terms: int = 4000):
    """Autocovariance of x(n) = 2a x(n-1) - a^2 x(n-2) + b u(n) by summing the impulse response.

    The impulse response of 1/(1 - a z^-1)^2 is h_j = (j + 1) a^j; ``b`` is set
    numerically so the lag-0 sum equals ``sigma2``.
    """
    a = mp.e ** (-mp.mpf(alpha))
    h = [(j + 1) * a**j for j in range(terms)]
    g0 = mp.fsum(v * v for v in h)
    scale = mp.mpf(sigma2) / g0
    return {str(k): float(scale * mp.fsum(h[j] * h[j + k] for j in range(terms - k))) for k in lags}


def markov2_grand_sum(alpha: float, sigma2: float, n: int) -> float:
    """Sum of all entries of the n x n 2MP Toeplitz matrix by a double loop."""
    a = mp.mpf(alpha)
    total = mp.mpf(0)
    for i in range(n):
        for j in range(n):
            k = abs(i - j)
            total += sigma2 * mp.e ** (-a * k) * (1 + a * k)
    return float(total)


def ma_cov_direct(alpha: float, sigma2: float, n_taps: int, k: int) -> float:
    """Covariance of a unit-tap moving sum of a 1MP by summing over all tap pairs."""
    a = mp.mpf(alpha)
    return float(mp.fsum(sigma2 * mp.e ** (-a * abs(k - i + j)) for i in range(n_taps) for j in range(n_taps)))


def split_line_exact(xs, ys, n_lower):
    """Two-subset split LS on sorted data in exact rationals."""
    pts = sorted(zip(xs, ys))
    lo, hi = pts[:n_lower], pts[n_lower:]
    x1 = sum(Fraction(p[0]) for p in lo) / len(lo)
    x2 = sum(Fraction(p[0]) for p in hi) / len(hi)
    y1 = sum(Fraction(p[1]) for p in lo) / len(lo)
    y2 = sum(Fraction(p[1]) for p in hi) / len(hi)
    slope = (y2 - y1) / (x2 - x1)
    return [float(y1 - slope * x1), float(slope)]


def toeplitz_min_eig(alpha: float, n: int) -> float:
    a = mp.mpf(alpha)
    m = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            k = abs(i - j)
            m[i, j] = mp.e ** (-a * k) * (1 + a * k)
    return float(min(mp.eigsy(m)[0]))


def main():
    frozen = {
        "lambert_wm1": {
            "-0.2": wm1_bisection(-0.2),
            "-1e-06": wm1_bisection(-1e-6),
            "-0.3": wm1_bisection(-0.3),
            "-0.36": wm1_bisection(-0.36),
            "-0.01": wm1_bisection(-0.01),
        },
        "gamma": gamma_values(),
        "abs_normal_moment": abs_normal_moments(),
        "ar2_double_pole_autocov_alpha0.3": ar2_impulse_autocov(0.3, 1.0, range(6)),
        "markov2_grand_sum": {
            f"{a}_{n}": markov2_grand_sum(a, 1.0, n) for a in (0.2, 0.5, 0.8) for n in (1, 2, 5, 17, 40)
        },
        "ma_cov_direct": {
            f"{a}_{n}_{k}": ma_cov_direct(a, 1.0, n, k)
            for a in (0.1, 0.5, 2.0) for n in (1, 3, 8) for k in (0, 1, 5, 20)
        },
        "split_line": {
            "xs": [3, 1, 4, 1.5, 9, 2.5, 6, 5],
            "ys": [2.0, 0.5, 3.25, 1.0, 7.5, 1.75, 4.0, 3.5],
            "n_lower": 4,
        },
        "toeplitz_2mp_alpha0.3_n8_min_eig": toeplitz_min_eig(0.3, 8),
    }
    sl = frozen["split_line"]
    sl["estimates"] = split_line_exact(sl["xs"], sl["ys"], sl["n_lower"])
    (HERE / "frozen.json").write_text(json.dumps(frozen, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
