"""Scalar special functions: lower real branch of Lambert W and Gamma."""

import math

from .errors import ConvergenceError, DomainError

_INV_E = math.exp(-1.0)
_EPS = 2.220446049250313e-16
_MAX_ITER = 50

# Lanczos approximation, g = 7, n = 9.  Coefficient set as tabulated by
# Godfrey (also reproduced in Press et al., Numerical Recipes 3rd ed., 6.1);
# relative error below 2e-15 for Re(z) > 0.5.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _wm1_initial_guess(x):
    if x < -0.25:
        # series about the branch point in p = -sqrt(2(ex + 1))
        p = -math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    l1 = math.log(-x)
    l2 = math.log(-l1)
    return l1 - l2 + l2 / l1


def lambert_w_m1(x):
    """Lower real branch W_{-1}(x) of the Lambert function.

    Solves ``w * exp(w) = x`` for ``w <= -1`` on ``-1/e <= x < 0``.

    Parameters
    ----------
    x : float
        Argument in ``[-1/e, 0)``.

    Returns
    -------
    float
        The branch value, ``<= -1``.

    Raises
    ------
    DomainError
        If ``x`` lies outside ``[-1/e, 0)``.
    ConvergenceError
        If Halley iteration does not settle within 50 steps.
    """
    x = float(x)
    if not (-_INV_E <= x < 0.0):
        raise DomainError(f"lambert_w_m1 is real only on [-1/e, 0), got {x!r}")
    if x == -_INV_E:
        return -1.0

    w = _wm1_initial_guess(x)
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= _EPS * abs(x):
            # residual at rounding level; further steps only cycle in the last bits
            return w
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - dw
        if w_new > -1.0:
            # stay on the lower branch
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 4.0 * _EPS * abs(w_new):
            return w_new
        w = w_new
    raise ConvergenceError(f"lambert_w_m1 did not converge for x={x!r}")


def gamma_fn(x):
    """Gamma function for positive real arguments.

    Lanczos series for ``x >= 0.5``, reflection formula below.
    """
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"gamma_fn needs a finite x > 0, got {x!r}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (z + 0.5) * math.exp(-t) * acc
