"""Bessel functions of the first kind for integer order.

Power series below ``x = 6``; above it, Miller's downward recurrence
normalized with the sum rule ``J_0 + 2 * sum_k J_{2k} = 1``.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import BesselRangeError

MAX_ORDER = 60
MAX_ARGUMENT = 60.0
SERIES_LIMIT = 6.0

# Internal envelope used by zero finding, wider than the public one.
_INTERNAL_MAX_ORDER = 80
_INTERNAL_MAX_ARGUMENT = 220.0


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    term = 1.0
    for k in range(1, n + 1):
        term *= half / k
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + n))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > half:
            break
        if term == 0.0:
            break
    return total


def _miller(n: int, x: float) -> float:
    # Start well above both n and x so the seed error decays below 1e-16.
    start = int(max(n, x) + 30 + 3 * math.sqrt(max(n, x)))
    start += start % 2
    j_next, j_cur = 0.0, 1e-300
    total = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        j_prev = 2.0 * k / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if k - 1 == n:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            total += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            result *= 1e-250
            total *= 1e-250
    total += j_cur  # J_0 term
    return result / total


def _besselj_scalar(n: int, x: float) -> float:
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if x < 0.0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return sign * (1.0 if n == 0 else 0.0)
    value = _series(n, x) if x < SERIES_LIMIT else _miller(n, x)
    return sign * value


def _check(n, x, max_order, max_argument):
    if abs(n) > max_order:
        raise BesselRangeError(f"order {n} outside |n| <= {max_order}")
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > max_argument):
        raise BesselRangeError(f"argument outside |x| <= {max_argument}")


def besselj(n: int, x):
    """Bessel function of the first kind ``J_n(x)`` for integer ``n``.

    Absolute accuracy is ``1e-12`` on ``|n| <= 60``, ``|x| <= 60``.
    Negative orders and arguments use ``J_{-n}(x) = (-1)^n J_n(x)`` and
    ``J_n(-x) = (-1)^n J_n(x)``.

    Parameters
    ----------
    n : int
    x : float or array_like

    Returns
    -------
    float or ndarray
        Same shape as ``x``.
    """
    n = int(n)
    _check(n, x, MAX_ORDER, MAX_ARGUMENT)
    return _evaluate(n, x)


def _besselj_wide(n: int, x):
    """``besselj`` on the wider internal envelope used by zero finding."""
    n = int(n)
    _check(n, x, _INTERNAL_MAX_ORDER, _INTERNAL_MAX_ARGUMENT)
    return _evaluate(n, x)


def _evaluate(n, x):
    if np.ndim(x) == 0:
        return _besselj_scalar(n, float(x))
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    for idx, value in np.ndenumerate(arr):
        out[idx] = _besselj_scalar(n, float(value))
    return out
