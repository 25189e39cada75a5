"""Low-level numerical helpers: log-scale minimization, monotone bisection,
improper quadrature, series summation and seed mixing."""

from __future__ import annotations

import math
import warnings
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .exceptions import NumericError

_LOG_MIN = -700.0
_LOG_MAX = 700.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MASK64 = (1 << 64) - 1


class Integral(NamedTuple):
    """Result of an adaptive quadrature."""

    value: float
    error: float
    converged: bool


def golden_min(fn: Callable[[float], float], a: float, b: float,
               tol: float = 1e-10, maxiter: int = 200) -> tuple[float, float]:
    """Golden-section search for a minimum of ``fn`` on ``[a, b]``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def log_infimum(objective: Callable[[np.ndarray], np.ndarray], lo: float = 1e-12,
                hi: float = 1e3, n_grid: int = 64, n_starts: int = 3) -> tuple[float, float]:
    """Approximate ``inf_{lo <= s <= hi} objective(s)``.

    The objective must accept a 1-D array. A log-spaced grid seeds several
    golden-section refinements in ``log s``; the best point found is returned
    as ``(s, value)``.
    """
    grid = np.geomspace(lo, hi, n_grid)
    with np.errstate(all="ignore"):
        vals = np.asarray(objective(grid), dtype=float)
    vals = np.where(np.isnan(vals), np.inf, vals)
    if not np.isfinite(vals).any():
        raise NumericError("objective is non-finite on the whole search grid")
    logs = np.log(grid)
    interior = [i for i in range(n_grid)
                if vals[i] <= vals[max(i - 1, 0)] and vals[i] <= vals[min(i + 1, n_grid - 1)]]
    interior.sort(key=lambda i: vals[i])
    best_i = int(np.argmin(vals))
    best = (float(grid[best_i]), float(vals[best_i]))

    def scalar(u: float) -> float:
        with np.errstate(all="ignore"):
            v = float(np.asarray(objective(np.array([math.exp(u)])))[0])
        return math.inf if math.isnan(v) else v

    for i in interior[:n_starts]:
        a = logs[max(i - 1, 0)]
        b = logs[min(i + 1, n_grid - 1)]
        u, v = golden_min(scalar, a, b)
        if v < best[1]:
            best = (math.exp(u), v)
    return best


def monotone_inverse(fn: Callable[[float], float], t: float, rtol: float = 1e-10) -> float:
    """``inf{s > 0 : fn(s) <= t}`` for a non-increasing ``fn``.

    Returns ``0.0`` when the level set is everything representable and
    ``math.inf`` when it is empty.
    """
    lo, hi = _LOG_MIN, _LOG_MAX
    if fn(math.exp(lo)) <= t:
        return 0.0
    if not fn(math.exp(hi)) <= t:
        return math.inf
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if fn(math.exp(mid)) <= t:
            hi = mid
        else:
            lo = mid
    return math.exp(hi)


def _quad_piece(g: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, a, b, limit=200, epsabs=0.0, epsrel=1e-11)
    return float(val), float(err)


def _doubling(g: Callable[[float], float], start: float, direction: float,
              rtol: float, max_doublings: int, limit: float) -> Integral:
    acc, err_acc = 0.0, 0.0
    width = 1.0
    v = start
    zero_run = 0
    for _ in range(max_doublings):
        nxt = v + direction * width
        if direction > 0 and nxt > limit:
            nxt = limit
        if direction < 0 and nxt < limit:
            nxt = limit
        a, b = (v, nxt) if direction > 0 else (nxt, v)
        val, err = _quad_piece(g, a, b)
        if not math.isfinite(val):
            return Integral(math.inf, math.inf, False)
        acc += val
        err_acc += err
        if val == 0.0:
            zero_run += 1
            if zero_run >= 3 or acc > 0.0:
                return Integral(acc, err_acc, True)
        else:
            zero_run = 0
            if abs(val) < rtol * abs(acc):
                return Integral(acc, err_acc, True)
        if nxt == limit:
            return Integral(acc, err_acc, False)
        v = nxt
        width *= 2.0
    return Integral(acc, err_acc, False)


def half_line_integral(fn: Callable[[float], float], lower: float = 0.0,
                       rtol: float = 1e-14, max_doublings: int = 60) -> Integral:
    """Integrate a nonnegative ``fn`` over ``[lower, inf)``.

    Uses ``u = e^v`` and quadrature on intervals in ``v`` whose length doubles,
    stopping once an increment is below ``rtol`` times the running total. When
    ``lower`` is zero the part on ``(0, 1]`` is handled the same way toward
    ``v = -inf``. A non-converged result is returned with ``converged=False``
    and an infinite value; callers decide how to report it.
    """

    def g(v: float) -> float:
        u = math.exp(v)
        y = fn(u)
        return y * u if y != 0.0 else 0.0

    if lower < 0:
        raise ValueError("lower must be nonnegative")
    if lower == 0.0:
        left = _doubling(g, 0.0, -1.0, rtol, max_doublings, -745.0)
        right = _doubling(g, 0.0, 1.0, rtol, max_doublings, 709.0)
        ok = left.converged and right.converged
        val = left.value + right.value
        return Integral(val if ok else math.inf, left.error + right.error, ok)
    res = _doubling(g, math.log(lower), 1.0, rtol, max_doublings, 709.0)
    if not res.converged:
        return Integral(math.inf, res.error, False)
    return res


def sum_series(term: Callable[[int], float], start: int = 0, max_index: int = 200,
               rtol: float = 1e-15) -> tuple[float, int, bool]:
    """Sum ``term(i)`` for ``i >= start`` until a term is below ``rtol`` times the sum.

    Returns ``(sum, last_index, converged)``.
    """
    total = 0.0
    prev = math.inf
    converged = False
    i = start
    for i in range(start, max_index + 1):
        x = term(i)
        if not math.isfinite(x):
            return math.inf, i, False
        total += x
        if x < rtol * total or (x == 0.0 and prev == 0.0):
            converged = True
            break
        prev = x
    return total, i, converged


def splitmix64(seed: int, stream: int = 0) -> int:
    """Mix ``seed`` and a stream index into a 64-bit integer (splitmix64 finalizer)."""
    z = (int(seed) + (int(stream) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def batch_means_se(values: np.ndarray, n_batches: int = 50) -> float:
    """Standard error of the mean of a correlated chain by non-overlapping batch means."""
    x = np.asarray(values, dtype=float)
    m = len(x) // n_batches
    if m < 1:
        return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    means = x[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
