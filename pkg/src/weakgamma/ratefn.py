"""Monotone rate functions and the transforms between decay rates and weak
inequality profiles.

A rate function is a non-increasing, nonnegative map on ``(0, inf)``. Every
profile handled by the package (``beta``, ``beta_wp``, ``xi``, ``eta``,
concentration tails) is represented this way. Infinite values are allowed
internally and surface as ``math.inf`` from :meth:`RateFunction.inverse`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, NamedTuple

import numpy as np

from ._numerics import half_line_integral, log_infimum, monotone_inverse, sum_series
from .exceptions import DomainError, NumericError

log = logging.getLogger(__name__)

_PROBE = np.geomspace(1e-8, 1e8, 256)
_TINY = 1e-300


class RateFunction:
    """Base class. Subclasses implement :meth:`raw` and optionally :meth:`inverse`."""

    family: ClassVar[str] = "abstract"

    def raw(self, s: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; may return ``inf`` but never ``nan``."""
        raise NotImplementedError

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError("rate functions are defined for s > 0 only")
        with np.errstate(all="ignore"):
            y = self.raw(arr)
        if not np.all(np.isfinite(y)):
            raise DomainError("evaluation is not finite at the requested point")
        return float(y) if np.ndim(y) == 0 else y

    def value(self, s: float) -> float:
        """Scalar evaluation that allows ``inf``."""
        with np.errstate(all="ignore"):
            return float(np.asarray(self.raw(np.array([float(s)])))[0])

    def inverse(self, t: float) -> float:
        """Generalized inverse ``inf{s > 0 : f(s) <= t}``."""
        return monotone_inverse(self.value, t)

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} is not serializable")

    def _validate(self) -> None:
        with np.errstate(all="ignore"):
            y = np.asarray(self.raw(_PROBE), dtype=float)
        if np.isnan(y).any():
            raise DomainError(f"{self.family}: evaluation produced nan")
        if (y < 0).any():
            raise DomainError(f"{self.family}: negative values")
        prev, nxt = y[:-1], y[1:]
        with np.errstate(all="ignore"):
            bad = (nxt > prev * (1 + 1e-9) + 1e-300) & ~np.isinf(prev)
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainError(
                f"{self.family}: not non-increasing near s={_PROBE[i]:.3g} "
                f"({prev[i]:.6g} -> {nxt[i]:.6g})")


def generalized_inverse(f: RateFunction, t: float) -> float:
    """``inf{s > 0 : f(s) <= t}``; ``0`` if the level set is everything, ``inf`` if empty."""
    if not math.isfinite(t):
        raise DomainError("t must be finite")
    if t <= 0:
        raise DomainError("t must be positive")
    return f.inverse(t)


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class Constant(RateFunction):
    c: float
    family: ClassVar[str] = "constant"

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError("Constant needs a finite nonnegative value")

    def raw(self, s):
        return np.full_like(np.asarray(s, dtype=float), self.c)

    def inverse(self, t):
        return 0.0 if self.c <= t else math.inf

    def to_json(self):
        return {"family": self.family, "params": {"c": self.c}}


@dataclass(frozen=True)
class Power(RateFunction):
    """``s -> c * s**(-q)``."""

    c: float
    q: float
    family: ClassVar[str] = "power"

    def __post_init__(self):
        if not (self.c >= 0 and self.q >= 0 and math.isfinite(self.c) and math.isfinite(self.q)):
            raise DomainError("Power needs c >= 0 and q >= 0")

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return self.c * s ** (-self.q)

    def inverse(self, t):
        if self.c == 0:
            return 0.0
        if self.q == 0:
            return 0.0 if self.c <= t else math.inf
        return (self.c / t) ** (1.0 / self.q)

    def to_json(self):
        return {"family": self.family, "params": {"c": self.c, "q": self.q}}


@dataclass(frozen=True)
class ExpPower(RateFunction):
    """``s -> c * exp(delta / s**q)``; monotone when ``delta * q >= 0``."""

    c: float
    delta: float
    q: float
    family: ClassVar[str] = "exp_power"

    def __post_init__(self):
        if not self.c >= 0:
            raise DomainError("ExpPower needs c >= 0")
        if self.delta * self.q < 0:
            raise DomainError("ExpPower is increasing when delta and q have opposite signs")
        self._validate()

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return self.c * np.exp(self.delta * s ** (-self.q))

    def inverse(self, t):
        if self.c == 0:
            return 0.0
        if self.delta == 0 or self.q == 0:
            return 0.0 if self.c * math.exp(self.delta) <= t else math.inf
        level = math.log(t / self.c)
        if self.delta > 0:
            if level <= 0:
                return math.inf
            return (self.delta / level) ** (1.0 / self.q)
        if level >= 0:
            return 0.0
        return (level / self.delta) ** (1.0 / -self.q)

    def to_json(self):
        return {"family": self.family, "params": {"c": self.c, "delta": self.delta, "q": self.q}}


@dataclass(frozen=True)
class LogPower(RateFunction):
    """``s -> d0 + d * log(1 + 1/s)**r``."""

    d0: float
    d: float
    r: float
    family: ClassVar[str] = "log_power"

    def __post_init__(self):
        if min(self.d0, self.d, self.r) < 0:
            raise DomainError("LogPower needs nonnegative parameters")

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return self.d0 + self.d * np.log1p(1.0 / s) ** self.r

    def inverse(self, t):
        if self.d == 0 or self.r == 0:
            return 0.0 if self.d0 + self.d <= t else math.inf
        if t <= self.d0:
            return math.inf
        level = ((t - self.d0) / self.d) ** (1.0 / self.r)
        return 1.0 / math.expm1(level) if level < 700 else 0.0

    def to_json(self):
        return {"family": self.family, "params": {"d0": self.d0, "d": self.d, "r": self.r}}


@dataclass(frozen=True)
class ZeroBeyond(RateFunction):
    """``inner(s)`` for ``s < s0`` and ``0`` for ``s >= s0``."""

    inner: RateFunction
    s0: float
    family: ClassVar[str] = "zero_beyond"

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError("ZeroBeyond needs s0 > 0")

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(s < self.s0, self.inner.raw(s), 0.0)

    def inverse(self, t):
        return min(self.inner.inverse(t), self.s0)

    def to_json(self):
        return {"family": self.family, "params": {"inner": self.inner.to_json(), "s0": self.s0}}


@dataclass(frozen=True)
class PointwiseMin(RateFunction):
    a: RateFunction
    b: RateFunction
    family: ClassVar[str] = "min"

    def raw(self, s):
        return np.minimum(self.a.raw(s), self.b.raw(s))

    def inverse(self, t):
        return min(self.a.inverse(t), self.b.inverse(t))

    def to_json(self):
        return {"family": self.family, "params": {"a": self.a.to_json(), "b": self.b.to_json()}}


def min_combine(a: RateFunction, b: RateFunction) -> PointwiseMin:
    return PointwiseMin(a, b)


@dataclass(frozen=True)
class Affine(RateFunction):
    """``s -> shift + scale * inner(arg_scale * s)``."""

    inner: RateFunction
    arg_scale: float = 1.0
    scale: float = 1.0
    shift: float = 0.0
    family: ClassVar[str] = "affine"

    def __post_init__(self):
        if not (self.arg_scale > 0 and self.scale >= 0 and self.shift >= 0):
            raise DomainError("Affine needs arg_scale > 0, scale >= 0, shift >= 0")

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(all="ignore"):
            inner = self.inner.raw(self.arg_scale * s)
            out = self.shift + np.where(inner == 0, 0.0, self.scale * inner)
        return out

    def inverse(self, t):
        if self.scale == 0:
            return 0.0 if self.shift <= t else math.inf
        rest = t - self.shift
        if rest > 0:
            return self.inner.inverse(rest / self.scale) / self.arg_scale
        return monotone_inverse(self.value, t)

    def to_json(self):
        return {"family": self.family,
                "params": {"inner": self.inner.to_json(), "arg_scale": self.arg_scale,
                           "scale": self.scale, "shift": self.shift}}


@dataclass(frozen=True)
class Product(RateFunction):
    a: RateFunction
    b: RateFunction
    family: ClassVar[str] = "product"

    def raw(self, s):
        x, y = self.a.raw(s), self.b.raw(s)
        with np.errstate(all="ignore"):
            return np.where((x == 0) | (y == 0), 0.0, x * y)

    def to_json(self):
        return {"family": self.family, "params": {"a": self.a.to_json(), "b": self.b.to_json()}}


@dataclass(frozen=True, eq=False)
class FunctionRate(RateFunction):
    """Wrap a callable. The callable should accept arrays; scalars are looped otherwise."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = "function"
    check: bool = True
    family: ClassVar[str] = "function"

    def __post_init__(self):
        if self.check:
            self._validate()

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        try:
            y = np.asarray(self.fn(s), dtype=float)
            if y.shape != s.shape:
                raise ValueError
        except (TypeError, ValueError):
            y = np.array([float(self.fn(float(x))) for x in s.ravel()]).reshape(s.shape)
        return y


@dataclass(frozen=True, eq=False)
class FromInverse(RateFunction):
    """The rate function whose generalized inverse is the non-increasing ``inv``.

    Evaluation solves ``inf{u > 0 : inv(u) <= s}`` by bisection (or calls
    ``forward`` when the caller knows it in closed form), while
    :meth:`inverse` returns ``inv`` directly. This is how a tail profile such
    as ``u -> mu(|Hess^{-1} V| >= u)`` becomes a ``beta``.
    """

    inv: Callable[[float], float]
    label: str = "from_inverse"
    forward: Callable[[float], float] | None = None
    family: ClassVar[str] = "from_inverse"

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        fwd = self.forward or (lambda x: monotone_inverse(self.inv, x))
        out = np.array([fwd(float(x)) for x in s.ravel()])
        return out.reshape(s.shape)

    def inverse(self, t):
        return float(self.inv(t))


@dataclass(frozen=True, eq=False)
class MonotoneTable(RateFunction):
    """Log-log interpolated table with constant extrapolation on both sides."""

    s: tuple
    y: tuple
    repaired: bool = False
    max_violation: float = 0.0
    family: ClassVar[str] = "table"

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if s.ndim != 1 or s.shape != y.shape or len(s) < 2:
            raise DomainError("table needs matching 1-D abscissae and ordinates (length >= 2)")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(y))):
            raise DomainError("table entries must be finite; use a parametric family for infinite values")
        if np.any(s <= 0) or np.any(np.diff(s) <= 0):
            raise DomainError("table abscissae must be positive and strictly increasing")
        if np.any(y < 0):
            raise DomainError("table ordinates must be nonnegative")
        object.__setattr__(self, "_ls", np.log(s))
        object.__setattr__(self, "_y", y)

    @classmethod
    def from_samples(cls, s, y) -> "MonotoneTable":
        """Build a table, repairing violations up to 1e-9 relative by a running minimum."""
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        order = np.argsort(s)
        s, y = s[order], y[order]
        run = np.minimum.accumulate(y)
        excess = np.max(np.where(run > 0, (y - run) / np.maximum(run, 1e-300), y - run), initial=0.0)
        if excess > 1e-9:
            raise DomainError(f"table violates monotonicity by {excess:.3g} relative")
        if excess > 0:
            log.info("monotone table repaired by running minimum (max violation %.3g)", excess)
        return cls(tuple(s.tolist()), tuple(run.tolist()), repaired=bool(excess > 0),
                   max_violation=float(excess))

    def raw(self, s):
        s = np.asarray(s, dtype=float)
        ls = np.clip(np.log(s), self._ls[0], self._ls[-1])
        idx = np.clip(np.searchsorted(self._ls, ls, side="right") - 1, 0, len(self._ls) - 2)
        x0, x1 = self._ls[idx], self._ls[idx + 1]
        # abscissae closer than log resolution collapse to the left node
        gap = x1 - x0
        f = np.where(gap > 0, (ls - x0) / np.where(gap > 0, gap, 1.0), 0.0)
        y0, y1 = self._y[idx], self._y[idx + 1]
        pos = (y0 > 0) & (y1 > 0)
        with np.errstate(all="ignore"):
            geo = np.exp((1 - f) * np.log(np.where(pos, y0, 1.0)) + f * np.log(np.where(pos, y1, 1.0)))
        return np.where(pos, geo, (1 - f) * y0 + f * y1)

    def to_json(self):
        return {"table": [[a, b] for a, b in zip(self.s, self.y)]}


def universal_beta() -> Power:
    """``1/(16 s)``, valid in the oscillation-remainder weak integrated inequality for every measure."""
    return Power(1.0 / 16.0, 1.0)


# ------------------------------------------------------------ serialization

_SIMPLE = {"constant": Constant, "power": Power, "exp_power": ExpPower, "log_power": LogPower}


def from_json(obj: dict) -> RateFunction:
    """Inverse of ``to_json`` for serializable representations."""
    if "table" in obj:
        rows = np.asarray(obj["table"], dtype=float)
        return MonotoneTable.from_samples(rows[:, 0], rows[:, 1])
    fam = obj.get("family")
    p = dict(obj.get("params", {}))
    if fam in _SIMPLE:
        return _SIMPLE[fam](**{k: float(v) for k, v in p.items()})
    if fam == "zero_beyond":
        return ZeroBeyond(from_json(p["inner"]), float(p["s0"]))
    if fam == "min":
        return PointwiseMin(from_json(p["a"]), from_json(p["b"]))
    if fam == "product":
        return Product(from_json(p["a"]), from_json(p["b"]))
    if fam == "affine":
        inner = from_json(p.pop("inner"))
        return Affine(inner, **{k: float(v) for k, v in p.items()})
    raise DomainError(f"unknown rate function family {fam!r}")


# ------------------------------------------------------- iteration schedule


def _default_gamma(i):
    return 2.0 ** (-np.asarray(i, dtype=float))


def _default_alpha(i):
    i = np.asarray(i, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(i > 0, 6.0 / (math.pi ** 2 * i ** 2), 0.0)


@dataclass(frozen=True, eq=False)
class IterationSchedule:
    """Sequences ``gamma_i`` (decreasing from 1) and ``alpha_i`` (summing to 1).

    Both callables take integer arrays. ``alpha`` is read from index 1 on.
    """

    gamma: Callable[[np.ndarray], np.ndarray] = _default_gamma
    alpha: Callable[[np.ndarray], np.ndarray] = _default_alpha
    max_index: int = 200
    tail_tol: float = 1e-15
    check_terms: int = 1_000_000

    def __post_init__(self):
        idx = np.arange(self.max_index + 1)
        g = np.asarray(self.gamma(idx), dtype=float)
        if g[0] != 1.0:
            raise DomainError("gamma_0 must equal 1")
        if np.any(np.diff(g) >= 0) or np.any(g <= 0):
            raise DomainError("gamma must be positive and strictly decreasing")
        if g[-1] >= 1e-12:
            raise DomainError("gamma at the max index must be below 1e-12")
        a = np.asarray(self.alpha(np.arange(1, self.check_terms + 1)), dtype=float)
        if np.any(a <= 0):
            raise DomainError("alpha must be positive")
        partial = math.fsum(a)
        if partial > 1 + 1e-12:
            raise DomainError(f"alpha partial sums exceed 1 ({partial!r})")
        if 1 - partial >= 1e-6:
            raise DomainError(f"alpha does not sum to 1 (deficit {1 - partial:.3g})")

    @classmethod
    def geometric(cls, ratio: float, **kw) -> "IterationSchedule":
        """``gamma_i = ratio**(-i)`` with the default ``alpha``; max index scaled to keep gamma tiny."""
        max_index = max(200, int(math.ceil(12 * math.log(10) / math.log(ratio))) + 1)
        return cls(gamma=lambda i: float(ratio) ** (-np.asarray(i, dtype=float)),
                   max_index=kw.pop("max_index", max_index), **kw)

    def g(self, i: int) -> float:
        return float(np.asarray(self.gamma(np.array([i])))[0])

    def a(self, i: int) -> float:
        return float(np.asarray(self.alpha(np.array([i])))[0])


DEFAULT_SCHEDULE = IterationSchedule()


# ------------------------------------------------------------------ beta -> xi


def _limit_at_zero(f: RateFunction) -> float:
    return f.value(_TINY)


def _infimum(objective, limit_value: float) -> float:
    lo = 1e-12
    s, v = log_infimum(objective, lo, 1e3)
    while s <= lo * 1.5 and lo > 1e-290:
        lo *= 1e-6
        s2, v2 = log_infimum(objective, lo, lo * 1e7)
        if v2 >= v:
            break
        s, v = s2, v2
    return min(v, limit_value)


def xi_from_beta_wp(beta: RateFunction, t: float) -> float:
    """Decay rate from a weak Poincaré profile: ``inf_s (s + exp(-2t/beta(s)))``.

    The level-set form ``2 inf{s : beta(s) ln(1/s) <= 2t}`` is evaluated as a
    cross-check; for continuous ``beta`` the ratio lies in ``[1, 2]``.
    """
    if not t > 0:
        raise DomainError("t must be positive")

    def obj(s):
        with np.errstate(all="ignore"):
            return s + np.exp(-2.0 * t / beta.raw(s))

    b0 = _limit_at_zero(beta)
    lim = math.exp(-2.0 * t / b0) if b0 > 0 else 0.0
    value = _infimum(obj, lim)
    level = xi_level_form(beta, t)
    if value > 0 and not (value * (1 - 1e-6) <= level <= 2 * value * (1 + 1e-6)):
        log.warning("xi forms disagree at t=%g: inf form %.6g, level form %.6g", t, value, level)
    return float(value)


def xi_level_form(beta: RateFunction, t: float) -> float:
    """``2 inf{s in (0, 1) : beta(s) ln(1/s) <= 2t}``."""

    def g(s: float) -> float:
        if s >= 1.0:
            return 0.0
        b = beta.value(s)
        return b * math.log(1.0 / s) if b > 0 else 0.0

    return 2.0 * monotone_inverse(g, 2.0 * t)


def xi_iterated(beta: RateFunction, t: float, schedule: IterationSchedule | None = None) -> float:
    """Iterated decay rate ``sum_i gamma_i * beta^{-1}(2 t alpha_{i+1} / ln(1/gamma_{i+1}))``."""
    if not t > 0:
        raise DomainError("t must be positive")
    sch = schedule or DEFAULT_SCHEDULE
    terms: list[float] = []

    def term(i: int) -> float:
        g_next = sch.g(i + 1)
        y = 2.0 * t * sch.a(i + 1) / math.log(1.0 / g_next)
        x = sch.g(i) * beta.inverse(y)
        terms.append(x)
        return x

    total, last, ok = sum_series(term, 0, sch.max_index, sch.tail_tol)
    if math.isinf(total):
        return math.inf
    if not ok and len(terms) >= 2 and terms[-1] >= terms[-2] > 0:
        raise NumericError("iterated series terms are not decreasing at the truncation index")
    return float(total)


def eta_from_beta(beta: RateFunction, t: float, a: float) -> float:
    """Gradient-energy decay rate ``inf_s (s + exp(-2(t-a)/beta(s)) / (2a))``."""
    if not (t > a > 0):
        raise DomainError("need t > a > 0")

    def obj(s):
        with np.errstate(all="ignore"):
            return s + np.exp(-2.0 * (t - a) / beta.raw(s)) / (2.0 * a)

    b0 = _limit_at_zero(beta)
    lim = math.exp(-2.0 * (t - a) / b0) / (2.0 * a) if b0 > 0 else 0.0
    return float(_infimum(obj, lim))


class EtaIntegral(NamedTuple):
    value: float
    integrable: bool
    reason: str
    error: float
    tail_slope: float


def xi_from_eta(beta: RateFunction, t: float, a_fraction: float = 0.5) -> EtaIntegral:
    """``2 int_t^inf eta(u) du`` with ``a = a_fraction * u``, plus an integrability verdict.

    A tail decaying no faster than ``1/u`` yields ``integrable=False`` and an
    infinite value: there is then no weak Poincaré conclusion.
    """
    if not (0 < a_fraction < 1):
        raise DomainError("a_fraction must be in (0, 1)")

    def eta(u: float) -> float:
        return eta_from_beta(beta, u, a_fraction * u)

    u1, u2 = max(t, 1.0) * 1e6, max(t, 1.0) * 1e8
    e1, e2 = eta(u1), eta(u2)
    slope = math.log(e2 / e1) / math.log(u2 / u1) if e1 > 0 and e2 > 0 else -math.inf
    if slope > -1.05:
        return EtaIntegral(math.inf, False, f"eta tail slope {slope:.3f} is not below -1", math.nan, slope)
    res = half_line_integral(eta, t)
    if not res.converged:
        return EtaIntegral(math.inf, False, "improper integral of eta did not converge", res.error, slope)
    return EtaIntegral(2.0 * res.value, True, "", 2.0 * res.error, slope)


# ------------------------------------------------------------------ xi -> beta


def beta_wp_from_xi(xi: RateFunction, s: float) -> float:
    """Weak Poincaré profile from a decay rate: ``2s inf_r xi^{-1}(r exp(1 - r/s)) / r``."""
    if not s > 0:
        raise DomainError("s must be positive")

    def obj(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for k, rk in enumerate(r):
            arg = rk * math.exp(1.0 - rk / s)
            out[k] = xi.inverse(arg) / rk if arg > 0 else math.inf
        return out

    try:
        _, v = log_infimum(obj, s * 1e-12, s * 1e3)
    except NumericError:
        return math.inf
    return float(2.0 * s * v)


def beta_wp_from_xi_simple(xi: RateFunction, s: float) -> float:
    """``2 xi^{-1}(s)``."""
    if not s > 0:
        raise DomainError("s must be positive")
    return 2.0 * xi.inverse(s)


def beta_from_beta_wp(beta_wp: RateFunction) -> PointwiseMin:
    """``min(1/2 + beta_wp(2s), 1/(16 s))``."""
    return PointwiseMin(Affine(beta_wp, arg_scale=2.0, shift=0.5), universal_beta())


@dataclass(frozen=True)
class NashConstants:
    c: float
    p: float
    nash_k: float
    c_p: float
    exponent: float
    note: str = field(default="")


def nash_constants(c: float, p: float) -> NashConstants:
    """Constants of the Nash-type improvement for ``beta_wp = c s^{-1/p}``.

    ``nash_k`` is the smallest ``K`` with
    ``Var(f) <= K mu(|grad f|^2)^{p/(p+1)} Osc(f)^{2/(p+1)}``
    obtainable by optimizing ``s`` in the weak inequality, and ``c_p`` is the
    resulting coefficient of ``s^{-1/(p+1)}``.
    """
    if not (p > 0 and c > 0):
        raise DomainError("need p > 0 and c > 0")
    k = (p + 1.0) * (c / p) ** (p / (p + 1.0))
    c_p = k * (p + 1.0) / (p + 2.0) * (p + 2.0) ** (-1.0 / (p + 1.0))
    return NashConstants(c, p, k, c_p, 1.0 / (p + 1.0),
                         note="constructive constant; exponent is the certified part")


def nash_exponent_improvement(beta_wp: RateFunction, p: float) -> PointwiseMin:
    """Integrated-Gamma2 profile ``c(p) s^{-1/(p+1)}`` from ``beta_wp = c s^{-1/p}``.

    The power law is capped by the universal ``1/(16 s)``, which is always
    valid; the power branch is ``result.a``.
    """
    if not p > 0:
        raise DomainError("p must be positive")
    if not isinstance(beta_wp, Power) or abs(beta_wp.q - 1.0 / p) > 1e-12:
        raise DomainError("beta_wp must be Power(c, 1/p)")
    k = nash_constants(beta_wp.c, p)
    return PointwiseMin(Power(k.c_p, k.exponent), universal_beta())
