"""Poincaré-constant bounds for log-concave measures from weak integrated
Gamma2 profiles: the universal series constant, ``M_beta``, the Milman route
and the schedule-based refinements, plus moment corollaries."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numerics import Integral, half_line_integral, sum_series
from .exceptions import DomainError
from .measures import (GridMeasure1D, ProductPerturbedModel, RadialModel, hessian_norms,
                       hessian_tail_fn, sample)
from .ratefn import DEFAULT_SCHEDULE, FromInverse, IterationSchedule, RateFunction
from .report import BoundReport

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
MILMAN_PREFACTOR = 1024.0 / math.pi ** 2
UNSPECIFIED = "universal constant c unspecified"


def kappa_closed_form() -> float:
    """``52 pi^2 ln 2 / 6``."""
    return 52.0 * math.pi ** 2 * LN2 / 6.0


def kappa_universal(schedule: IterationSchedule | None = None) -> float:
    """``sum_i gamma_i ln(1/gamma_{i+1}) / alpha_{i+1}`` for the given schedule."""
    sch = schedule or DEFAULT_SCHEDULE

    def term(i: int) -> float:
        return sch.g(i) * math.log(1.0 / sch.g(i + 1)) / sch.a(i + 1)

    total, _, _ = sum_series(term, 0, sch.max_index, sch.tail_tol)
    return total


# ------------------------------------------------------------------ schedules


@dataclass(frozen=True, eq=False)
class ScheduleS:
    """A schedule ``t -> s(t)``.

    The generic form is ``(theta/16)(t 1_{t<=2} + ln^{-(1+theta)}(t) 1_{t>2})``
    with ``0 < theta <= 1``; a custom callable can be given instead.
    """

    theta: float | None = 1.0
    fn: Callable[[float], float] | None = None
    label: str = "generic"

    def __post_init__(self):
        if self.fn is None:
            if self.theta is None or not (0 < self.theta <= 1):
                raise DomainError("theta must lie in (0, 1]")

    @classmethod
    def generic(cls, theta: float = 1.0) -> "ScheduleS":
        return cls(theta=float(theta))

    @classmethod
    def custom(cls, fn: Callable[[float], float], label: str = "custom") -> "ScheduleS":
        return cls(theta=None, fn=fn, label=label)

    @property
    def is_generic(self) -> bool:
        return self.fn is None

    def __call__(self, t: float) -> float:
        if self.fn is not None:
            return float(self.fn(t))
        th = self.theta
        if t <= 2.0:
            return th / 16.0 * t
        return th / 16.0 * math.log(t) ** (-(1.0 + th))

    def grad_integral(self) -> Integral:
        """``int_0^inf s(t) / (4 pi t) dt``."""
        if self.is_generic:
            th = self.theta
            return Integral(th / (32 * math.pi) + 1.0 / (64 * math.pi * LN2 ** th), 0.0, True)
        return half_line_integral(lambda t: self(t) / (4 * math.pi * t), 0.0)

    def osc_integral(self) -> Integral:
        """``int_0^inf s(t) dt``."""
        return half_line_integral(self, 0.0)

    def describe(self) -> dict:
        return {"label": self.label, "theta": self.theta}


# ------------------------------------------------------------------ M_beta


def m_beta_integral(beta: RateFunction, clip: bool = False) -> Integral:
    """``int_0^inf beta^{-1}(t) dt``, optionally with the integrand clipped at 1."""
    if clip:
        log.info("M_beta: integrand clipped at 1 (gradient-flavor profile)")
        fn = lambda t: min(beta.inverse(t), 1.0)  # noqa: E731
    else:
        fn = beta.inverse
    return half_line_integral(fn, 0.0)


def m_beta(beta: RateFunction, clip: bool = False) -> float:
    """``M_beta``; ``inf`` when the integral diverges."""
    res = m_beta_integral(beta, clip)
    return res.value if res.converged else math.inf


def _infinite(name: str, inputs: dict, reason: str, **kw) -> BoundReport:
    return BoundReport(name, math.inf, inputs, reason=reason, **kw)


def cp_bound_milman(beta: RateFunction, clip: bool = True) -> BoundReport:
    """``(1024/pi^2) kappa M_beta`` for a gradient-flavor profile of a log-concave measure."""
    inputs = {"beta": _describe_rate(beta), "clip": clip}
    kappa = kappa_universal()
    res = m_beta_integral(beta, clip)
    inter = {"kappa": kappa, "m_beta": res.value, "m_beta_error": res.error}
    if not res.converged:
        return _infinite("milman", inputs, "M_beta diverges", intermediates=inter)
    val = MILMAN_PREFACTOR * kappa * res.value
    return BoundReport("milman", val, inputs, inter, error=MILMAN_PREFACTOR * kappa * res.error)


def _decay_integrand(beta: RateFunction, s_fn: ScheduleS) -> Callable[[float], float]:
    def f(t: float) -> float:
        b = beta.value(s_fn(t))
        if b == 0.0:
            return 0.0
        if math.isinf(b):
            return 1.0
        return math.exp(-2.0 * t / b)
    return f


def cp_bound_osc_schedule(beta_osc: RateFunction, s_fn: ScheduleS) -> BoundReport:
    """``64 ln2 kappa / (1 - 6 s0)^2`` with ``s0 = 2 int s``, ``kappa = 2 int e^{-2t/beta(s(t))}``."""
    inputs = {"beta": _describe_rate(beta_osc), "schedule": s_fn.describe()}
    si = s_fn.osc_integral()
    s0 = 2.0 * si.value if si.converged else math.inf
    inter = {"s0": s0, "s0_error": 2.0 * si.error}
    if not s0 < 1.0 / 6.0:
        return _infinite("osc_schedule", inputs, "s0 >= 1/6", intermediates=inter)
    ki = half_line_integral(_decay_integrand(beta_osc, s_fn), 0.0)
    if not ki.converged:
        return _infinite("osc_schedule", inputs, "kappa integral diverges", intermediates=inter)
    kappa = 2.0 * ki.value
    inter.update(kappa=kappa, kappa_error=2.0 * ki.error)
    pref = 64.0 * LN2 / (1.0 - 6.0 * s0) ** 2
    return BoundReport("osc_schedule", pref * kappa, inputs, inter, error=pref * 2.0 * ki.error)


def cp_bound_grad_schedule(beta_grad: RateFunction, s_fn: ScheduleS | None = None,
                           theta: float | None = None) -> BoundReport:
    """Schedule bound for a gradient-flavor profile.

    With the generic schedule: ``kappa = 4(2 + int_2^inf e^{-2t/beta(s(t))} dt)``,
    ``s0 = 1/12`` and value ``256 ln2 kappa``. With a custom schedule:
    ``s0 = 4 int s/(4 pi t)``, ``kappa = 4 int_0^inf e^{-2t/beta(s(t))} dt`` and
    value ``64 ln2 kappa / (1 - 6 s0)^2``.
    """
    if s_fn is None:
        s_fn = ScheduleS.generic(1.0 if theta is None else theta)
    elif theta is not None:
        raise DomainError("give either a schedule or theta")
    inputs = {"beta": _describe_rate(beta_grad), "schedule": s_fn.describe()}
    gi = s_fn.grad_integral()
    inter = {"schedule_integral": gi.value}
    name = "grad_schedule"
    if s_fn.is_generic:
        if not gi.value < 1.0 / 48.0 + 1e-15:
            return _infinite(name, inputs, "schedule integral exceeds 1/48", intermediates=inter)
        ki = half_line_integral(_decay_integrand(beta_grad, s_fn), 2.0)
        if not ki.converged:
            return _infinite(name, inputs, "kappa integral diverges", intermediates=inter)
        kappa = 4.0 * (2.0 + ki.value)
        inter.update(kappa=kappa, tail_integral=ki.value, kappa_error=4.0 * ki.error, s0=1.0 / 12.0)
        return BoundReport(name, 256.0 * LN2 * kappa, inputs, inter,
                           error=256.0 * LN2 * 4.0 * ki.error)
    s0 = 4.0 * gi.value if gi.converged else math.inf
    inter["s0"] = s0
    if not s0 < 1.0 / 6.0:
        return _infinite(name, inputs, "s0 >= 1/6", intermediates=inter)
    ki = half_line_integral(_decay_integrand(beta_grad, s_fn), 0.0)
    if not ki.converged:
        return _infinite(name, inputs, "kappa integral diverges", intermediates=inter)
    kappa = 4.0 * ki.value
    inter.update(kappa=kappa, kappa_error=4.0 * ki.error)
    pref = 64.0 * LN2 / (1.0 - 6.0 * s0) ** 2
    return BoundReport(name, pref * kappa, inputs, inter, error=pref * 4.0 * ki.error)


# ------------------------------------------------------------------ moment bounds


def hessian_tail_beta(m: GridMeasure1D) -> FromInverse:
    """Gradient-flavor profile whose inverse is ``u -> mu(1/V'' >= u)``."""
    tail = hessian_tail_fn(m)
    return FromInverse(tail, label=f"hessian_tail[{m.source.name}]", forward=tail.beta)


def _model_inputs(model) -> dict:
    if isinstance(model, GridMeasure1D):
        return {"model": model.source.describe(), "resolution": model.n}
    return {"model": model.describe()}


def brascamp_moment(model, seed: int = 0, size: int = 100_000) -> tuple[float, float]:
    """``mu(|Hess^{-1} V|_HS)`` and its error estimate.

    1-D: layer-cake integral of the Hessian tail (``inf`` on divergence).
    n-D: Monte Carlo mean with a batch-means error.
    """
    if isinstance(model, GridMeasure1D):
        res = half_line_integral(hessian_tail_fn(model), 0.0)
        return (res.value, res.error) if res.converged else (math.inf, math.nan)
    batch = sample(model, size, seed)
    norms = hessian_norms(model, batch, "hs")
    if not np.all(np.isfinite(norms)):
        return math.inf, math.nan
    return float(norms.mean()), batch.stderr(norms)


def cp_bound_brascamp_moment(model, seed: int = 0, size: int = 100_000) -> BoundReport:
    """``(1024/pi^2) kappa mu(|Hess^{-1} V|_HS)``; the prefactor is this pipeline's own constant."""
    inputs = _model_inputs(model)
    if not isinstance(model, GridMeasure1D):
        inputs.update(seed=seed, size=size)
    flags = ["constructive universal constant"]
    if isinstance(model, GridMeasure1D) and not model.source.convex:
        flags.append("hypothesis unverified: model not flagged convex")
    moment, err = brascamp_moment(model, seed, size)
    kappa = kappa_universal()
    inter = {"kappa": kappa, "moment": moment, "moment_error": err, "c_univ": MILMAN_PREFACTOR * kappa}
    if math.isinf(moment):
        return _infinite("brascamp_moment", inputs, "Hessian-inverse moment is infinite",
                         intermediates=inter, flags=flags)
    return BoundReport("brascamp_moment", MILMAN_PREFACTOR * kappa * moment, inputs, inter,
                       flags=flags, error=MILMAN_PREFACTOR * kappa * err)


def log_moment(m: GridMeasure1D, eps: float) -> float:
    """``mu(ln^{1+eps}(1 + |1/V''|))`` for a 1-D grid measure (``inf`` if divergent)."""
    tail = hessian_tail_fn(m)
    # layer cake in the variable y = ln^{1+eps}(1+u)
    def f(y: float) -> float:
        z = y ** (1.0 / (1.0 + eps))
        # past double range the tail is numerically zero
        return tail(math.expm1(z)) if z < 709.0 else tail(math.inf)

    res = half_line_integral(f, 0.0)
    return res.value if res.converged else math.inf


def power_moment(m: GridMeasure1D, eps: float) -> float:
    """``mu(|1/V''|^eps)`` for a 1-D grid measure (``inf`` if divergent)."""
    tail = hessian_tail_fn(m)
    res = half_line_integral(lambda y: tail(y ** (1.0 / eps)), 0.0)
    return res.value if res.converged else math.inf


def cp_bound_log_moment(m_eps: float, eps: float, c: float = 0.0) -> BoundReport:
    """``c + 4 max(2, exp([2^eps 64 M / theta]^{1/(eps - theta)}))`` with the theta rule."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    theta = 1.0 if eps >= 2 else eps / 2.0
    inputs = {"m_eps": m_eps, "eps": eps, "c": c}
    flags = [] if c else [UNSPECIFIED]
    inter = {"theta": theta, "exponent": 1.0 / (eps - theta)}
    if math.isinf(m_eps):
        return _infinite("log_moment", inputs, "moment is infinite", intermediates=inter, flags=flags)
    base = 2.0 ** eps * 64.0 * m_eps / theta
    try:
        inner = base ** (1.0 / (eps - theta))
        big = math.exp(inner)
    except OverflowError:
        return _infinite("log_moment", inputs, "threshold overflows double precision",
                         intermediates=inter, flags=flags)
    inter["threshold"] = big
    return BoundReport("log_moment", c + 4.0 * max(2.0, big), inputs, inter, flags=flags)


def cp_bound_power_moment(m_eps: float, eps: float, c: float = 0.0) -> BoundReport:
    """``c(eps) + max(2, M^{1/eps} ln^{2/eps}(M^{2/eps}) / 2)``; the floor applies for ``M <= 1``."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    inputs = {"m_eps": m_eps, "eps": eps, "c": c}
    flags = [] if c else [UNSPECIFIED]
    if math.isinf(m_eps):
        return _infinite("power_moment", inputs, "moment is infinite", flags=flags)
    if m_eps <= 1.0:
        term = 0.0
    else:
        term = 0.5 * m_eps ** (1.0 / eps) * ((2.0 / eps) * math.log(m_eps)) ** (2.0 / eps)
    return BoundReport("power_moment", c + max(2.0, term), inputs, {"term": term}, flags=flags)


def _describe_rate(beta: RateFunction) -> dict:
    try:
        return beta.to_json()
    except TypeError:
        return {"family": beta.family, "label": getattr(beta, "label", "")}
