"""Bounds for structured n-dimensional measures: conditional-gap bounds,
convex perturbations of products (light, heavy and flat tails), radial
measures and hypercube perturbations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from ._numerics import half_line_integral, loglog_slope, splitmix64
from .exceptions import DomainError, ModelError
from .logconcave import LN2, ScheduleS, cp_bound_grad_schedule
from .measures import (GridMeasure1D, Potential1D, RadialModel, build_grid, hessian_tail_fn,
                       radial_moments, radial_subbotin, radial_tail)
from .ratefn import FunctionRate
from .report import BoundReport
from .spectral import discretize, poincare_constant

SCHEDULE_PREFACTOR = 256.0 * LN2     # C_P <= 256 ln2 kappa for the theta = 1 schedule
RADIAL_PREFACTOR = 1024.0 * LN2


def _theta1_s(t: float) -> float:
    return 1.0 / (16.0 * math.log(t) ** 2)


def _kappa_from_tail(integrand: Callable[[float], float]) -> tuple[float, float, bool]:
    res = half_line_integral(integrand, 2.0)
    return res.value, res.error, res.converged


# ------------------------------------------------------------------ conditional gaps


class LedouxGap(NamedTuple):
    """``gap = S + w - w_bar``; ``cp = 1/gap`` when the gap is positive."""

    gap: float
    cp: float
    vacuous: bool


def ledoux_sg_bound(s_inf: float, w_low: float, w_diag_high: float) -> LedouxGap:
    """Spectral-gap lower bound ``S + w - w_bar`` from conditional gaps.

    A non-positive result is returned as is, flagged vacuous.
    """
    if not s_inf > 0:
        raise DomainError("s_inf must be positive")
    gap = float(s_inf + w_low - w_diag_high)
    if gap <= 0:
        return LedouxGap(gap, math.inf, True)
    return LedouxGap(gap, 1.0 / gap, False)


# ------------------------------------------------------------------ products with tails


def _alpha_bar(alpha: Callable[[float], float], r: float) -> float:
    """``sup{v > 0 : alpha(v) <= r}`` for non-decreasing ``alpha`` (bisection in ``ln v``)."""
    lo, hi = -700.0, 700.0
    if alpha(math.exp(lo)) > r:
        return 0.0
    if alpha(math.exp(hi)) <= r:
        return math.inf
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if alpha(math.exp(mid)) <= r:
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


def marginal_alpha(pot: Potential1D, resolution: int = 4001):
    """``(alpha, alpha_bar)`` for one factor: ``alpha(v) = mu(h'' <= v)``."""
    tail = hessian_tail_fn(build_grid(pot, resolution))

    def alpha(v: float) -> float:
        return tail.level_cdf_at(v)

    def alpha_bar(r: float) -> float:
        b = tail.beta(r)
        return math.inf if b == 0.0 else (0.0 if math.isinf(b) else 1.0 / b)

    return alpha, alpha_bar


def concentration_kappa(alpha: Callable[[float], float], n: int,
                        alpha_bar: Callable[[float], float] | None = None,
                        cross_check: bool = True) -> BoundReport:
    """``256 ln2 kappa`` with ``kappa = 4(2 + int_2^inf exp(-2t abar(1/(16 n ln^2 t))) dt)``.

    ``alpha(v) = max_i mu(h_i'' <= v)`` is non-decreasing and ``abar`` is its
    upper generalized inverse, so that ``beta(s) = 1/abar(s/n)`` is the
    gradient-flavor profile. With ``cross_check`` the same beta is passed
    through :func:`cp_bound_grad_schedule` and stored as a comparison.
    """
    if n < 1:
        raise DomainError("n must be positive")
    abar = alpha_bar or (lambda r: _alpha_bar(alpha, r))
    inputs = {"n": int(n)}
    flags = []
    if alpha(1e-12) > 1e-6:
        flags.append("alpha does not vanish at 0")

    def integrand(t: float) -> float:
        a = abar(1.0 / (16.0 * n * math.log(t) ** 2))
        if math.isinf(a):
            return 0.0
        return math.exp(-2.0 * t * a)

    val, err, ok = _kappa_from_tail(integrand)
    if not ok:
        return BoundReport("concentration_kappa", math.inf, inputs, {}, flags=flags,
                           reason="kappa integral diverges")
    kappa = 4.0 * (2.0 + val)
    rep = BoundReport("concentration_kappa", SCHEDULE_PREFACTOR * kappa, inputs,
                      {"kappa": kappa, "tail_integral": val, "tail_error": err}, flags=flags,
                      error=SCHEDULE_PREFACTOR * 4.0 * err)
    if cross_check:
        def beta(s):
            s = np.atleast_1d(np.asarray(s, float))
            out = []
            for x in s:
                a = abar(x / n)
                out.append(0.0 if math.isinf(a) else (math.inf if a == 0 else 1.0 / a))
            return np.array(out)
        sched = cp_bound_grad_schedule(FunctionRate(beta, "alpha_bar_profile", check=False),
                                       ScheduleS.generic(1.0))
        rep.comparisons["grad_schedule"] = sched.value
    return rep


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Lower curvature profile ``h_i''(u) >= rho(|u|)`` and factor gap constants."""

    rho: Callable[[float], float]
    cp_etas: tuple[float, ...]
    label: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cp_etas", tuple(float(c) for c in self.cp_etas))
        if not self.cp_etas or not all(0 < c < math.inf for c in self.cp_etas):
            raise ModelError("cp_etas must be finite positive numbers")
        r = np.geomspace(1e-3, 1e6, 64)
        vals = np.array([self.rho(float(x)) for x in r])
        if np.any(vals <= 0) or np.any(~np.isfinite(vals)):
            raise ModelError("rho must be positive and finite on the probe grid")
        if np.any(np.diff(vals) > 1e-12 * np.abs(vals[:-1])):
            raise ModelError("rho must be non-increasing")
        if vals[-1] > 0.5 * vals[0] and vals[-1] != vals[0]:
            raise ModelError("rho does not appear to decay")

    @property
    def cp_max(self) -> float:
        return max(self.cp_etas)

    def describe(self) -> dict:
        return {"label": self.label, "params": dict(self.params), "cp_max": self.cp_max}


def bk_style_bound(profile: CurvatureProfile, n: int) -> BoundReport:
    """Product-with-perturbation bound from a lower curvature profile.

    The profile ``beta(s) = 1/rho(sqrt(C) ln(6n/s))`` (zero for ``s >= 1``,
    ``C = max_i C_P(eta_i)``) is fed to the theta = 1 schedule, giving the
    integrand ``exp(-2t rho(sqrt(C) ln(96 n ln^2 t)))`` and value
    ``256 ln2 kappa``. The single-line display variant
    ``4(2 + int exp(-2t rho(sqrt(2C) ln(n ln^2 t))))`` is stored for comparison.
    """
    if n < 1:
        raise DomainError("n must be positive")
    c = profile.cp_max
    sq = math.sqrt(c)
    inputs = {"profile": profile.describe(), "n": int(n)}

    def chain(t: float) -> float:
        return math.exp(-2.0 * t * profile.rho(sq * math.log(96.0 * n * math.log(t) ** 2)))

    def display(t: float) -> float:
        arg = max(math.log(n * math.log(t) ** 2), 0.0)
        return math.exp(-2.0 * t * profile.rho(math.sqrt(2.0 * c) * arg))

    val, err, ok = _kappa_from_tail(chain)
    if not ok:
        return BoundReport("bk_style", math.inf, inputs, reason="kappa integral diverges")
    kappa = 4.0 * (2.0 + val)
    dval, _, dok = _kappa_from_tail(display)
    comps = {"display": 4.0 * (2.0 + dval) if dok else math.inf}
    return BoundReport("bk_style", SCHEDULE_PREFACTOR * kappa, inputs,
                       {"kappa": kappa, "tail_integral": val, "tail_error": err}, comps,
                       error=SCHEDULE_PREFACTOR * 4.0 * err)


def subbotin_cp_eta(p: float) -> float:
    """Known upper bound ``4 / p^(2(1 - 1/p))`` on the 1-D Subbotin gap constant, ``1 < p <= 2``."""
    return 4.0 / p ** (2.0 * (1.0 - 1.0 / p))


def subbotin_profile(p: float, n: int = 1, eps: float = 1e-8) -> CurvatureProfile:
    def rho(r: float) -> float:
        return p * (p - 1.0) * (r + eps) ** (p - 2.0)

    return CurvatureProfile(rho, (subbotin_cp_eta(p),) * max(int(n), 1), label="subbotin",
                            params=(("p", float(p)), ("eps", float(eps))))


def subbotin_product_bound(p: float, n: int, eps: float = 1e-8,
                           bk_constant: float = 1.0) -> BoundReport:
    """``bk_style_bound`` for ``h_i = |u|^p``, ``1 < p <= 2``.

    Records the implied constant ``c(p) = value p(p-1) / (1 + ln^(2-p)(6n))``
    and the reference value ``bk_constant ln^((2-p)/p)(max(n, 2))``.
    """
    if not (1.0 < p <= 2.0):
        raise DomainError("subbotin_product_bound needs 1 < p <= 2")
    rep = bk_style_bound(subbotin_profile(p, 1, eps), n)
    rep.name = "subbotin_product"
    rep.inputs = {"p": float(p), "n": int(n), "eps": float(eps), "bk_constant": bk_constant}
    growth = 1.0 + math.log(6.0 * n) ** (2.0 - p)
    rep.intermediates["c_p"] = rep.value * p * (p - 1.0) / growth
    rep.intermediates["cp_eta"] = subbotin_cp_eta(p)
    rep.comparisons["barthe_klartag_reference"] = bk_constant * math.log(max(n, 2)) ** ((2.0 - p) / p)
    rep.flags.append("c(p) implementation-derived")
    return rep


def subbotin_exponent_fit(p: float, ns: Sequence[int] = (10, 100, 1000, 10_000),
                          eps: float = 1e-8) -> dict:
    """Slope of ``ln I(n)`` against ``ln ln(6n)``, ``I`` the n-dependent tail integral."""
    reps = [subbotin_product_bound(p, n, eps) for n in ns]
    ints = np.array([r.intermediates["tail_integral"] for r in reps])
    vals = np.array([r.value for r in reps])
    x = np.log(np.log(6.0 * np.asarray(ns, float)))
    slope = float(np.polyfit(x, np.log(ints), 1)[0]) if np.all(ints > 0) else 0.0
    spread = float(vals.max() / vals.min() - 1.0)
    return {"p": p, "ns": list(ns), "values": vals.tolist(), "integrals": ints.tolist(),
            "slope": slope, "target": 2.0 - p, "relative_spread": spread}


def flat_tail_bound(p: float, alpha_ratio: float, n: int, eps: float = 0.5) -> BoundReport:
    """``c(p, eps) (alpha n)^((p-2)(1+eps))`` for ``p > 2``.

    The profile ``beta(s) = (alpha n / s)^(p-2) / (p(p-1))`` under the theta = 1
    schedule gives ``exp(-2t / (K ln^k t))`` with ``k = 2(p-2)`` and
    ``K = (16 alpha n)^(p-2) / (p(p-1))``. Bounding ``ln t <= t^d/(d e)`` with
    ``k d = eps/(1+eps)`` and integrating over the half-line yields
    ``I <= Gamma(2+eps) (K / (2 (d e)^k))^(1+eps)``, hence
    ``c(p, eps) = 1024 ln2 (2 + Gamma(2+eps) (K1 / (2 (d e)^k))^(1+eps))`` with
    ``K1 = 16^(p-2)/(p(p-1))``, valid as stated when ``alpha n >= 1``.
    """
    if not p > 2:
        raise DomainError("flat_tail_bound needs p > 2")
    if not eps > 0:
        raise DomainError("eps must be positive")
    if not alpha_ratio > 0:
        raise DomainError("alpha_ratio must be positive")
    a_n = alpha_ratio * n
    k = 2.0 * (p - 2.0)
    d = eps / ((1.0 + eps) * k)
    k1 = 16.0 ** (p - 2.0) / (p * (p - 1.0))
    g = special.gamma(2.0 + eps) * (k1 / (2.0 * (d * math.e) ** k)) ** (1.0 + eps)
    c_pe = RADIAL_PREFACTOR * (2.0 + g)
    expo = (p - 2.0) * (1.0 + eps)
    flags = ["c(p,eps) implementation-derived"]
    if p >= 3:
        flags.append("interest only if 2<p<3")
    if a_n < 1:
        flags.append("alpha*n < 1: power replaced by 1")
    value = c_pe * max(a_n, 1.0) ** expo
    big_k = (16.0 * a_n) ** (p - 2.0) / (p * (p - 1.0))

    def chain(t: float) -> float:
        return math.exp(-2.0 * t / (big_k * math.log(t) ** k))

    cval, _, cok = _kappa_from_tail(chain)
    comps = {"chain": SCHEDULE_PREFACTOR * 4.0 * (2.0 + cval) if cok else math.inf}
    return BoundReport("flat_tail", value,
                       {"p": p, "alpha_ratio": alpha_ratio, "n": int(n), "eps": eps},
                       {"c_p_eps": c_pe, "alpha_n": a_n, "exponent": expo, "K": big_k},
                       comps, flags)


class TailCheck(NamedTuple):
    ok: bool
    worst_ratio: float
    r_worst: float
    checked: int


def concentration_tail_check(m: GridMeasure1D, cp: float | None = None, u: float | None = None,
                             rho_inv: Callable[[float], float] | None = None,
                             r_grid: Sequence[float] | None = None) -> TailCheck:
    """Check ``mu(|x| >= r) <= 6 exp(-r / sqrt(C_P))`` on an ``r`` grid.

    ``cp`` defaults to the spectral constant of ``m``. With ``u`` and
    ``rho_inv`` the point ``r = rho^{-1}(1/u)`` is checked too.
    """
    if cp is None:
        cp = poincare_constant(discretize(m))
    rs = list(np.linspace(0.0, 10.0, 101) if r_grid is None else r_grid)
    if u is not None and rho_inv is not None:
        rs.append(float(rho_inv(1.0 / u)))
    worst, r_w = 0.0, 0.0
    for r in rs:
        ratio = radial_tail(m, float(r)) / (6.0 * math.exp(-float(r) / math.sqrt(cp)))
        if ratio > worst:
            worst, r_w = ratio, float(r)
    return TailCheck(worst <= 1.0, worst, r_w, len(rs))


# ------------------------------------------------------------------ radial


def sphere_points(n: int, count: int = 4096) -> np.ndarray:
    """Deterministic, roughly uniform points on ``S^{n-1}``.

    ``n = 2`` uses equally spaced angles and ``n = 3`` the Fibonacci lattice;
    larger ``n`` map a seeded scrambled Sobol sequence through the normal
    quantile function and normalize.
    """
    if n == 2:
        a = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(a), np.sin(a)])
    k = np.arange(count) + 0.5
    if n == 3:
        z = 1.0 - 2.0 * k / count
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        r = np.sqrt(1.0 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    sob = qmc.Sobol(d=n, scramble=True, seed=splitmix64(0, n))
    u = sob.random_base2(max(1, math.ceil(math.log2(count))))[:count]
    g = special.ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def radial_cn(model: RadialModel, thetas: Sequence[float] | None = None,
              sphere_count: int = 4096) -> float:
    """``c_n = vol(B_1) / Z`` for ``W = 0``; otherwise the ``inf_theta`` upper bound.

    The upper bound is ``e^{max_{|x|=theta} W} / (n int_0^theta r^{n-1} e^{-h(r^2)} dr)``
    over a theta grid, the sphere maximum taken over deterministic points.
    """
    n = model.n
    if model.w is None:
        mom = radial_moments(model)
        return mom["ball_volume"] / mom["z"]
    pts = sphere_points(n, sphere_count)
    grid = np.geomspace(1e-2, 20.0, 80) if thetas is None else np.asarray(thetas, float)
    best = math.inf
    for th in grid:
        wmax = max(float(model.w(th * x)) - model.w0 for x in pts)
        inner, _ = integrate.quad(
            lambda r: r ** (n - 1) * math.exp(-float(model.h_shift(np.array([r * r]))[0])), 0.0, th)
        if inner <= 0:
            continue
        best = min(best, math.exp(wmax) / (n * inner))
    return best


def radial_bound(model: RadialModel, cn: float | None = None) -> BoundReport:
    """``1024 ln2 (2 + int_2^inf exp(-4t h'((16 c_n ln^2 t)^(-2/n))) dt)``.

    This is the theta = 1 schedule applied to ``beta(s) = 1/(2 h'((s/c_n)^(2/n)))``.
    The display form ``1024 ln2 (1 + int exp(-4t h'((c_n ln^2 t)^(-2/n))))`` is
    kept for comparison, together with the two-sided radial bracket when ``W = 0``.
    """
    n = model.n
    cn = radial_cn(model) if cn is None else cn
    inputs = {"model": model.describe()}

    def hp(u: float) -> float:
        return float(model.dh(np.array([u]))[0])

    def chain(t: float) -> float:
        return math.exp(-4.0 * t * hp((16.0 * cn * math.log(t) ** 2) ** (-2.0 / n)))

    def display(t: float) -> float:
        return math.exp(-4.0 * t * hp((cn * math.log(t) ** 2) ** (-2.0 / n)))

    val, err, ok = _kappa_from_tail(chain)
    inter = {"c_n": cn, "tail_integral": val, "tail_error": err}
    if not ok:
        return BoundReport("radial", math.inf, inputs, inter, reason="integral diverges")
    dval, _, dok = _kappa_from_tail(display)
    comps = {"display": RADIAL_PREFACTOR * (1.0 + dval) if dok else math.inf}
    if model.w is None:
        comps.update(_bjm(model))
    return BoundReport("radial", RADIAL_PREFACTOR * (2.0 + val), inputs, inter, comps,
                       ["universal prefactor 1024 ln2 constructive"], error=RADIAL_PREFACTOR * err)


def _bjm(model: RadialModel) -> dict:
    m2 = radial_moments(model)["second_moment"]
    return {"bjm_lower": m2 / model.n, "bjm_upper": m2 / (model.n - 1)}


def radial_subbotin_bound(p: float, n: int, model: RadialModel | None = None) -> BoundReport:
    """``12288 ln2 c_n^(2(p-1)/n) / (4p) (4(p-1))^(4(p-1)/n)`` for ``h(u) = u^p``.

    At ``p = 1`` the ``0^0`` factor is taken as 1 (flagged).
    """
    if not p >= 1:
        raise DomainError("p must be at least 1")
    if n < 2:
        raise DomainError("n must be at least 2")
    model = radial_subbotin(p, n) if model is None else model
    cn = radial_cn(model)
    flags = []
    if p == 1:
        corner = 1.0
        flags.append("p=1 corner 0^0 taken as 1")
    else:
        corner = (4.0 * (p - 1.0)) ** (4.0 * (p - 1.0) / n)
    value = 12288.0 * LN2 * cn ** (2.0 * (p - 1.0) / n) / (4.0 * p) * corner
    comps = {"asymptotic_bjm": (2.0 * math.e * p) ** (-1.0 / p) * n ** (1.0 - 1.0 / p),
             "growth_reference": p ** (3.0 * (p - 1.0) / n) * n ** (1.0 - 1.0 / p)}
    if model.w is None:
        comps.update(_bjm(model))
    return BoundReport("radial_subbotin", value, {"p": float(p), "n": int(n), "model": model.describe()},
                       {"c_n": cn, "corner": corner}, comps, flags)


def radial_cn_closed_form(p: float, n: int) -> float:
    """``2p / (n Gamma(n/(2p)))`` for ``h(u) = u^p`` and ``W = 0``."""
    return 2.0 * p / (n * special.gamma(n / (2.0 * p)))


# ------------------------------------------------------------------ hypercube


@dataclass(frozen=True, eq=False)
class HypercubeModel:
    """``exp(-W(x) - sum_i h_i(x_i))`` on a bounded box.

    ``w`` takes an array of points of shape ``(m, n)`` and returns ``(m,)``;
    ``None`` means ``W = 0``.
    """

    intervals: tuple[tuple[float, float], ...]
    h: tuple[Potential1D, ...] | None = None
    w: Callable[[np.ndarray], np.ndarray] | None = None
    w_convex: bool = True
    name: str = "hypercube"
    params: tuple = ()
    factors: tuple = field(init=False, default=())

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", iv)
        if not iv:
            raise ModelError("at least one interval is needed")
        for a, b in iv:
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ModelError("intervals must be bounded and non-empty")
        if self.h is None:
            zero = lambda x: np.zeros_like(np.asarray(x, float))  # noqa: E731
            hs = tuple(Potential1D(zero, zero, zero, domain=ab, convex=True, name="uniform",
                                   params=(("a", ab[0]), ("b", ab[1]))) for ab in iv)
        else:
            hs = tuple(self.h)
            if len(hs) != len(iv):
                raise ModelError("one potential per interval is needed")
            for hi, ab in zip(hs, iv):
                if tuple(hi.domain) != ab:
                    raise ModelError("potential domain must match its interval")
        object.__setattr__(self, "factors", hs)
        if self.w is not None and self.w_convex:
            self._probe_convexity()

    @property
    def n(self) -> int:
        return len(self.intervals)

    def w_eval(self, pts: np.ndarray) -> np.ndarray:
        if self.w is None:
            return np.zeros(len(pts))
        try:
            out = np.asarray(self.w(pts), float)
            if out.shape == (len(pts),):
                return out
        except (TypeError, ValueError, IndexError):
            pass
        return np.array([float(self.w(x)) for x in pts])

    def _probe_convexity(self) -> None:
        rng = np.random.default_rng(splitmix64(1, self.n))
        lo = np.array([a for a, _ in self.intervals])
        hi = np.array([b for _, b in self.intervals])
        x = lo + (hi - lo) * rng.random((256, self.n))
        y = lo + (hi - lo) * rng.random((256, self.n))
        mid = self.w_eval(0.5 * (x + y))
        gap = 0.5 * (self.w_eval(x) + self.w_eval(y)) - mid
        if gap.min() < -1e-9:
            raise ModelError("W flagged convex but the midpoint probe fails")

    def describe(self) -> dict:
        return {"type": self.name, "n": self.n, "intervals": [list(ab) for ab in self.intervals],
                "params": dict(self.params)}


def max_slice_oscillation(model: HypercubeModel, grid_resolution: int = 33, probes: int = 1000,
                          seed: int = 0, line_points: int = 129) -> float:
    """``max_i sup_x Osc(W_{i,x})`` by grid search over slices plus random probes."""
    if model.w is None:
        return 0.0
    n = model.n
    lo = np.array([a for a, _ in model.intervals])
    hi = np.array([b for _, b in model.intervals])
    rng = np.random.default_rng(splitmix64(seed, 5))
    best = 0.0
    for i in range(n):
        others = [j for j in range(n) if j != i]
        if others:
            axes = [np.linspace(lo[j], hi[j], grid_resolution) for j in others]
            mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(others))
            rand = lo[others] + (hi[others] - lo[others]) * rng.random((probes, len(others)))
            bases = np.vstack([mesh, rand])
        else:
            bases = np.zeros((1, 0))
        t = np.linspace(lo[i], hi[i], line_points)
        for chunk in np.array_split(bases, max(1, len(bases) // 512)):
            pts = np.empty((len(chunk), line_points, n))
            pts[:, :, others] = chunk[:, None, :]
            pts[:, :, i] = t[None, :]
            vals = model.w_eval(pts.reshape(-1, n)).reshape(len(chunk), line_points)
            best = max(best, float((vals.max(axis=1) - vals.min(axis=1)).max()))
    return best


def holley_stroock_marginal_bound(model: HypercubeModel, grid_resolution: int = 33,
                                  probes: int = 1000, seed: int = 0, spectral_resolution: int = 2001,
                                  hypothesis_attested: bool = False) -> BoundReport:
    """``12 max_i sup_x e^{Osc W_{i,x}} max_i C_P(theta_i)`` on a box.

    The factor gaps come from the spectral solver. The variant without the
    factor 12 is stored as a comparison and flagged unless ``hypothesis_attested``.
    """
    osc = max_slice_oscillation(model, grid_resolution, probes, seed)
    cps = [poincare_constant(discretize(build_grid(f, spectral_resolution))) for f in model.factors]
    cp_max = max(cps)
    value = 12.0 * math.exp(osc) * cp_max
    flags = [] if hypothesis_attested else ["sharper variant requires an attested slice hypothesis"]
    return BoundReport("holley_stroock_marginal", value,
                       {"model": model.describe(), "grid_resolution": grid_resolution,
                        "probes": probes, "seed": seed},
                       {"max_slice_osc": osc, "factor_cp": cps},
                       {"without_factor_12": math.exp(osc) * cp_max}, flags)


def fit_growth_exponent(ns: Sequence[float], values: Sequence[float]) -> float:
    """Log-log slope of ``values`` against ``ns``."""
    return loglog_slope(np.asarray(ns, float), np.asarray(values, float))
