"""Probability measures: 1-D potentials and their grid quadrature, structured
n-dimensional models, Hessian-tail profiles and a Metropolis sampler."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize, special

from ._numerics import batch_means_se, splitmix64
from .exceptions import DomainError, ModelError, SamplingError

ScalarFn = Callable[[np.ndarray], np.ndarray]


# ------------------------------------------------------------------ 1-D models


@dataclass(frozen=True, eq=False)
class Potential1D:
    """A potential ``V`` with derivatives, for ``mu(dx) = exp(-V(x)) dx / Z``.

    All callables must accept numpy arrays.
    """

    v: ScalarFn
    dv: ScalarFn
    d2v: ScalarFn
    domain: tuple[float, float] = (-math.inf, math.inf)
    convex: bool = False
    name: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ModelError("empty domain")
        lo = a if math.isfinite(a) else -10.0
        hi = b if math.isfinite(b) else 10.0
        if math.isfinite(a) and math.isfinite(b):
            lo, hi = a + 1e-9 * (b - a), b - 1e-9 * (b - a)
        x = np.linspace(lo, hi, 10_000)
        with np.errstate(all="ignore"):
            vals = np.asarray(self.v(x), dtype=float)
            curv = np.asarray(self.d2v(x), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ModelError(f"{self.name}: potential is not finite on the probe grid")
        if self.convex and np.nanmin(curv) < -1e-9:
            raise ModelError(f"{self.name}: convex flag set but V'' < 0 somewhere")

    def describe(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "domain": list(self.domain),
                "convex": self.convex}


def gaussian() -> Potential1D:
    """``V(x) = x^2/2``."""
    return Potential1D(lambda x: 0.5 * np.asarray(x) ** 2, lambda x: np.asarray(x, float),
                       lambda x: np.ones_like(np.asarray(x, float)), convex=True, name="gaussian")


def subbotin(p: float, eps: float = 1e-8) -> Potential1D:
    """``V(x) = |x|^p``.

    For ``p < 2`` the second derivative blows up at 0 and is regularized as
    ``p(p-1)(|x|+eps)^(p-2)``; for ``p >= 2`` it is exact.
    """
    if not p > 1:
        raise DomainError("subbotin needs p > 1")
    p = float(p)
    shift = eps if p < 2 else 0.0
    return Potential1D(
        lambda x: np.abs(x) ** p,
        lambda x: p * np.sign(x) * np.abs(x) ** (p - 1),
        lambda x: p * (p - 1) * (np.abs(x) + shift) ** (p - 2),
        convex=True, name="subbotin", params=(("p", p),))


def uniform(a: float = 0.0, b: float = 1.0) -> Potential1D:
    """Uniform law on ``(a, b)``."""
    zero = lambda x: np.zeros_like(np.asarray(x, float))  # noqa: E731
    return Potential1D(zero, zero, zero, domain=(float(a), float(b)), convex=True,
                       name="uniform", params=(("a", float(a)), ("b", float(b))))


def double_well(a: float = 4.0) -> Potential1D:
    """``V(x) = a (x^2 - 1)^2``; not log-concave."""
    a = float(a)
    return Potential1D(lambda x: a * (np.asarray(x) ** 2 - 1) ** 2,
                       lambda x: 4 * a * np.asarray(x) * (np.asarray(x) ** 2 - 1),
                       lambda x: a * (12 * np.asarray(x) ** 2 - 4),
                       convex=False, name="double_well", params=(("a", a),))


def dilate(pot: Potential1D, lam: float) -> Potential1D:
    """Law of ``lam X`` for ``X ~ pot``: ``V_lam(x) = V(x/lam)``."""
    if not lam > 0:
        raise DomainError("dilation factor must be positive")
    lam = float(lam)
    a, b = pot.domain
    return Potential1D(lambda x: pot.v(np.asarray(x, float) / lam),
                       lambda x: pot.dv(np.asarray(x, float) / lam) / lam,
                       lambda x: pot.d2v(np.asarray(x, float) / lam) / lam ** 2,
                       domain=(a * lam, b * lam), convex=pot.convex, name=pot.name,
                       params=pot.params + (("scale", lam),))


def custom1d(expr: str, domain: tuple[float, float] = (-math.inf, math.inf),
             convex: bool = False) -> Potential1D:
    """Potential from a symbolic expression in ``x``; derivatives are taken symbolically."""
    import sympy

    x = sympy.Symbol("x", real=True)
    try:
        e = sympy.sympify(expr, locals={"x": x})
    except (sympy.SympifyError, TypeError) as exc:
        raise ModelError(f"cannot parse potential {expr!r}: {exc}") from exc
    if e.free_symbols - {x}:
        raise ModelError(f"potential {expr!r} has symbols other than x")

    def lam(f):
        g = sympy.lambdify(x, f, "numpy")
        return lambda t: np.asarray(g(np.asarray(t, float)), float) * np.ones_like(np.asarray(t, float))

    return Potential1D(lam(e), lam(sympy.diff(e, x)), lam(sympy.diff(e, x, 2)),
                       domain=(float(domain[0]), float(domain[1])), convex=convex,
                       name="custom1d", params=(("expr", expr),))


@dataclass(frozen=True, eq=False)
class GridMeasure1D:
    """Uniform grid with normalized trapezoid weights for ``exp(-V)``."""

    nodes: np.ndarray
    weights: np.ndarray
    z: float
    source: Potential1D
    window: tuple[float, float]
    v_min: float
    tail_mass: float

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def n(self) -> int:
        return len(self.nodes)

    def density(self, x) -> np.ndarray:
        """Normalized density at ``x`` (zero outside the window)."""
        x = np.asarray(x, float)
        with np.errstate(all="ignore"):
            d = np.exp(-(self.source.v(x) - self.v_min)) / self.z
        return np.where((x >= self.window[0]) & (x <= self.window[1]), d, 0.0)

    def integrate(self, fn: Callable[[float], float], a: float | None = None,
                  b: float | None = None) -> float:
        """Quadrature of ``fn * density`` over ``[a, b]`` clipped to the window."""
        lo = self.window[0] if a is None else max(a, self.window[0])
        hi = self.window[1] if b is None else min(b, self.window[1])
        if hi <= lo:
            return 0.0
        pts = [x for x in (0.0,) if lo < x < hi]
        val, _ = integrate.quad(lambda x: fn(x) * float(self.density(x)), lo, hi,
                                points=pts or None, limit=400, epsabs=1e-15, epsrel=1e-12)
        return float(val)


def _window_edge(v: ScalarFn, x0: float, v0: float, level: float, direction: float,
                 bound: float) -> float:
    """Walk from ``x0`` until ``V - v0 >= level``; returns the crossing or the domain bound."""
    step = 1.0
    last = x0
    for _ in range(80):
        x = x0 + direction * step
        if (direction > 0 and x >= bound) or (direction < 0 and x <= bound):
            xb = bound
            with np.errstate(all="ignore"):
                vb = float(v(np.array([xb]))[0])
            if math.isfinite(vb) and vb - v0 < level:
                return xb
            x = xb
        with np.errstate(all="ignore"):
            vx = float(v(np.array([x]))[0])
        if not math.isfinite(vx) or vx - v0 >= level:
            def g(y):
                with np.errstate(all="ignore"):
                    val = float(v(np.array([y]))[0])
                return (val - v0 - level) if math.isfinite(val) else 1.0
            if g(x) <= 0:
                return x
            return float(optimize.brentq(g, last, x, xtol=1e-13))
        last = x
        step *= 2.0
    raise ModelError("density is not integrable: potential does not grow under domain doubling")


def build_grid(pot: Potential1D, resolution: int = 4001, tail_tol: float = 1e-14,
               window: tuple[float, float] | None = None) -> GridMeasure1D:
    """Truncate where the density falls below ``tail_tol`` times its peak and grid uniformly.

    An explicit ``window`` overrides the automatic truncation; the tail-mass
    check still applies to it.
    """
    if resolution < 16:
        raise DomainError("resolution must be at least 16")
    a, b = pot.domain
    lo = a if math.isfinite(a) else -50.0
    hi = b if math.isfinite(b) else 50.0
    probe = np.linspace(lo, hi, 20_001)[1:-1]
    with np.errstate(all="ignore"):
        pv = np.asarray(pot.v(probe), float)
    pv = np.where(np.isfinite(pv), pv, np.inf)
    k = int(np.argmin(pv))
    x0, v0 = float(probe[k]), float(pv[k])
    if abs(x0) < (hi - lo) * 1e-4 and lo < 0 < hi:
        x0 = 0.0
        v0 = min(v0, float(pot.v(np.array([0.0]))[0]))
    level = math.log(1.0 / tail_tol)
    if window is not None:
        left, right = float(window[0]), float(window[1])
        if not (a <= left < right <= b):
            raise DomainError("window must lie inside the potential's domain")
    else:
        left = _window_edge(pot.v, x0, v0, level, -1.0, a)
        right = _window_edge(pot.v, x0, v0, level, 1.0, b)
    if window is None and x0 == 0.0 and math.isinf(a) and math.isinf(b):
        with np.errstate(all="ignore"):
            even = abs(float(pot.v(np.array([right]))[0]) - float(pot.v(np.array([-right]))[0])) < 1e-9
        if even:
            r = max(-left, right)
            left, right = -r, r
    nodes = np.linspace(left, right, resolution)
    with np.errstate(all="ignore"):
        dens = np.exp(-(np.asarray(pot.v(nodes), float) - v0))
    dens = np.where(np.isfinite(dens), dens, 0.0)
    h = nodes[1] - nodes[0]
    trap = dens * h
    trap[0] *= 0.5
    trap[-1] *= 0.5
    mass = float(trap.sum())
    if not (mass > 0 and math.isfinite(mass)):
        raise ModelError("density has no mass on the truncated window")
    weights = trap / mass

    def dens_fn(x):
        with np.errstate(all="ignore"):
            val = math.exp(-(float(pot.v(np.array([x]))[0]) - v0))
        return val if math.isfinite(val) else 0.0

    width = right - left
    inner = _quad_mass(dens_fn, left, right)
    outer_lo = max(left - width / 2, a) if math.isfinite(a) else left - width / 2
    outer_hi = min(right + width / 2, b) if math.isfinite(b) else right + width / 2
    extra = _quad_mass(dens_fn, outer_lo, left) + _quad_mass(dens_fn, right, outer_hi)
    tail = extra / (inner + extra)
    if tail >= 1e-10:
        raise ModelError(f"truncated tail mass {tail:.3g} exceeds 1e-10; density may not be integrable")
    return GridMeasure1D(nodes, weights, mass * math.exp(-v0), pot, (float(left), float(right)),
                         v0, float(tail))


def _quad_mass(fn, a, b) -> float:
    if b <= a:
        return 0.0
    pts = [0.0] if a < 0 < b else None
    val, _ = integrate.quad(fn, a, b, points=pts, limit=400, epsabs=0.0, epsrel=1e-10)
    return float(val)


class Functionals(NamedTuple):
    mean: float
    variance: float
    osc: float
    grad_energy: float


def functionals(m: GridMeasure1D, f) -> Functionals:
    """Mean, variance, oscillation and ``mu(|f'|^2)`` with centered differences."""
    f = np.asarray(f, dtype=float)
    if f.shape != m.nodes.shape:
        raise DomainError("f must be given on every node")
    mean = float(m.weights @ f)
    var = max(float(m.weights @ (f - mean) ** 2), 0.0)
    grad = np.gradient(f, m.nodes)
    return Functionals(mean, var, float(f.max() - f.min()), float(m.weights @ grad ** 2))


# ------------------------------------------------------------ n-D models


def _probe_points(n: int, count: int = 64) -> np.ndarray:
    return np.random.default_rng(splitmix64(0, n)).uniform(-3, 3, size=(count, n))


@dataclass(frozen=True, eq=False)
class ProductPerturbedModel:
    """``exp(-W(x) - sum_i h_i(x_i))`` on ``R^n``.

    ``w``, ``grad_w`` and ``hess_w`` take a single point of shape ``(n,)``;
    ``None`` means ``W = 0``.
    """

    h: tuple[Potential1D, ...]
    w: Callable[[np.ndarray], float] | None = None
    grad_w: Callable[[np.ndarray], np.ndarray] | None = None
    hess_w: Callable[[np.ndarray], np.ndarray] | None = None
    w_convex: bool = True
    w_even: bool = True
    h_even: bool = True
    name: str = "product_perturbed"
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(self.h))
        if self.n < 1:
            raise ModelError("dimension must be positive")
        pts = _probe_points(self.n)
        if self.w is not None:
            if self.w_even:
                bad = max(abs(self.w(x) - self.w(-x)) for x in pts)
                if bad > 1e-9:
                    raise ModelError(f"W flagged even but |W(x)-W(-x)| = {bad:.3g}")
            if self.w_convex and self.hess_w is not None:
                low = min(np.linalg.eigvalsh(self.hess_w(x)).min() for x in pts)
                if low < -1e-7:
                    raise ModelError(f"W flagged convex but Hessian eigenvalue {low:.3g}")
        if self.h_even:
            t = np.linspace(0.1, 3.0, 16)
            for hi in self.h:
                if np.max(np.abs(hi.v(t) - hi.v(-t))) > 1e-9:
                    raise ModelError("h flagged even but is not")

    @property
    def n(self) -> int:
        return len(self.h)

    @property
    def has_w(self) -> bool:
        return self.w is not None

    def potential(self, x: np.ndarray) -> float:
        val = float(sum(float(hi.v(np.array([x[i]]))[0]) for i, hi in enumerate(self.h)))
        return val + (float(self.w(x)) if self.w is not None else 0.0)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        diag = np.array([float(hi.d2v(np.array([x[i]]))[0]) for i, hi in enumerate(self.h)])
        hess = np.diag(diag)
        if self.hess_w is not None:
            hess = hess + self.hess_w(x)
        return hess

    def describe(self) -> dict:
        return {"type": self.name, "n": self.n, "params": dict(self.params)}


@dataclass(frozen=True, eq=False)
class RadialModel:
    """``exp(-W(x) - h(|x|^2))`` with ``h`` convex non-decreasing; shifted so ``h(0) = W(0) = 0``."""

    n: int
    h: Callable[[np.ndarray], np.ndarray]
    dh: Callable[[np.ndarray], np.ndarray]
    d2h: Callable[[np.ndarray], np.ndarray] | None = None
    w: Callable[[np.ndarray], float] | None = None
    hess_w: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "radial"
    params: tuple = ()
    h0: float = field(init=False, default=0.0)
    w0: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.n < 2:
            raise ModelError("radial models need n >= 2")
        object.__setattr__(self, "h0", float(np.asarray(self.h(np.array([0.0])))[0]))
        if self.w is not None:
            object.__setattr__(self, "w0", float(self.w(np.zeros(self.n))))
        u = np.linspace(0.0, 50.0, 257)
        if np.min(self.dh(u)) < 0:
            raise ModelError("h must be non-decreasing (h' >= 0)")

    def h_shift(self, u):
        return np.asarray(self.h(np.asarray(u, float)), float) - self.h0

    def potential(self, x: np.ndarray) -> float:
        val = float(self.h_shift(np.array([x @ x]))[0])
        return val + (float(self.w(x)) - self.w0 if self.w is not None else 0.0)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        r2 = np.array([x @ x])
        hess = 2.0 * float(self.dh(r2)[0]) * np.eye(self.n)
        if self.d2h is not None:
            hess = hess + 4.0 * float(self.d2h(r2)[0]) * np.outer(x, x)
        if self.hess_w is not None:
            hess = hess + self.hess_w(x)
        return hess

    def describe(self) -> dict:
        return {"type": self.name, "n": self.n, "params": dict(self.params)}


def subbotin_product(p: float, n: int, w=None, grad_w=None, hess_w=None,
                     w_convex: bool = True, w_even: bool = True) -> ProductPerturbedModel:
    """Product of ``n`` Subbotin factors ``|x_i|^p`` with an optional perturbation ``W``."""
    return ProductPerturbedModel(tuple(subbotin(p) for _ in range(n)), w, grad_w, hess_w,
                                 w_convex, w_even, True, name="subbotin_product",
                                 params=(("p", float(p)), ("n", int(n))))


def gaussian_product(n: int) -> ProductPerturbedModel:
    return ProductPerturbedModel(tuple(gaussian() for _ in range(n)), name="gaussian_product",
                                 params=(("n", int(n)),))


def radial_subbotin(p: float, n: int) -> RadialModel:
    """``exp(-|x|^(2p))``, i.e. ``h(u) = u^p``."""
    if not p >= 1:
        raise DomainError("radial Subbotin needs p >= 1")
    p = float(p)
    return RadialModel(int(n), lambda u: np.asarray(u, float) ** p,
                       lambda u: p * np.asarray(u, float) ** (p - 1),
                       (lambda u: p * (p - 1) * np.asarray(u, float) ** (p - 2)) if p != 1 else
                       (lambda u: np.zeros_like(np.asarray(u, float))),
                       name="radial_subbotin", params=(("p", p), ("n", int(n))))


# ------------------------------------------------------------- sampling


@dataclass(frozen=True, eq=False)
class SampleBatch:
    points: np.ndarray
    seed: int
    acceptance_rate: float
    scales: np.ndarray

    def mean(self, values) -> float:
        return float(np.mean(values))

    def stderr(self, values) -> float:
        """Batch-means standard error (50 batches)."""
        return batch_means_se(values)


def sample(model, size: int, seed: int, burn_in: int = 10_000, chain: int = 0) -> SampleBatch:
    """Random-walk Metropolis with per-coordinate scales adapted during burn-in.

    The generator is seeded from ``splitmix64(seed, chain)``, so a fixed
    ``(model, size, seed, chain)`` reproduces the batch bit for bit.
    """
    if size < 1:
        raise DomainError("size must be positive")
    return _sample_cached(model, int(size), int(seed), int(burn_in), int(chain))


@functools.lru_cache(maxsize=16)
def _sample_cached(model, size, seed, burn_in, chain) -> SampleBatch:
    n = model.n
    rng = np.random.default_rng(splitmix64(seed, chain))
    logpi = lambda y: -model.potential(y)  # noqa: E731
    x = np.zeros(n)
    lp = logpi(x)
    scales = np.full(n, 2.4 / math.sqrt(n))
    total = burn_in + size
    steps = rng.standard_normal((total, n))
    unif = rng.random(total)
    out = np.empty((size, n))
    window_acc = 0
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    kept_acc = 0
    for k in range(total):
        y = x + scales * steps[k]
        ly = logpi(y)
        if math.log(unif[k] + 1e-300) < ly - lp:
            x, lp = y, ly
            if k < burn_in:
                window_acc += 1
            else:
                kept_acc += 1
        if k < burn_in:
            s1 += x
            s2 += x * x
            if (k + 1) % 500 == 0:
                rate = window_acc / 500.0
                m = k + 1
                sd = np.sqrt(np.maximum(s2 / m - (s1 / m) ** 2, 1e-12))
                scales = np.where(m >= 2000, 2.4 / math.sqrt(n) * sd, scales) * math.exp(rate - 0.3)
                window_acc = 0
        else:
            out[k - burn_in] = x
    rate = kept_acc / size
    if not (0.1 <= rate <= 0.9):
        raise SamplingError(f"Metropolis acceptance rate {rate:.3f} outside [0.1, 0.9]")
    out.setflags(write=False)
    return SampleBatch(out, seed, rate, scales)


# ------------------------------------------------------- Hessian tails


class Estimate(NamedTuple):
    value: float
    stderr: float


class CurvatureTail1D:
    """Fast evaluator of ``u -> mu(1/V'' >= u)`` for a 1-D grid measure.

    The density is integrated once on a fine grid (cumulative Simpson rule).
    Inside each cell ``V''`` is taken linear, so the level distribution
    ``F(L) = mu(V'' <= L)`` is piecewise linear in ``L`` with breakpoints at
    the nodal curvatures; it is tabulated once, after which both the tail
    and its generalized inverse are table lookups. Points with ``V'' <= 0``
    belong to every tail event.
    """

    def __init__(self, m: GridMeasure1D, fine: int = 20_001):
        from scipy.integrate import cumulative_simpson

        x = np.linspace(m.window[0], m.window[1], fine)
        with np.errstate(all="ignore"):
            dens = np.exp(-(np.asarray(m.source.v(x), float) - m.v_min))
            curv = np.asarray(m.source.d2v(x), float)
        dens = np.where(np.isfinite(dens), dens, 0.0)
        cdf = np.concatenate([[0.0], cumulative_simpson(dens, x=x)])
        self.x = x
        self.cdf = cdf / cdf[-1]
        self.curv = curv
        self._tabulate()
        self.order, self.u_star, self.tail_star = self._zero_order()

    def _tabulate(self) -> None:
        c0, c1 = self.curv[:-1], self.curv[1:]
        mass = np.diff(self.cdf)
        lo, hi = np.minimum(c0, c1), np.maximum(c0, c1)
        flat = hi == lo
        slope = np.where(flat, 0.0, mass / np.where(flat, 1.0, hi - lo))
        levels = np.unique(np.concatenate([lo, hi]))
        # F at each breakpoint: full cells below plus the ramp of straddling cells
        d_slope = np.zeros(len(levels))
        np.add.at(d_slope, np.searchsorted(levels, lo[~flat]), slope[~flat])
        np.add.at(d_slope, np.searchsorted(levels, hi[~flat]), -slope[~flat])
        steps = np.zeros(len(levels))
        np.add.at(steps, np.searchsorted(levels, lo[flat]), mass[flat])
        run_slope = np.cumsum(d_slope)
        ramps = np.concatenate([[0.0], np.cumsum(run_slope[:-1] * np.diff(levels))])
        self.levels = levels
        self._steps = steps
        self.level_cdf = np.clip(ramps + np.cumsum(steps), 0.0, 1.0)
        self.level_cdf[-1] = 1.0

    def level_cdf_at(self, level: float) -> float:
        """``mu(V'' <= level)`` on the grid."""
        lv, fv = self.levels, self.level_cdf
        if level < lv[0]:
            return 0.0
        if level >= lv[-1]:
            return 1.0
        k = int(np.searchsorted(lv, level, side="right")) - 1
        if level == lv[k]:
            return float(fv[k])
        # linear ramp to the left limit at the next breakpoint
        nxt = k + 1
        left_next = fv[nxt] - self._step_at(nxt)
        return float(fv[k] + (left_next - fv[k]) * (level - lv[k]) / (lv[nxt] - lv[k]))

    def _step_at(self, k: int) -> float:
        return float(self._steps[k])

    def _zero_order(self) -> tuple[float, float, float]:
        """Detect an isolated zero of ``V''`` and fit ``V'' ~ |x - x0|^a`` around it.

        Below the grid scale the tail is then continued as ``u^{-1/a}``, which
        is what decides whether Hessian-inverse moments converge.
        """
        c = self.curv
        j = int(np.argmin(c))
        k = 16
        if j < k or j >= len(c) - k:
            return math.nan, math.inf, 0.0
        ref = max(c[j - k], c[j + k])
        if not (ref > 0 and c[j] < 1e-6 * ref):
            return math.nan, math.inf, 0.0
        if np.count_nonzero(c[j - k:j + k + 1] <= 1e-6 * ref) > 3:
            return math.nan, math.inf, 0.0     # a flat stretch, not an isolated zero
        dist = self.x[j + 4:j + k + 1] - self.x[j]
        vals = c[j + 4:j + k + 1]
        order = float(np.polyfit(np.log(dist), np.log(vals), 1)[0])
        if not order > 0:
            return math.nan, math.inf, 0.0
        u_star = 1.0 / c[j + 4]
        return order, u_star, self.level_cdf_at(1.0 / u_star)

    def __call__(self, u: float) -> float:
        if u <= 0:
            return 1.0
        if u > self.u_star:
            return self.tail_star * (u / self.u_star) ** (-1.0 / self.order)
        return self.level_cdf_at(1.0 / u)

    def beta(self, s: float) -> float:
        """Generalized inverse ``inf{u > 0 : tail(u) <= s}``."""
        if s >= 1.0:
            return 0.0
        if s < self.tail_star:
            return self.u_star * (s / self.tail_star) ** (-self.order)
        lv, fv = self.levels, self.level_cdf
        # largest level L with F(L) <= s; F is right-continuous and nondecreasing
        k = int(np.searchsorted(fv, s, side="right")) - 1
        if k < 0:
            return math.inf if lv[0] <= 0 else 1.0 / lv[0]
        if k == len(lv) - 1:
            return 0.0
        nxt = k + 1
        left_next = fv[nxt] - self._step_at(nxt)
        if left_next > s and left_next > fv[k]:
            level = lv[k] + (s - fv[k]) * (lv[nxt] - lv[k]) / (left_next - fv[k])
        else:
            level = lv[nxt]
        return math.inf if level <= 0 else 1.0 / level


_TAIL_CACHE: dict = {}


def _curvature_tail(m: GridMeasure1D) -> CurvatureTail1D:
    hit = _TAIL_CACHE.get(id(m))
    if hit is not None and hit[0] is m:
        return hit[1]
    tail = CurvatureTail1D(m)
    if len(_TAIL_CACHE) > 32:
        _TAIL_CACHE.clear()
    _TAIL_CACHE[id(m)] = (m, tail)
    return tail


def _hessian_tail_1d(m: GridMeasure1D, s: float) -> float:
    return _curvature_tail(m)(s)


def hessian_norms(model, batch: SampleBatch, norm: str = "hs") -> np.ndarray:
    """Per-sample ``|Hess^{-1} V|_HS`` or, for product models, ``max_i 1/h_i''(x_i)``.

    Singular Hessians give ``inf`` (always inside every tail event).
    """
    pts = batch.points
    if norm == "min_curvature":
        if not isinstance(model, ProductPerturbedModel):
            raise DomainError("min_curvature norm needs a product model")
        curv = np.column_stack([hi.d2v(pts[:, i]) for i, hi in enumerate(model.h)])
        with np.errstate(divide="ignore"):
            return np.where(curv.min(axis=1) > 0, 1.0 / curv.min(axis=1), np.inf)
    if norm != "hs":
        raise DomainError(f"unknown norm {norm!r}")
    out = np.empty(len(pts))
    for k, x in enumerate(pts):
        ev = np.linalg.eigvalsh(model.hessian(x))
        out[k] = math.sqrt(float(np.sum(1.0 / ev ** 2))) if ev.min() > 0 else math.inf
    return out


def hessian_tail(model, s, method: str = "quadrature", seed: int = 0, size: int = 100_000,
                 norm: str = "hs") -> Estimate:
    """``mu(|Hess^{-1} V|_HS >= s)``.

    1-D models (a :class:`GridMeasure1D`) use quadrature over the region
    ``1/V'' >= s``; n-D models use Monte Carlo with a batch-means error bar.
    ``norm="min_curvature"`` selects the event ``min_i h_i''(x_i) <= 1/s``.
    """
    if not s > 0:
        raise DomainError("s must be positive")
    if isinstance(model, GridMeasure1D) and method == "quadrature":
        return Estimate(_hessian_tail_1d(model, float(s)), 0.0)
    if isinstance(model, GridMeasure1D):
        model = ProductPerturbedModel((model.source,), name="embedded_1d")
    if method not in ("monte_carlo", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    batch = sample(model, size, seed)
    norms = _cached_norms(model, size, seed, norm, batch)
    ind = (norms >= s).astype(float)
    return Estimate(float(ind.mean()), batch.stderr(ind))


_NORM_CACHE: dict = {}


def _cached_norms(model, size, seed, norm, batch):
    key = (id(model), size, seed, norm)
    hit = _NORM_CACHE.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    val = hessian_norms(model, batch, norm)
    if len(_NORM_CACHE) > 16:
        _NORM_CACHE.clear()
    _NORM_CACHE[key] = (model, val)
    return val


def hessian_tail_fn(m: GridMeasure1D) -> Callable[[float], float]:
    """``u -> mu(1/V'' >= u)`` for a 1-D grid measure, as a plain function."""
    return _curvature_tail(m)


def marginal_curvature_tail(pot: Potential1D, s: float, resolution: int = 4001) -> float:
    """``mu_1(h'' <= 1/s)`` for a single factor."""
    return _hessian_tail_1d(build_grid(pot, resolution), s)


def marginal_alpha_ratio(model: ProductPerturbedModel, i: int | None = None, seed: int = 0,
                         size: int = 100_000) -> Estimate:
    """Monte Carlo estimate of ``Z_i^{-1} rho_i(0)``: the slice-at-zero over full-space integral ratio.

    Uses ``E_mu[exp(W(x) - W(x with x_i = 0))] / int exp(-h_i)``. With
    ``i=None`` the maximum over coordinates is returned.
    """
    batch = sample(model, size, seed)
    idx = range(model.n) if i is None else [int(i)]
    best: Estimate | None = None
    for j in idx:
        hj = model.h[j]
        cj, _ = integrate.quad(lambda t: math.exp(-float(hj.v(np.array([t]))[0])), -math.inf, math.inf)
        if model.w is None:
            wts = np.ones(len(batch.points))
        else:
            diff = np.empty(len(batch.points))
            for k, x in enumerate(batch.points):
                y = x.copy()
                y[j] = 0.0
                diff[k] = model.w(x) - model.w(y)
            wts = np.exp(diff)
        ess = wts.sum() ** 2 / np.sum(wts ** 2)
        if ess < 100:
            raise SamplingError(f"effective sample size {ess:.1f} below 100")
        est = Estimate(float(wts.mean() / cj), batch.stderr(wts) / cj)
        if best is None or est.value > best.value:
            best = est
    return best


def subbotin_alpha_exact(p: float) -> float:
    """``1 / int exp(-|t|^p) dt = 1 / (2 Gamma(1 + 1/p))``."""
    return 1.0 / (2.0 * special.gamma(1.0 + 1.0 / p))


# ------------------------------------------------------------- radial


def radial_moments(model: RadialModel) -> dict:
    """``Z`` over the sphere area, ``mu(|x|^2)`` and ball volume for ``W = 0``."""
    if model.w is not None:
        raise DomainError("radial quadrature is exact only for W = 0")
    n = model.n
    f0 = lambda r: r ** (n - 1) * math.exp(-float(model.h_shift(np.array([r * r]))[0]))  # noqa: E731
    f2 = lambda r: r ** (n + 1) * math.exp(-float(model.h_shift(np.array([r * r]))[0]))  # noqa: E731
    i0, _ = integrate.quad(f0, 0, math.inf, limit=400)
    i2, _ = integrate.quad(f2, 0, math.inf, limit=400)
    ball = math.pi ** (n / 2) / special.gamma(n / 2 + 1)
    return {"radial_integral": i0, "second_moment": i2 / i0, "ball_volume": ball,
            "z": n * ball * i0}


def radial_tail(m: GridMeasure1D, r: float) -> float:
    """``mu(|x| >= r)`` by quadrature on a 1-D grid measure."""
    if r <= 0:
        return 1.0
    total = m.integrate(lambda y: 1.0)
    inner = m.integrate(lambda y: 1.0, -r, r) if r > 0 else 0.0
    return max(0.0, 1.0 - inner / total)


def product_hessian_tail_oracle(factors: Sequence[Potential1D], s: float,
                                resolution: int = 4001) -> float:
    """``mu(min_i h_i''(x_i) <= 1/s)`` for ``W = 0`` from 1-D factor quadrature."""
    keep = 1.0
    for pot in factors:
        keep *= 1.0 - marginal_curvature_tail(pot, s, resolution)
    return 1.0 - keep
