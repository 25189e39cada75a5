"""Super-Poincaré profiles with an L^p remainder, their Gamma2 counterparts,
the conversions between them and semigroup checks on discretized measures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError
from .ratefn import Affine, Constant, FunctionRate, Power, Product, RateFunction, ZeroBeyond, \
    from_json
from .spectral import DiscreteGenerator, default_family

FLAVORS = ("spi", "centered_spi", "sig2")
_PROBE = np.geomspace(1e-6, 1e6, 97)


@dataclass(frozen=True, eq=False)
class SpiProfile:
    """``beta`` for one of three inequalities (``q = p`` below):

    ``spi``           ``mu(f^2)     <= s mu(|f'|^2)    + beta(s) |f|_q^2``
    ``centered_spi``  ``Var(f)      <= s mu(|f'|^2)    + beta(s) |f - mu f|_q^2``
    ``sig2``          ``mu(|f'|^2)  <= s mu((Af)^2)    + beta(s) |f|_q^2``
    """

    p: float
    beta: RateFunction
    flavor: str = "spi"

    def __post_init__(self):
        if not (1.0 <= self.p < 2.0):
            raise DomainError("p must lie in [1, 2)")
        if self.flavor not in FLAVORS:
            raise DomainError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "spi":
            low = float(np.min(self.beta.raw(_PROBE)))
            if low < 1.0 - 1e-12:
                raise DomainError("an spi profile must satisfy beta(s) >= 1 (test on constants)")

    def value(self, s: float) -> float:
        return self.beta.value(s)

    def to_json(self) -> dict:
        return {"p": self.p, "flavor": self.flavor, "beta": self.beta.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "SpiProfile":
        return cls(float(obj["p"]), from_json(obj["beta"]), obj.get("flavor", "spi"))


def centered_to_plain(profile: SpiProfile, cp: float) -> SpiProfile:
    """``beta = 1 + 4 beta_c`` with ``beta_c`` set to 0 from ``s = cp`` on."""
    if profile.flavor != "centered_spi":
        raise DomainError("centered_to_plain expects a centered_spi profile")
    if not (0 < cp < math.inf):
        raise DomainError("cp must be finite and positive")
    beta = Affine(ZeroBeyond(profile.beta, float(cp)), scale=4.0, shift=1.0)
    return SpiProfile(profile.p, beta, "spi")


def spi_to_sig2(profile: SpiProfile) -> SpiProfile:
    """Cauchy-Schwarz step: ``beta_out(s) = beta(2s/3) / (4s/3)``."""
    if profile.flavor != "spi":
        raise DomainError("spi_to_sig2 expects an spi profile")
    beta = Product(Affine(profile.beta, arg_scale=2.0 / 3.0), Power(0.75, 1.0))
    return SpiProfile(profile.p, beta, "sig2")


def sig2_to_spi(profile: SpiProfile, p: float, cp: float, k_p: float = 1.0) -> tuple[SpiProfile, list]:
    """``beta_out = 1 + 4 k_p beta``; needs ``p > 1``.

    ``k_p`` is the L^p contraction constant of the semigroup on centered
    functions; it is supplied by the caller (no value is known in closed form)
    and the returned flag list records this.
    """
    if profile.flavor != "sig2":
        raise DomainError("sig2_to_spi expects a sig2 profile")
    if p <= 1.0:
        raise DomainError("p = 1 is excluded: the L^p contraction constant diverges as p -> 1")
    if not (0 < cp < math.inf):
        raise DomainError("cp must be finite and positive")
    if not k_p > 0:
        raise DomainError("k_p must be positive")
    beta = Affine(profile.beta, scale=4.0 * k_p, shift=1.0)
    flags = ["K_p caller-supplied"] if k_p == 1.0 else []
    return SpiProfile(float(p), beta, "spi"), flags


def lp_norm_sq(g: DiscreteGenerator, f: np.ndarray, p: float) -> np.ndarray:
    """``mu(|f|^p)^(2/p)`` with the grid weights (works column-wise)."""
    f = np.asarray(f, float)
    return (g.weights @ np.abs(f) ** p) ** (2.0 / p)


class SpiCheck(NamedTuple):
    passed: bool
    flavor: str
    worst_slack: float
    worst_relative: float
    s_star: float
    t_star: float
    n_checked: int
    strong_worst_relative: float


DEFAULT_S_GRID = np.geomspace(1e-3, 1e2, 48)


def _profile_at(beta: RateFunction, s: float) -> float:
    return beta.value(float(s))


def check_spi_semigroup(g: DiscreteGenerator, profile: SpiProfile, f0, times: Sequence[float],
                        s_grid: Sequence[float] | None = None, tol: float = 1e-8) -> SpiCheck:
    """Check the semigroup form of an spi or sig2 profile on the evolution of ``f0``.

    ``spi``:  ``mu((P_t f)^2)   <= e^{-2t/s} mu(f^2)      + beta(s) |f|_p^2 (1 - e^{-2t/s})``
    ``sig2``: ``mu(|(P_t f)'|^2) <= e^{-2t/s} mu(|f'|^2) + beta(s) |f|_p^2 (1 - e^{-2t/s})``

    For ``sig2`` the variant with ``|P_t f|_p`` in place of ``|f|_p`` is
    evaluated too and its worst relative slack reported separately.
    """
    if profile.flavor not in ("spi", "sig2"):
        raise DomainError("check_spi_semigroup needs an spi or sig2 profile")
    f0 = np.asarray(f0, float)
    t = np.asarray(sorted(float(x) for x in times))
    a = g.coefficients(f0)
    decay = np.exp(-np.outer(g.eigenvalues, t))
    paths = g.eigenvectors @ (decay * a[:, None])           # (N, len(t))
    w = g.weights
    if profile.flavor == "spi":
        lhs = w @ paths ** 2
        start = float(w @ f0 ** 2)
    else:
        lhs = g.dirichlet(paths)
        start = float(g.dirichlet(f0))
    norm0 = float(lp_norm_sq(g, f0, profile.p))
    norm_t = lp_norm_sq(g, paths, profile.p)
    s_vals = DEFAULT_S_GRID if s_grid is None else np.asarray(s_grid, float)
    scale = max(start, norm0, 1e-300)
    worst = (math.inf, math.inf, math.nan, math.nan)
    strong = math.inf
    for s in s_vals:
        b = _profile_at(profile.beta, s)
        e = np.exp(-2.0 * t / s)
        with np.errstate(invalid="ignore"):
            rem = np.where(e < 1.0, b * norm0 * (1.0 - e), 0.0)
            rem_t = np.where(e < 1.0, b * norm_t * (1.0 - e), 0.0)
        slack = e * start + rem - lhs
        i = int(np.argmin(slack))
        if slack[i] / scale < worst[1]:
            worst = (float(slack[i]), float(slack[i] / scale), float(s), float(t[i]))
        if profile.flavor == "sig2":
            strong = min(strong, float(np.min(e * start + rem_t - lhs)) / scale)
    return SpiCheck(worst[1] >= -tol, profile.flavor, worst[0], worst[1], worst[2], worst[3],
                    len(s_vals) * len(t), strong)


class DerivativeCheck(NamedTuple):
    fd_derivative: float
    exact_derivative: float
    static_slack: float
    fd_static_slack: float
    delta: float
    ok: bool


def spi_derivative_check(g: DiscreteGenerator, profile: SpiProfile, f0, s: float,
                         delta: float = 1e-4) -> DerivativeCheck:
    """Differentiate the semigroup display at ``t = 0`` by a forward difference.

    The exact derivative of the left side is ``-2 mu(|f'|^2)`` (spi) or
    ``-2 mu((Af)^2)`` (sig2). Rearranged, ``(s/2)(RHS'(0) - LHS'(0))`` is the
    slack of the static inequality; the finite-difference version must match
    it to ``O(delta)``.
    """
    f0 = np.asarray(f0, float)
    w = g.weights
    b = profile.value(s)
    norm = float(lp_norm_sq(g, f0, profile.p))
    ft = g.semigroup(f0, delta)
    if profile.flavor == "spi":
        l0, ld = float(w @ f0 ** 2), float(w @ ft ** 2)
        exact = -2.0 * float(g.dirichlet(f0))
        static = s * float(g.dirichlet(f0)) + b * norm - l0
    elif profile.flavor == "sig2":
        l0, ld = float(g.dirichlet(f0)), float(g.dirichlet(ft))
        af = g.apply(f0)
        exact = -2.0 * float(w @ af ** 2)
        static = s * float(w @ af ** 2) + b * norm - l0
    else:
        raise DomainError("derivative check needs an spi or sig2 profile")
    fd = (ld - l0) / delta
    rhs_prime = (2.0 / s) * (b * norm - l0)
    fd_static = 0.5 * s * (rhs_prime - fd)
    # Taylor: |fd - L'(0)| <= (delta/2) max |L''|
    allowed = 0.5 * delta * _second_derivative_bound(g, f0, profile.flavor)
    ok = abs(fd - exact) <= allowed * (1.0 + 1e-6) + 1e-10 * max(abs(exact), abs(l0))
    return DerivativeCheck(fd, exact, static, fd_static, delta, bool(ok))


def _second_derivative_bound(g: DiscreteGenerator, f0: np.ndarray, flavor: str) -> float:
    a = g.coefficients(f0)
    lam = g.eigenvalues
    power = 3 if flavor == "sig2" else 2
    return float(np.sum(4.0 * lam ** power * a ** 2))


def spi_witness_family(g: DiscreteGenerator, flow_times: Sequence[float] | None = None) -> np.ndarray:
    """Witness functions for the spi profile.

    The spectral default family, the constant, shifted copies and one-sided
    tail ramps, together with their images under ``P_u`` for ``u`` in
    ``flow_times``; closing the family under the semigroup matters because
    the semigroup form of the inequality is tested on exactly those images.
    """
    base = default_family(g)
    x = g.measure.nodes
    cdf = np.cumsum(g.weights)
    qs = np.concatenate([np.geomspace(1e-6, 0.2, 12), 1.0 - np.geomspace(1e-6, 0.2, 12)])
    centers = np.interp(qs, cdf, x)
    ramps = np.maximum(np.sign(centers)[None, :] * (x[:, None] - centers[None, :]), 0.0)
    fam = np.hstack([np.ones((len(x), 1)), base, 1.0 + base, ramps])
    us = np.geomspace(1e-4, 10.0, 25) if flow_times is None else np.asarray(flow_times, float)
    coef = g.eigenvectors.T @ (g.weights[:, None] * fam)
    flows = [g.eigenvectors @ (np.exp(-g.eigenvalues * u)[:, None] * coef) for u in us]
    return np.hstack([fam] + flows)


def empirical_spi_beta(g: DiscreteGenerator, s: float, p: float, family=None) -> float:
    """``max_f (mu(f^2) - s mu(|f'|^2))_+ / |f|_p^2``: a lower bound for the optimal spi profile."""
    return float(empirical_spi_curve(g, [s], p, family)[0])


def empirical_spi_curve(g: DiscreteGenerator, s_vals: Sequence[float], p: float,
                        family=None) -> np.ndarray:
    """:func:`empirical_spi_beta` on many ``s`` with the family statistics computed once."""
    if not (1.0 <= p < 2.0):
        raise DomainError("p must lie in [1, 2)")
    fam = spi_witness_family(g) if family is None else np.asarray(family, float)
    if fam.ndim == 1:
        fam = fam[:, None]
    m2 = g.weights @ fam ** 2
    energy = g.dirichlet(fam)
    den = lp_norm_sq(g, fam, p)
    ok = den > 0
    m2, energy, den = m2[ok], energy[ok], den[ok]
    out = [float(np.max(np.maximum(m2 - s * energy, 0.0) / den, initial=0.0)) for s in s_vals]
    return np.array(out)


def fit_exp_profile(g: DiscreteGenerator, p: float, s_grid: Sequence[float] | None = None,
                    safety: float = 1.5) -> tuple[SpiProfile, dict]:
    """Conservative ``max(1, a e^{b/s})`` dominating ``safety`` times the empirical witness.

    ``b`` is scanned on a log grid; for each ``b`` the smallest admissible
    ``a`` is taken, and the pair with the smallest ``a e^{b/s}`` at the
    median grid point wins.
    """
    s_vals = np.geomspace(1e-2, 1e1, 40) if s_grid is None else np.asarray(s_grid, float)
    wit = empirical_spi_curve(g, s_vals, p) * safety
    best = None
    mid = float(np.median(s_vals))
    for b in np.geomspace(1e-3, 10.0, 80):
        a = float(np.max(wit * np.exp(-b / s_vals)))
        a = max(a, 1e-12)
        score = a * math.exp(b / mid)
        if best is None or score < best[0]:
            best = (score, a, float(b))
    _, a, b = best
    return log_sobolev_profile(a, b, p), {"a": a, "b": b, "safety": safety,
                                        "s_grid": s_vals.tolist(), "witness": (wit / safety).tolist()}


def shrink(profile: SpiProfile, factor: float) -> SpiProfile:
    """Scale ``beta`` by ``factor`` (falsification probes); the spi floor check is skipped."""
    beta = Affine(profile.beta, scale=float(factor))
    obj = object.__new__(SpiProfile)
    object.__setattr__(obj, "p", profile.p)
    object.__setattr__(obj, "beta", beta)
    object.__setattr__(obj, "flavor", profile.flavor)
    return obj


def log_sobolev_profile(a: float, b: float, p: float = 1.0) -> SpiProfile:
    """``max(1, a e^{b/s})`` as an spi profile (``inf`` once the exponential overflows)."""
    def beta(s):
        with np.errstate(over="ignore"):
            return np.maximum(1.0, a * np.exp(b / np.asarray(s, float)))

    return SpiProfile(p, FunctionRate(beta, label=f"max(1,{a:.6g}*exp({b:.6g}/s))"), "spi")


def unit_profile(p: float = 1.0) -> SpiProfile:
    return SpiProfile(p, Constant(1.0), "spi")
