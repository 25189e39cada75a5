"""Finite-volume discretization of the diffusion generator ``A = d^2 - V' d``
on a 1-D grid measure, with exact spectral evolution and empirical witnesses
for weak inequalities.

The no-flux scheme uses edge masses ``m_e`` (midpoint density times spacing)
and conductances ``c_e = m_e / h^2``. With node weights ``w``, the operator
``-A = W^{-1} L`` is self-adjoint in ``<f, g> = sum w f g`` and
``<f, -A f> = sum_e c_e (f_{e+1} - f_e)^2`` exactly. Its nonzero spectrum is
computed from the ``(N-1) x (N-1)`` tridiagonal matrix ``B B^T`` where
``B = C^{1/2} D W^{-1/2}``, which keeps the zero eigenvalue exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg

from .exceptions import DomainError, ModelError, NumericError
from .measures import GridMeasure1D
from .ratefn import RateFunction

MAX_NODES = 8192


@dataclass(frozen=True, eq=False)
class DiscreteGenerator:
    measure: GridMeasure1D
    conductances: np.ndarray
    edge_mass: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    @property
    def h(self) -> float:
        return self.measure.h

    def matrix_diagonals(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of ``W^{1/2} (-A) W^{-1/2}``."""
        c, w = self.conductances, self.weights
        cpad = np.concatenate([[0.0], c, [0.0]])
        diag = (cpad[:-1] + cpad[1:]) / w
        off = -c / np.sqrt(w[:-1] * w[1:])
        return diag, off

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Midpoint differences ``(f_{e+1} - f_e) / h``; works along axis 0."""
        return np.diff(f, axis=0) / self.h

    def dirichlet(self, f: np.ndarray) -> np.ndarray | float:
        d = np.diff(f, axis=0)
        c = self.conductances if np.ndim(f) == 1 else self.conductances[:, None]
        return np.sum(c * d * d, axis=0)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """``A f`` on node values (axis 0)."""
        c = self.conductances if np.ndim(f) == 1 else self.conductances[:, None]
        flux = c * np.diff(f, axis=0)
        zero = np.zeros((1,) + np.shape(f)[1:])
        lap = np.concatenate([zero, flux]) - np.concatenate([flux, zero])
        w = self.weights if np.ndim(f) == 1 else self.weights[:, None]
        return -lap / w

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        return self.eigenvectors.T @ (self.weights * np.asarray(f, float))

    def semigroup(self, f: np.ndarray, t: float) -> np.ndarray:
        """``P_t f`` by spectral calculus."""
        a = self.coefficients(f)
        return self.eigenvectors @ (np.exp(-self.eigenvalues * t) * a)


def discretize(m: GridMeasure1D) -> DiscreteGenerator:
    """Build the no-flux finite-volume generator and its full eigen-decomposition."""
    x = m.nodes
    N = len(x)
    if N < 16:
        raise DomainError("need at least 16 nodes")
    if N > MAX_NODES:
        raise DomainError(f"at most {MAX_NODES} nodes are supported")
    h = m.h
    mid = 0.5 * (x[:-1] + x[1:])
    with np.errstate(all="ignore"):
        dens = np.exp(-(np.asarray(m.source.v(mid), float) - m.v_min))
    dens = np.where(np.isfinite(dens), dens, 0.0)
    mass = dens * h
    mass = mass / mass.sum()
    c = mass / h ** 2
    w = m.weights
    if np.any(w <= 0) or np.any(c <= 0):
        raise ModelError("grid has nodes or edges with zero mass")
    d = c * (1.0 / w[:-1] + 1.0 / w[1:])
    e = -np.sqrt(c[:-1] * c[1:]) / w[1:-1]
    try:
        sig2, vecs = linalg.eigh_tridiagonal(d, e, lapack_driver="stemr")
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(sig2)):
        raise NumericError("eigensolver returned non-finite eigenvalues")
    sig2 = np.maximum(sig2, 0.0)
    sig = np.sqrt(sig2)
    if sig[0] <= 0:
        raise ModelError("degenerate spectral gap: smallest nonzero eigenvalue is 0")
    sc, sw = np.sqrt(c), np.sqrt(w)
    u = np.zeros((N, N - 1))
    u[:-1] -= (sc / sw[:-1])[:, None] * vecs
    u[1:] += (sc / sw[1:])[:, None] * vecs
    del vecs
    u /= sig[None, :]
    u /= sw[:, None]
    phi = np.empty((N, N))
    phi[:, 0] = 1.0
    phi[:, 1:] = u
    lam = np.concatenate([[0.0], sig2])
    return DiscreteGenerator(m, c, mass, lam, phi)


def poincare_constant(g: DiscreteGenerator) -> float:
    """``1 / lambda_1``."""
    lam1 = float(g.eigenvalues[1])
    if lam1 <= 1e-10:
        raise ModelError(f"degenerate spectral gap; low spectrum {g.eigenvalues[:4].tolist()}")
    overlap = abs(float(g.weights @ g.eigenvectors[:, 1]))
    if overlap > 1e-6:
        raise NumericError(f"first eigenvector is not orthogonal to constants ({overlap:.3g})")
    return 1.0 / lam1


def integrated_gamma2_constant(g: DiscreteGenerator) -> float:
    """``sup_f <f, -Af> / <Af, Af>`` over non-constant eigenvectors.

    Computed from the operator applied to each eigenvector, independently of
    the stored eigenvalues, and checked against the Poincaré constant.
    """
    phi = g.eigenvectors[:, 1:]
    energy = g.dirichlet(phi)
    a_phi = g.apply(phi)
    b = g.weights @ (a_phi * a_phi)
    ratio = float(np.max(energy / b))
    cp = poincare_constant(g)
    if abs(ratio - cp) > 1e-8 * cp:
        raise NumericError(f"integrated Gamma2 constant {ratio!r} differs from 1/lambda_1 {cp!r}")
    return ratio


# ------------------------------------------------------------------ evolution


@dataclass(frozen=True, eq=False)
class DecayCurve:
    times: np.ndarray
    variance: np.ndarray
    grad_energy: np.ndarray
    gamma2_energy: np.ndarray
    sup_grad: np.ndarray
    osc0: float
    var0: float
    grad0: float
    sup_grad0: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", "variance", "grad_energy", "sup_grad"])
        for row in zip(self.times, self.variance, self.grad_energy, self.sup_grad):
            wr.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def evolve(g: DiscreteGenerator, f0, times: Sequence[float]) -> DecayCurve:
    """Exact evolution of ``f0`` under the discrete semigroup at each time."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise DomainError("times must be nonnegative and non-decreasing")
    f0 = np.asarray(f0, dtype=float)
    a = g.coefficients(f0)
    lam = g.eigenvalues
    a2 = a[1:] ** 2
    decay = np.exp(-2.0 * np.outer(t, lam[1:]))
    var = decay @ a2
    grad = decay @ (lam[1:] * a2)
    gam2 = decay @ (lam[1:] ** 2 * a2)
    sup = np.empty(len(t))
    for k, tk in enumerate(t):
        ft = g.eigenvectors @ (np.exp(-lam * tk) * a)
        sup[k] = np.max(np.abs(g.gradient(ft)))
    mean = float(g.weights @ f0)
    return DecayCurve(t, var, grad, gam2, sup, float(f0.max() - f0.min()),
                      float(g.weights @ (f0 - mean) ** 2), float(g.dirichlet(f0)),
                      float(np.max(np.abs(g.gradient(f0)))))


def spectrum_csv(g: DiscreteGenerator, count: int | None = None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["k", "lambda"])
    lam = g.eigenvalues if count is None else g.eigenvalues[:count]
    for k, v in enumerate(lam):
        wr.writerow([k, f"{v:.12g}"])
    return buf.getvalue()


# ------------------------------------------------------------------ witnesses


def smoothed_steps(g: DiscreteGenerator, count: int = 32, width: float | None = None) -> np.ndarray:
    """``tanh((x - c_j)/width)`` centred at the interior ``mu``-quantiles; shape ``(N, count)``."""
    x = g.measure.nodes
    cdf = np.cumsum(g.weights)
    qs = np.arange(1, count + 1) / (count + 1)
    centers = np.interp(qs, cdf, x)
    if width is None:
        mean = g.weights @ x
        width = 0.25 * math.sqrt(float(g.weights @ (x - mean) ** 2))
    return np.tanh((x[:, None] - centers[None, :]) / width)


def default_family(g: DiscreteGenerator, n_eig: int = 32, n_steps: int = 32) -> np.ndarray:
    """Eigenvectors ``1..n_eig`` and ``n_steps`` smoothed indicators as columns."""
    k = min(n_eig, len(g.eigenvalues) - 1)
    return np.hstack([g.eigenvectors[:, 1:k + 1], smoothed_steps(g, n_steps)])


class FamilyStats(NamedTuple):
    variance: np.ndarray
    osc: np.ndarray
    energy: np.ndarray
    gamma2: np.ndarray
    sup_grad2: np.ndarray


def family_stats(g: DiscreteGenerator, family: np.ndarray) -> FamilyStats:
    fam = np.asarray(family, dtype=float)
    if fam.ndim == 1:
        fam = fam[:, None]
    w = g.weights
    mean = w @ fam
    var = w @ (fam - mean) ** 2
    af = g.apply(fam)
    return FamilyStats(var, fam.max(axis=0) - fam.min(axis=0), g.dirichlet(fam),
                       w @ (af * af), np.max(g.gradient(fam) ** 2, axis=0))


def _stats(g, family):
    return family_stats(g, default_family(g) if family is None else family)


def empirical_wpi_beta(g: DiscreteGenerator, s: float, family=None) -> float:
    """``max_f (Var f - s Osc^2 f)_+ / mu(|f'|^2)``: a lower bound for the optimal weak Poincaré profile."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    st = _stats(g, family)
    ok = st.energy > 0
    num = np.maximum(st.variance - s * st.osc ** 2, 0.0)
    return float(np.max(num[ok] / st.energy[ok], initial=0.0))


def empirical_wig2_beta(g: DiscreteGenerator, s: float, flavor: str = "osc", family=None) -> float:
    """``max_f (mu(|f'|^2) - s K(f))_+ / mu((Af)^2)`` with ``K = Osc^2`` or ``sup |f'|^2``."""
    if s < 0:
        raise DomainError("s must be nonnegative")
    st = _stats(g, family)
    if flavor == "osc":
        k = st.osc ** 2
    elif flavor == "grad":
        k = st.sup_grad2
    else:
        raise DomainError(f"unknown flavor {flavor!r}")
    ok = st.gamma2 > 0
    num = np.maximum(st.energy - s * k, 0.0)
    return float(np.max(num[ok] / st.gamma2[ok], initial=0.0))


# ------------------------------------------------------------------ checks


class SemigroupCheck(NamedTuple):
    passed: bool
    flavor: str
    worst_slack: float
    worst_relative: float
    s_star: float
    t_star: float
    n_checked: int


DEFAULT_S_GRID = np.geomspace(1e-6, 1e2, 64)


def _decay_factor(b: float, t: np.ndarray) -> np.ndarray:
    if b == 0:
        return np.where(t > 0, 0.0, 1.0)
    if math.isinf(b):
        return np.ones_like(t)
    return np.exp(-2.0 * t / b)


def check_semigroup_bounds(g: DiscreteGenerator, f0, beta: RateFunction, flavor: str,
                           times: Sequence[float], s_grid: Sequence[float] | None = None,
                           tol: float = 1e-8) -> SemigroupCheck:
    """Check a candidate profile against the exact discrete evolution of ``f0``.

    Flavors:
      ``osc``  ``F(t) <= e^{-2t/beta(s)} F(0) + s (1 - e^{-2t/beta(s)}) Osc^2(f)``
      ``grad`` ``F(t) <= e^{-2t/beta(s)} F(0) + s sup|f'|^2``
      ``wpi``  ``Var(P_t f) <= e^{-2t/beta(s)} Var(f) + s (1 - e^{-2t/beta(s)}) Osc^2(f)``
    where ``F(t) = mu(|(P_t f)'|^2)``. A violation beyond ``tol`` times the
    scale of the right-hand side marks the certificate invalid.
    """
    curve = evolve(g, f0, times)
    t = curve.times
    s_vals = DEFAULT_S_GRID if s_grid is None else np.asarray(s_grid, float)
    if flavor == "osc":
        lhs, start, k = curve.grad_energy, curve.grad0, curve.osc0 ** 2
    elif flavor == "grad":
        lhs, start, k = curve.grad_energy, curve.grad0, curve.sup_grad0 ** 2
    elif flavor == "wpi":
        lhs, start, k = curve.variance, curve.var0, curve.osc0 ** 2
    else:
        raise DomainError(f"unknown flavor {flavor!r}")
    scale = max(start, k, 1e-300)
    worst = (math.inf, math.inf, math.nan, math.nan)
    for s in s_vals:
        b = beta.value(float(s))
        dec = _decay_factor(b, t)
        rem = s * k if flavor == "grad" else s * (1.0 - dec) * k
        slack = dec * start + rem - lhs
        i = int(np.argmin(slack))
        if slack[i] / scale < worst[1]:
            worst = (float(slack[i]), float(slack[i] / scale), float(s), float(t[i]))
    passed = worst[1] >= -tol
    return SemigroupCheck(passed, flavor, worst[0], worst[1], worst[2], worst[3],
                          len(s_vals) * len(t))


class LedouxCheck(NamedTuple):
    passed: bool
    worst_ratio: float
    t_star: float
    ratios: np.ndarray


def ledoux_gradient_bound_check(g: DiscreteGenerator, f0, times: Sequence[float],
                                require_convex: bool = True) -> LedouxCheck:
    """Check ``sup |(P_t f)'| <= Osc(f) / (2 sqrt(pi t))`` at every time."""
    if require_convex and not g.measure.source.convex:
        raise DomainError("the gradient bound is only asserted for log-concave measures")
    curve = evolve(g, f0, times)
    t = curve.times
    if np.any(t <= 0):
        raise DomainError("times must be positive")
    bound = curve.osc0 / (2.0 * np.sqrt(math.pi * t))
    ratios = curve.sup_grad / bound
    i = int(np.argmax(ratios))
    return LedouxCheck(bool(ratios[i] <= 1.0 + 1e-9), float(ratios[i]), float(t[i]), ratios)


def gaussian_oracle_check(g: DiscreteGenerator) -> dict:
    """Residuals of the discrete invariants used in the test-suite and the CLI."""
    phi = g.eigenvectors
    w = g.weights
    k = min(50, phi.shape[1])
    gram = (phi[:, :k] * w[:, None]).T @ phi[:, :k]
    return {"lambda0": float(g.eigenvalues[0]),
            "gram_deviation": float(np.max(np.abs(gram - np.eye(k)))),
            "constant_overlap": float(np.max(np.abs(w @ phi[:, 1:k])))}
