"""Verification suites shared by the command line and the test-suite.

Each suite returns a list of :class:`Outcome` records; nothing here raises on
a failed check.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson

from .measures import Potential1D, build_grid, double_well, gaussian, subbotin, uniform
from .ratefn import Affine, Constant, universal_beta
from .spectral import DiscreteGenerator, check_semigroup_bounds, discretize, poincare_constant
from .superpoincare import check_spi_semigroup, fit_exp_profile, shrink, spi_derivative_check, \
    spi_to_sig2, spi_witness_family


class Outcome(NamedTuple):
    name: str
    passed: bool
    detail: str


def test_measures() -> list[Potential1D]:
    """The five 1-D measures used by the decay and wig2 suites."""
    return [gaussian(), uniform(0.0, 1.0), subbotin(1.5), subbotin(4.0), double_well(4.0)]


def test_functions(g: DiscreteGenerator) -> dict[str, np.ndarray]:
    x = g.measure.nodes
    mean = float(g.weights @ x)
    sd = math.sqrt(float(g.weights @ (x - mean) ** 2))
    z = (x - mean) / sd
    return {"linear": z, "step": np.tanh(4.0 * z), "bump": np.exp(-z * z)}


def _label(g: DiscreteGenerator) -> str:
    src = g.measure.source
    par = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in src.params)
    return f"{src.name}({par})"


def decay_checks(g: DiscreteGenerator, f0: np.ndarray, label: str,
                 t_max: float = 5.0, fine: int = 4001) -> list[Outcome]:
    """Variance identity, monotone gradient energy, the ``Osc^2/(2t)`` bound and log-convexity."""
    a = g.coefficients(f0)[1:]
    lam = g.eigenvalues[1:]
    a2 = a * a
    # graded grid: stiff modes decay on time scales ~ h^2
    u = np.concatenate([[0.0], np.geomspace(1e-10 * t_max, t_max, fine - 1)])
    var_u = np.exp(-2.0 * np.outer(u, lam)) @ a2
    grad_u = np.exp(-2.0 * np.outer(u, lam)) @ (lam * a2)
    out = []
    # Var(f) - Var(P_t f) = 2 int_0^t F, composite Simpson
    checkpoints = list(range(fine // 2, fine, max(fine // 20, 1))) + [fine - 1]
    worst = 0.0
    for k in checkpoints:
        integral = simpson(grad_u[:k + 1], x=u[:k + 1])
        lhs = var_u[0] - var_u[k]
        worst = max(worst, abs(lhs - 2.0 * integral) / max(var_u[0], 1e-300))
    out.append(Outcome(f"variance_identity[{label}]", bool(worst <= 1e-6), f"max_rel_err={worst:.3e}"))
    rises = float(np.max(np.diff(grad_u)))
    out.append(Outcome(f"grad_energy_monotone[{label}]", bool(rises <= 1e-12), f"max_increase={rises:.3e}"))
    osc2 = float(f0.max() - f0.min()) ** 2
    tt = u[1:]
    ratio = float(np.max(grad_u[1:] * 2.0 * tt / osc2))
    out.append(Outcome(f"osc_gradient_bound[{label}]", bool(ratio <= 1.0 + 1e-10), f"max_ratio={ratio:.6f}"))
    tg = np.geomspace(1e-3, t_max, 60)
    var_g = np.exp(-2.0 * np.outer(tg, lam)) @ a2
    # on a geometric grid the 3-term condition uses the weighted mean of logs
    lv = np.log(np.maximum(var_g, 1e-300))
    h0 = np.diff(tg)[:-1]
    h1 = np.diff(tg)[1:]
    interp = (h1 * lv[:-2] + h0 * lv[2:]) / (h0 + h1)
    gap = float(np.max(lv[1:-1] - interp))
    out.append(Outcome(f"variance_log_convex[{label}]", bool(gap <= 1e-10), f"max_violation={gap:.3e}"))
    return out


def decay_suite(resolution: int = 2001, measures: Sequence[Potential1D] | None = None) -> list[Outcome]:
    out = []
    for pot in measures or test_measures():
        g = discretize(build_grid(pot, resolution))
        for name, f in test_functions(g).items():
            out.extend(decay_checks(g, f, f"{_label(g)}:{name}"))
    return out


def wig2_suite(resolution: int = 2001, sabotage: float | None = None,
               measures: Sequence[Potential1D] | None = None) -> list[Outcome]:
    """Universal ``1/(16 s)`` osc profile and ``Constant(C_P)`` wpi profile on every test measure.

    With ``sabotage`` the Gaussian is additionally checked with
    ``Constant(sabotage C_P)``, which is expected to fail; that outcome is
    reported as a failure with its location.
    """
    out = []
    times = np.concatenate([[0.0], np.geomspace(1e-3, 10.0, 60)])
    for pot in measures or test_measures():
        g = discretize(build_grid(pot, resolution))
        cp = poincare_constant(g)
        for name, f in test_functions(g).items():
            lab = f"{_label(g)}:{name}"
            r = check_semigroup_bounds(g, f, universal_beta(), "osc", times)
            out.append(Outcome(f"universal_osc[{lab}]", bool(r.passed),
                               f"worst_rel={r.worst_relative:.3e} s*={r.s_star:.4g} t*={r.t_star:.4g}"))
            r = check_semigroup_bounds(g, f, Constant(cp), "wpi", times)
            out.append(Outcome(f"poincare_wpi[{lab}]", bool(r.passed),
                               f"worst_rel={r.worst_relative:.3e} s*={r.s_star:.4g} t*={r.t_star:.4g}"))
    if sabotage is not None:
        g = discretize(build_grid(gaussian(), resolution))
        f = test_functions(g)["linear"]
        r = check_semigroup_bounds(g, f, Constant(sabotage * poincare_constant(g)), "wpi", times)
        out.append(Outcome(f"sabotaged_wpi[x{sabotage:g}]", bool(r.passed),
                           f"worst_rel={r.worst_relative:.3e} s*={r.s_star:.4g} t*={r.t_star:.4g}"))
    return out


def spi_suite(resolution: int = 1001, p: float = 1.0, shrink_factor: float = 0.25) -> list[Outcome]:
    """Empirical Gaussian spi profile: semigroup checks, the shrink probe and the t = 0 derivative."""
    g = discretize(build_grid(gaussian(), resolution))
    prof, info = fit_exp_profile(g, p)
    times = np.concatenate([[0.0], np.geomspace(1e-4, 10.0, 40)])
    fam = spi_witness_family(g)
    s_probe = 0.05
    num = np.maximum(g.weights @ fam ** 2 - s_probe * g.dirichlet(fam), 0.0)
    den = (g.weights @ np.abs(fam) ** p) ** (2.0 / p)
    f0 = fam[:, int(np.argmax(num / den))]
    out = []
    for label, f in (("witness", f0), ("step", test_functions(g)["step"])):
        r = check_spi_semigroup(g, prof, f, times)
        out.append(Outcome(f"spi_profile[{label}]", bool(r.passed),
                           f"a={info['a']:.4g} b={info['b']:.4g} worst_rel={r.worst_relative:.3e}"))
        r = check_spi_semigroup(g, spi_to_sig2(prof), f, times)
        out.append(Outcome(f"sig2_profile[{label}]", r.passed, f"worst_rel={r.worst_relative:.3e}"))
    r = check_spi_semigroup(g, shrink(prof, shrink_factor), f0, times)
    out.append(Outcome(f"shrunk_profile_detected[x{shrink_factor:g}]", not bool(r.passed),
                       f"worst_rel={r.worst_relative:.3e} s*={r.s_star:.4g} t*={r.t_star:.4g}"))
    for flavor_prof in (prof, spi_to_sig2(prof)):
        errs = []
        ok = True
        for delta in (1e-3, 1e-4, 1e-5):
            d = spi_derivative_check(g, flavor_prof, f0, 0.3, delta)
            ok = ok and d.ok
            errs.append(abs(d.fd_derivative - d.exact_derivative))
        shrinking = errs[1] < errs[0] and errs[2] < errs[1]
        out.append(Outcome(f"t0_derivative[{flavor_prof.flavor}]", ok and shrinking,
                           "fd_errors=" + ",".join(f"{e:.3e}" for e in errs)))
    return out


SUITES: dict[str, Callable[..., list[Outcome]]] = {
    "decay": decay_suite, "wig2": wig2_suite, "spi": spi_suite}


def tap_lines(outcomes: Sequence[Outcome]) -> list[str]:
    lines = [f"1..{len(outcomes)}"]
    for k, o in enumerate(outcomes, 1):
        lines.append(f"{'ok' if o.passed else 'not ok'} {k} - {o.name} # {o.detail}")
    return lines


def sabotage_profile(factor: float):
    """``factor`` times the universal osc profile, for falsification runs."""
    return Affine(universal_beta(), scale=factor)
