import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakgamma import spectral as sp
from weakgamma.exceptions import DomainError
from weakgamma.measures import build_grid, gaussian, uniform
from weakgamma.ratefn import Constant

from conftest import generator


def test_ou_low_spectrum(gauss_gen):
    np.testing.assert_allclose(gauss_gen.eigenvalues[:5], np.arange(5), atol=2e-3)


def test_discrete_invariants(gauss_gen):
    res = sp.gaussian_oracle_check(gauss_gen)
    assert res["lambda0"] == 0.0
    assert res["gram_deviation"] < 1e-8
    assert res["constant_overlap"] < 1e-8


def test_node_limits():
    with pytest.raises(DomainError):
        sp.discretize(build_grid(gaussian(), 9000))


@given(s=st.floats(0.0, 2.0), t=st.floats(0.0, 2.0))
def test_semigroup_property(s, t):
    g = generator("gaussian", 401)
    f = np.tanh(g.measure.nodes)
    np.testing.assert_allclose(g.semigroup(g.semigroup(f, s), t), g.semigroup(f, s + t), atol=1e-10)


def test_semigroup_preserves_constants_and_mean():
    g = generator("uniform", 401)
    np.testing.assert_allclose(g.semigroup(np.ones(g.measure.n), 1.3), 1.0, atol=1e-12)
    f = g.measure.nodes ** 3
    assert g.weights @ g.semigroup(f, 0.7) == pytest.approx(g.weights @ f, abs=1e-12)


def test_evolve_monotone_and_csv():
    g = generator("double_well", 801)
    curve = sp.evolve(g, np.sign(g.measure.nodes), np.linspace(0, 3, 31))
    assert np.all(np.diff(curve.variance) <= 1e-14)
    text = curve.to_csv()
    assert text.splitlines()[0] == "t,variance,grad_energy,sup_grad"
    assert len(text.splitlines()) == 32
    with pytest.raises(DomainError):
        sp.evolve(g, g.measure.nodes, [1.0, 0.5])


def test_spectrum_csv_digits(gauss_gen):
    lines = sp.spectrum_csv(gauss_gen, 3).splitlines()
    assert lines[0] == "k,lambda" and lines[1] == "0,0"


@pytest.mark.parametrize("name", ["gaussian", "uniform", "subbotin1.5", "double_well"])
def test_empirical_wpi_below_poincare(name):
    g = generator(name)
    cp = sp.poincare_constant(g)
    for s in (0.0, 0.01, 0.1):
        assert sp.empirical_wpi_beta(g, s) <= cp * (1 + 1e-8)
    assert sp.empirical_wpi_beta(g, 0.0) == pytest.approx(cp, rel=1e-8)


def test_semigroup_check_flags_sabotage(gauss_gen):
    f = gauss_gen.measure.nodes
    times = np.linspace(0, 3, 31)
    cp = sp.poincare_constant(gauss_gen)
    ok = sp.check_semigroup_bounds(gauss_gen, f, Constant(cp), "wpi", times)
    bad = sp.check_semigroup_bounds(gauss_gen, f, Constant(0.5 * cp), "wpi", times)
    assert ok.passed and not bad.passed
    assert bad.t_star > 0 and bad.s_star > 0
    with pytest.raises(DomainError):
        sp.check_semigroup_bounds(gauss_gen, f, Constant(cp), "bogus", times)


def test_grad_flavor_with_constant_profile(gauss_gen):
    f = np.tanh(gauss_gen.measure.nodes)
    r = sp.check_semigroup_bounds(gauss_gen, f, Constant(1.0), "grad", np.linspace(0, 3, 31))
    assert r.passed


def test_ledoux_gradient_bound():
    g = generator("gaussian", 1001)
    r = sp.ledoux_gradient_bound_check(g, np.sign(g.measure.nodes), np.geomspace(1e-2, 5, 20))
    assert r.passed
    with pytest.raises(DomainError):
        sp.ledoux_gradient_bound_check(generator("double_well", 401), np.ones(401), [1.0])


def test_uniform_gap_converges():
    cp = sp.poincare_constant(sp.discretize(build_grid(uniform(0, 1), 4001)))
    assert cp == pytest.approx(1 / math.pi ** 2, rel=1e-3)
