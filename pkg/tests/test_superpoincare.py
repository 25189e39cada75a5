import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakgamma import superpoincare as sp
from weakgamma.exceptions import DomainError
from weakgamma.ratefn import Constant, ExpPower, Power

from conftest import generator

TIMES = np.concatenate([[0.0], np.geomspace(1e-4, 10.0, 40)])


@pytest.fixture(scope="module")
def g():
    return generator("gaussian", 1001)


@pytest.fixture(scope="module")
def fitted(g):
    return sp.fit_exp_profile(g, 1.0)


@pytest.fixture(scope="module")
def witness(g):
    fam = sp.spi_witness_family(g)
    s = 0.05
    num = np.maximum(g.weights @ fam ** 2 - s * g.dirichlet(fam), 0.0)
    return fam[:, int(np.argmax(num / sp.lp_norm_sq(g, fam, 1.0)))]


def test_profile_validation():
    with pytest.raises(DomainError):
        sp.SpiProfile(2.0, Constant(1.0))
    with pytest.raises(DomainError):
        sp.SpiProfile(1.0, Constant(0.5))
    with pytest.raises(DomainError):
        sp.SpiProfile(1.0, Constant(1.0), "bogus")
    sp.SpiProfile(1.0, Constant(0.5), "sig2")


def test_json_roundtrip():
    prof = sp.SpiProfile(1.5, ExpPower(2.0, 1.0, 1.0))
    back = sp.SpiProfile.from_json(json.loads(json.dumps(prof.to_json())))
    assert back.value(0.3) == prof.value(0.3) and back.p == 1.5


@given(s=st.floats(1e-3, 1e2))
def test_spi_to_sig2_formula(s):
    prof = sp.SpiProfile(1.0, ExpPower(2.0, 1.0, 1.0))
    out = sp.spi_to_sig2(prof)
    assert out.flavor == "sig2"
    assert out.value(s) == pytest.approx(prof.value(2 * s / 3) / (4 * s / 3), rel=1e-12)


def test_centered_to_plain():
    c = sp.centered_to_plain(sp.SpiProfile(1.0, Constant(2.0), "centered_spi"), 1.0)
    assert c.value(0.5) == 9.0 and c.value(2.0) == 1.0
    with pytest.raises(DomainError):
        sp.centered_to_plain(sp.unit_profile(), 1.0)


def test_sig2_to_spi_domain():
    sig = sp.spi_to_sig2(sp.unit_profile())
    with pytest.raises(DomainError):
        sp.sig2_to_spi(sig, 1.0, 1.0)
    out, flags = sp.sig2_to_spi(sig, 1.5, 1.0)
    assert out.flavor == "spi" and flags == ["K_p caller-supplied"]
    assert sp.sig2_to_spi(sig, 1.5, 1.0, k_p=2.0)[1] == []


def test_log_sobolev_profile_overflow_is_inf():
    prof = sp.log_sobolev_profile(1.0, 10.0)
    assert prof.value(1e-3) == math.inf
    assert prof.value(100.0) == pytest.approx(math.exp(0.1))


def test_empirical_witness_monotone(g):
    s = np.geomspace(1e-2, 10, 12)
    curve = sp.empirical_spi_curve(g, s, 1.0)
    assert np.all(np.diff(curve) <= 1e-12)
    assert curve[-1] >= 1.0 - 1e-12


def test_fitted_profile_dominates_witness(fitted):
    prof, info = fitted
    s = np.asarray(info["s_grid"])
    assert np.all([prof.value(x) >= 1.5 * w * (1 - 1e-12) for x, w in zip(s, info["witness"])])


def test_semigroup_check_and_shrink(g, fitted, witness):
    prof, _ = fitted
    assert sp.check_spi_semigroup(g, prof, witness, TIMES).passed
    assert sp.check_spi_semigroup(g, sp.spi_to_sig2(prof), witness, TIMES).passed
    bad = sp.check_spi_semigroup(g, sp.shrink(prof, 0.25), witness, TIMES)
    assert not bad.passed and bad.t_star > 0


def test_roundtrip_through_sig2(g, fitted, witness):
    prof, _ = fitted
    back, _ = sp.sig2_to_spi(sp.spi_to_sig2(prof), 1.5, 1.0)
    assert sp.check_spi_semigroup(g, back, witness, TIMES).passed


@pytest.mark.parametrize("delta", [1e-3, 1e-4, 1e-5])
def test_derivative_check(g, fitted, witness, delta):
    prof, _ = fitted
    for p in (prof, sp.spi_to_sig2(prof)):
        d = sp.spi_derivative_check(g, p, witness, 0.3, delta)
        assert d.ok
        assert abs(d.fd_static_slack - d.static_slack) <= 0.3 * abs(d.fd_derivative - d.exact_derivative) + 1e-9


def test_unit_profile_fails_on_gaussian(g, witness):
    assert not sp.check_spi_semigroup(g, sp.unit_profile(), witness, TIMES).passed


def test_power_profile_needs_floor():
    with pytest.raises(DomainError):
        sp.SpiProfile(1.0, Power(1.0, 1.0))
