import math

import pytest
from hypothesis import given, strategies as st

from weakgamma import logconcave as lc
from weakgamma.exceptions import DomainError
from weakgamma.measures import build_grid, dilate, gaussian, gaussian_product, subbotin, uniform
from weakgamma.ratefn import Constant, FromInverse, Power
from weakgamma.report import BoundReport

LN2 = math.log(2)


def test_kappa_series_matches_closed_form():
    assert lc.kappa_universal() == pytest.approx(lc.kappa_closed_form(), rel=1e-10)
    assert lc.kappa_closed_form() == pytest.approx(59.289433353, rel=1e-10)


def test_m_beta_simple_shapes():
    assert lc.m_beta(FromInverse(lambda t: max(1 - t, 0.0))) == pytest.approx(0.5, rel=1e-8)
    assert lc.m_beta(Power(1 / 16, 1)) == math.inf


def test_milman_gaussian_value_and_scaling():
    r = lc.cp_bound_milman(lc.hessian_tail_beta(build_grid(gaussian(), 2001)))
    assert r.value == pytest.approx(1024 / math.pi ** 2 * lc.kappa_closed_form(), rel=1e-6)
    r2 = lc.cp_bound_milman(lc.hessian_tail_beta(build_grid(dilate(gaussian(), 2.0), 2001)))
    assert r2.value == pytest.approx(4 * r.value, rel=1e-6)


def test_milman_infinite_for_flat_curvature():
    r = lc.cp_bound_milman(lc.hessian_tail_beta(build_grid(uniform(), 2001)))
    assert r.value == math.inf and r.reason == "M_beta diverges"


def test_grad_schedule_gaussian_closed_form():
    r = lc.cp_bound_grad_schedule(lc.hessian_tail_beta(build_grid(gaussian(), 2001)))
    assert r.value == pytest.approx(256 * LN2 * 4 * (2 + math.exp(-4) / 2), rel=1e-7)


@given(c=st.floats(0.2, 5.0))
def test_grad_schedule_constant_profile_oracle(c):
    r = lc.cp_bound_grad_schedule(Constant(c))
    # s(t) is constant-free for a Constant profile: int_2^inf e^{-2t/c} = (c/2) e^{-4/c}
    assert r.intermediates["kappa"] == pytest.approx(4 * (2 + c / 2 * math.exp(-4 / c)), rel=1e-7)


def test_grad_schedule_custom_schedule_rejected_when_too_large():
    big = lc.ScheduleS.custom(lambda t: 10.0 * t * math.exp(-t))
    r = lc.cp_bound_grad_schedule(Constant(1.0), big)
    assert r.value == math.inf and r.reason == "s0 >= 1/6"
    with pytest.raises(DomainError):
        lc.cp_bound_grad_schedule(Constant(1.0), big, theta=0.5)


def test_schedule_theta_domain():
    with pytest.raises(DomainError):
        lc.ScheduleS.generic(1.5)
    s = lc.ScheduleS.generic(0.5)
    assert s.grad_integral().value < 1 / 48


def test_osc_schedule():
    ok = lc.cp_bound_osc_schedule(Constant(1.0), lc.ScheduleS.custom(lambda t: 0.05 * math.exp(-t)))
    assert math.isfinite(ok.value)
    bad = lc.cp_bound_osc_schedule(Constant(1.0), lc.ScheduleS.custom(lambda t: 0.1 * math.exp(-t)))
    assert bad.reason == "s0 >= 1/6"


def test_hessian_moment_divergence_for_degenerate_curvature():
    for p in (3.0, 4.0):
        m = build_grid(subbotin(p), 2001)
        assert lc.brascamp_moment(m)[0] == math.inf
        assert lc.cp_bound_milman(lc.hessian_tail_beta(m)).value == math.inf
        assert math.isfinite(lc.cp_bound_grad_schedule(lc.hessian_tail_beta(m)).value)


def test_brascamp_flags_nonconvex_and_mc_error():
    from weakgamma.measures import double_well
    r = lc.cp_bound_brascamp_moment(build_grid(double_well(), 801))
    assert any("hypothesis unverified" in f for f in r.flags)
    mc = lc.cp_bound_brascamp_moment(gaussian_product(2), seed=3, size=20_000)
    # |I|_HS = sqrt(2) exactly for the standard Gaussian
    assert mc.intermediates["moment"] == pytest.approx(math.sqrt(2), rel=1e-12)
    assert mc.error < 1e-9


def test_power_and_log_moment_bounds():
    assert lc.cp_bound_power_moment(math.e, 1.0).value == pytest.approx(2 * math.e)
    assert lc.cp_bound_power_moment(0.5, 1.0).value == 2.0
    r = lc.cp_bound_log_moment(1.0, 2.0)
    assert r.intermediates["theta"] == 1.0 and lc.UNSPECIFIED in r.flags
    assert lc.cp_bound_log_moment(1.0, 1.0).intermediates["theta"] == 0.5
    assert lc.cp_bound_log_moment(50.0, 0.1).reason == "threshold overflows double precision"
    with pytest.raises(DomainError):
        lc.cp_bound_power_moment(1.0, 0.0)


def test_moments_of_gaussian():
    m = build_grid(gaussian(), 2001)
    assert lc.power_moment(m, 1.0) == pytest.approx(1.0, rel=1e-8)
    assert lc.log_moment(m, 1.0) == pytest.approx(LN2 ** 2, rel=1e-6)


def test_reports_roundtrip():
    r = lc.cp_bound_milman(lc.hessian_tail_beta(build_grid(uniform(), 801)))
    back = BoundReport.from_json(r.to_json())
    assert back.value == math.inf and back.digest == r.digest
