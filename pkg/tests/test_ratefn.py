import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from weakgamma import ratefn as rf
from weakgamma.exceptions import DomainError, NumericError

pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
small_pos = st.floats(min_value=1e-2, max_value=10.0)


@given(c=small_pos, q=st.floats(min_value=0.1, max_value=3.0), s=pos)
def test_power_inverse_roundtrip(c, q, s):
    f = rf.Power(c, q)
    assert f.inverse(f.value(s)) == pytest.approx(s, rel=1e-9)


@given(c=small_pos, delta=small_pos, q=st.floats(min_value=0.2, max_value=2.0),
       t=st.floats(min_value=1.0, max_value=1e6))
def test_generalized_inverse_lands_in_level_set(c, delta, q, t):
    f = rf.ExpPower(c, delta, q)
    s = rf.generalized_inverse(f, t)
    if math.isfinite(s) and s > 0:
        assert f.value(s * (1 + 1e-9)) <= t * (1 + 1e-8)
        assert f.value(s * (1 - 1e-6)) >= t * (1 - 1e-8)


@given(d0=st.floats(0, 5), d=st.floats(0.1, 5), r=st.floats(0.1, 3), t=st.floats(0.5, 50))
def test_logpower_inverse_matches_bisection(d0, d, r, t):
    # at t == d0 the level set is only asymptotically reached
    assume(abs(t - d0) > 1e-6)
    f = rf.LogPower(d0, d, r)
    closed = f.inverse(t)
    generic = rf.RateFunction.inverse(f, t)
    if math.isfinite(closed) and closed > 1e-200:
        assert generic == pytest.approx(closed, rel=1e-6)
    else:
        assert generic == closed or generic < 1e-200


@given(c=small_pos, q=st.floats(0, 2), shift=st.floats(0, 3), scale=st.floats(0.1, 4),
       arg=st.floats(0.1, 4))
def test_json_roundtrip_composites(c, q, shift, scale, arg):
    f = rf.PointwiseMin(rf.Affine(rf.Power(c, q), arg, scale, shift), rf.ZeroBeyond(rf.Constant(c), 2.0))
    g = rf.from_json(json.loads(json.dumps(f.to_json())))
    s = np.geomspace(1e-3, 1e3, 31)
    np.testing.assert_allclose(g.raw(s), f.raw(s), rtol=1e-14)


def test_call_rejects_nonpositive_and_infinite():
    with pytest.raises(DomainError):
        rf.Power(1, 1)(0.0)
    with pytest.raises(DomainError):
        rf.ExpPower(1.0, 1e4, 1.0)(1e-3)
    assert rf.ExpPower(1.0, 1e4, 1.0).value(1e-3) == math.inf


def test_increasing_exp_power_rejected():
    with pytest.raises(DomainError):
        rf.ExpPower(1.0, -1.0, 1.0)


def test_monotone_table_repair_and_rejection():
    s = [1.0, 2.0, 3.0]
    t = rf.MonotoneTable.from_samples(s, [1.0, 1.0 + 1e-12, 0.5])
    assert t.repaired and t.max_violation > 0
    with pytest.raises(DomainError):
        rf.MonotoneTable.from_samples(s, [1.0, 1.1, 0.5])
    with pytest.raises(DomainError):
        rf.MonotoneTable((1.0, 2.0), (1.0, math.inf))


@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=12, unique=True))
def test_monotone_table_is_non_increasing(xs):
    xs = sorted(xs)
    ys = np.sort(np.geomspace(10.0, 0.1, len(xs)))[::-1]
    t = rf.MonotoneTable.from_samples(xs, ys)
    grid = np.geomspace(xs[0] / 10, xs[-1] * 10, 200)
    v = t.raw(grid)
    assert np.all(np.diff(v) <= 1e-12 * v[:-1])


@given(c=st.floats(0.1, 10), t=st.floats(0.1, 30))
def test_constant_profile_gives_exact_exponential(c, t):
    assert rf.xi_from_beta_wp(rf.Constant(c), t) == pytest.approx(math.exp(-2 * t / c), rel=1e-6, abs=1e-300)


@given(c=st.floats(0.1, 10), q=st.floats(0.3, 2.0), t=st.floats(1.0, 1e3))
def test_level_form_within_factor_two(c, q, t):
    f = rf.Power(c, q)
    v = rf.xi_from_beta_wp(f, t)
    lvl = rf.xi_level_form(f, t)
    assert v * (1 - 1e-6) <= lvl <= 2 * v * (1 + 1e-6)


def test_xi_iterated_pure_power_slope():
    f = rf.Power(1.0, 0.5)
    ts = np.geomspace(1e2, 1e6, 9)
    xi = [rf.xi_iterated(f, t) for t in ts]
    assert np.polyfit(np.log(ts), np.log(xi), 1)[0] == pytest.approx(-2.0, rel=0.05)


def test_schedule_validation():
    with pytest.raises(DomainError):
        rf.IterationSchedule(gamma=lambda i: np.ones(len(np.atleast_1d(i))))
    with pytest.raises(DomainError):
        rf.IterationSchedule(alpha=lambda i: 0.5 / np.asarray(i, float) ** 2)
    sch = rf.IterationSchedule.geometric(4.0)
    assert sch.g(1) == pytest.approx(0.25)


def test_eta_integrability_verdict():
    good = rf.xi_from_eta(rf.Constant(1.0), 1.0)
    assert good.integrable and math.isfinite(good.value)
    bad = rf.xi_from_eta(rf.Power(1.0, 2.0), 1.0)
    assert not bad.integrable and bad.value == math.inf


@given(s=st.floats(1e-4, 1e2))
def test_beta_from_beta_wp_capped_by_universal(s):
    b = rf.beta_from_beta_wp(rf.Power(1.0, 1.0))
    assert b.value(s) <= 1.0 / (16 * s) * (1 + 1e-12)


def test_beta_wp_from_xi_recovers_constant_order():
    # xi(t) = exp(-2t) corresponds to a Poincaré constant of order one
    xi = rf.ExpPower(1.0, 0.0, 1.0)
    tab = rf.MonotoneTable.from_samples(np.linspace(0.01, 20, 400), np.exp(-2 * np.linspace(0.01, 20, 400)))
    vals = [rf.beta_wp_from_xi(tab, s) for s in (1e-3, 1e-2, 1e-1)]
    assert all(0.5 < v < 10 for v in vals)
    assert rf.beta_wp_from_xi_simple(tab, 0.1) == pytest.approx(math.log(10), rel=0.05)
    assert xi.value(1.0) == 1.0


def test_nash_constants():
    k = rf.nash_constants(2.0, 1.0)
    assert k.exponent == 0.5 and k.nash_k > 0 and k.c_p > 0
    imp = rf.nash_exponent_improvement(rf.Power(2.0, 1.0), 1.0)
    assert imp.a.q == pytest.approx(0.5)
    with pytest.raises(DomainError):
        rf.nash_exponent_improvement(rf.Power(2.0, 0.7), 1.0)


def test_from_json_unknown_family():
    with pytest.raises(DomainError):
        rf.from_json({"family": "bogus"})


def test_function_rate_checks_monotonicity():
    with pytest.raises((DomainError, NumericError)):
        rf.FunctionRate(lambda s: np.asarray(s, float), "increasing")
