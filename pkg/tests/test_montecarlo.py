import math

import numpy as np
import pytest
from scipy import stats

from gosbounds import montecarlo as mc
from gosbounds import dfr_bounds as dfr
from gosbounds import extremal, parents
from gosbounds.errors import NonFiniteSample
from gosbounds.extremal import MomentSpec
from gosbounds.params import new_params


def test_uniform_stream():
    u = mc.sample_uniform_gos(new_params([1.0]), 200_000, seed=1)
    assert np.all((u > 0) & (u < 1))
    se = u.std() / math.sqrt(len(u))
    assert abs(u.mean() - 0.5) < 3 * se


@pytest.mark.parametrize("route", mc.ROUTES)
def test_closed_form_cdf(route):
    # gamma = (2, 1) has density 2u, cdf u^2
    u = mc.sample_uniform_gos(new_params([2.0, 1.0]), 100_000, seed=7, route=route)
    assert stats.kstest(u, lambda v: v ** 2).pvalue > 0.01


def test_routes_agree():
    p = new_params([3.0, 1.5, 1.2])
    a = mc.sample_uniform_gos(p, 100_000, seed=3, route="expsum")
    b = mc.sample_uniform_gos(p, 100_000, seed=4, route="beta")
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_reproducible_and_route_recorded():
    p = new_params([2.0, 2.0])
    a = mc.sample_exponential_sum(p, 300_000, seed=11)
    b = mc.sample_exponential_sum(p, 300_000, seed=11)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, mc.sample_exponential_sum(p, 300_000, seed=12))
    with pytest.raises(ValueError):
        mc.sample_uniform_gos(p, 10, seed=1, route="other")
    with pytest.raises(ValueError):
        mc.sample_uniform_gos(p, 0, seed=1)


def test_shard_independence():
    p = new_params([2.0, 2.0, 2.0])
    d = extremal.attainer_linear_case(MomentSpec())
    one = mc.estimate_standardized_expectation(p, d.composed_quantile, d.moments, 400_000, 5, scale="x")
    many = mc.estimate_standardized_expectation(p, d.composed_quantile, d.moments, 400_000, 5, scale="x",
                                                workers=3)
    assert one == many


def test_exponential_parent_expectation():
    # shifted exponential with theta = 1, lambda = 2 under rho = 1: E X = theta + lambda = 3
    p = new_params([2.0, 2.0])
    ident = MomentSpec(1.0, 0.0, 1.0)
    est = mc.estimate_standardized_expectation(p, lambda u: 1 - 2 * np.log1p(-u), ident, 400_000, 9)
    assert abs(est.mean - 3.0) < 3 * est.std_error
    lo, hi = est.ci95
    assert hi - lo == pytest.approx(2 * 1.96 * est.std_error)
    assert est.to_dict()["seed"] == 9 and est.route == "expsum"


def test_linear_attainer_estimate():
    d = extremal.attainer_linear_case(MomentSpec())
    est = mc.estimate_standardized_expectation(new_params([2, 2, 2]), d.quantile, d.moments, 400_000, 2)
    assert abs(est.mean - 0.5) < 3 * est.std_error


def test_hyperexponential_below_negative_bound():
    p = new_params([4.0, 2.0])
    bound = dfr.bound_B1(p).value
    h = parents.Hyperexponential((0.3, 0.7), (3.0, 0.5))
    est = mc.estimate_standardized_expectation(p, h.composed_quantile, h.moments(1.0), 400_000, 8, scale="x")
    assert est.mean < bound + 3 * est.std_error


def test_std_error_scaling():
    p = new_params([3.0, 2.0])
    h = parents.Weibull(0.8)
    m = h.moments(2.0)
    a = mc.estimate_standardized_expectation(p, h.composed_quantile, m, 200_000, 1, scale="x")
    b = mc.estimate_standardized_expectation(p, h.composed_quantile, m, 400_000, 1, scale="x")
    assert a.std_error / b.std_error == pytest.approx(math.sqrt(2), rel=0.1)


def test_quadrature_route_agrees():
    p = new_params([4.0, 2.0])
    d = dfr.negative_attainer(p, 2.0, 0.7)
    quad = mc.standardized_expectation_quad(p, d.composed_quantile, d.moments, d.breakpoints)
    assert quad == pytest.approx(-dfr.B_p(p, 2.0, 0.7), rel=1e-9)
    est = mc.estimate_standardized_expectation(p, d.composed_quantile, d.moments, 400_000, 3, scale="x")
    assert abs(est.mean - quad) < 3 * est.std_error
    se = mc.model_std_error(p, d.composed_quantile, d.moments, 400_000, d.breakpoints)
    assert se == pytest.approx(est.std_error, rel=0.05)


def test_estimate_many_matches_single():
    p = new_params([3.0, 2.0])
    zoo = [parents.Weibull(0.6), parents.ShiftedExponential(1.0, 2.0)]
    targets = [(z.composed_quantile, z.moments(1.0)) for z in zoo]
    many = mc.estimate_many(p, targets, 150_000, 4, scale="x")
    for (fn, m), e in zip(targets, many):
        assert e == mc.estimate_standardized_expectation(p, fn, m, 150_000, 4, scale="x")


def test_non_finite_rejected():
    with pytest.raises(NonFiniteSample):
        mc.estimate_standardized_expectation(new_params([2.0]), lambda u: np.full_like(u, np.nan),
                                             MomentSpec(), 100, 1)
    with pytest.raises(ValueError):
        mc.estimate_standardized_expectation(new_params([2.0]), lambda u: u, MomentSpec(), 1, 1)
    with pytest.raises(ValueError):
        mc.estimate_standardized_expectation(new_params([2.0]), lambda u: u, MomentSpec(), 10, 1, scale="y")
