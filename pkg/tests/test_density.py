import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from gosbounds import density
from gosbounds.errors import DomainError
from gosbounds.params import new_params

param_lists = st.lists(st.floats(0.3, 8.0), min_size=1, max_size=6)


def quad(f, a, b, **kw):
    return integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400, **kw)[0]


def test_single_rate():
    assert density.density_hat(new_params([2.0]), 0.0) == pytest.approx(2.0, abs=1e-15)
    x = np.linspace(0, 5, 11)
    np.testing.assert_allclose(density.density_hat(new_params([2.0]), x), 2 * np.exp(-x), rtol=1e-14)
    np.testing.assert_allclose(density.density_hat(new_params([1.0]), x), 1.0, rtol=1e-14)


def test_two_rates_closed_form():
    # h_S(x) = 2(e^{-x} - e^{-2x}) for rates (2, 1)
    p = new_params([2.0, 1.0])
    assert density.density_hat(p, 1.0) == pytest.approx(2 * (1 - math.exp(-1)), rel=1e-14)
    assert density.density_hat(p, 1.0) == pytest.approx(1.26424111765712, rel=1e-12)
    for u in (0.25, 0.5, 0.9):
        assert density.density_u(p, u) == pytest.approx(2 * u, rel=1e-12)


def test_density_u_trivial():
    assert density.density_u(new_params([2.0]), 0.5) == pytest.approx(1.0, rel=1e-14)
    assert density.density_u(new_params([1.0]), 0.7) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DomainError):
        density.density_u(new_params([1.0]), 1.0)
    with pytest.raises(DomainError):
        density.density_hat(new_params([1.0]), -0.1)


def test_matches_erlang_for_equal_rates():
    for g, r in ((1.4, 3), (2.0, 2), (0.7, 4)):
        p = new_params([g] * r)
        x = np.linspace(0.01, 12, 50)
        np.testing.assert_allclose(density.hypoexp_pdf(p, x), stats.gamma(a=r, scale=1 / g).pdf(x), rtol=1e-12)


def test_convolution_oracle_three_rates():
    p = new_params([3.0, 1.5, 0.8])
    two = lambda y: 3 * 1.5 / 1.5 * (math.exp(-1.5 * y) - math.exp(-3 * y))  # rates (3, 1.5)
    for x in (0.3, 1.0, 4.0):
        conv = quad(lambda y: two(y) * 0.8 * math.exp(-0.8 * (x - y)), 0, x)
        assert density.hypoexp_pdf(p, x) == pytest.approx(conv, rel=1e-10)


@given(param_lists)
def test_normalization(gs):
    p = new_params(gs)
    total = quad(lambda u: density.density_u(p, u), 0, 1) if min(gs) >= 1 else \
        quad(lambda x: density.hypoexp_pdf(p, x), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_tail_integrals_at_zero():
    p = new_params([4.0, 2.0, 1.3])
    assert density.tail_integral_0(p, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert density.tail_integral_1(p, 0.0) == pytest.approx(p.rho1, rel=1e-14)
    assert density.tail_integral_1(new_params([2.0]), 0.0) == pytest.approx(0.5, abs=1e-15)
    assert density.tail_integral_0(new_params([2.0]), 1.0) == pytest.approx(math.exp(-2), rel=1e-14)


def test_tail_integrals_frozen_oracle():
    # independent closed form f_hat = 4(e^{-x} - e^{-3x}) integrated by quad
    p = new_params([4.0, 2.0])
    assert density.tail_integral_0(p, 0.5) == pytest.approx(0.6004235991062719, rel=1e-10)
    assert density.tail_integral_1(p, 1.0) == pytest.approx(0.13075637351442912, rel=1e-10)


@pytest.mark.parametrize("gs", [[4.0, 2.0], [3.0, 2.5, 1.1], [1.4, 1.4, 1.4], [5, 3, 3, 1.2, 0.9]])
def test_tail_identities_on_grid(gs):
    p = new_params(gs)
    pdf = lambda x: float(density.hypoexp_pdf(p, x))
    for a in np.arange(0.0, 5.01, 0.1):
        t0 = quad(pdf, a, np.inf)
        t1 = quad(lambda x: (x - a) * pdf(x), a, np.inf)
        assert density.tail_integral_0(p, a) == pytest.approx(t0, rel=1e-10)
        assert density.tail_integral_1(p, a) == pytest.approx(t1, rel=1e-10)


def test_derivatives():
    assert density.density_hat_derivatives(new_params([2.0]), 0.0, 1) == pytest.approx(-2.0, abs=1e-14)
    assert density.density_hat_derivatives(new_params([1.0]), 3.0, 1) == pytest.approx(0.0, abs=1e-14)
    p = new_params([2.0, 1.0])
    h = 1e-4
    fd = (density.density_hat(p, 0.5 + h) - 2 * density.density_hat(p, 0.5) + density.density_hat(p, 0.5 - h)) / h ** 2
    assert density.density_hat_derivatives(p, 0.5, 2) == pytest.approx(fd, abs=1e-6)
    q = new_params([3.0, 1.7, 1.7, 1.2])
    for x in (0.2, 1.0, 3.0):
        fd1 = (density.density_hat(q, x + 1e-6) - density.density_hat(q, x - 1e-6)) / 2e-6
        assert density.density_hat_derivatives(q, x, 1) == pytest.approx(fd1, rel=1e-6, abs=1e-9)
    with pytest.raises(ValueError):
        density.density_hat_derivatives(p, 0.5, 3)


def test_near_tie_continuity():
    tied = new_params([2.0, 2.0])
    near = new_params([2.0, 2.0 + 1e-6])
    assert density.hypoexp_repr(near).method == "expm"
    x = np.linspace(0.05, 10, 40)
    np.testing.assert_allclose(density.density_hat(near, x), density.density_hat(tied, x), rtol=1e-5)
    np.testing.assert_allclose(density.density_hat(tied, x), 4 * x * np.exp(-x), rtol=1e-13)


def test_expm_route_rows_agree_with_grouped():
    near = new_params([3.0, 2.0, 2.0 + 1e-7])
    rows = density.density_hat_all(near, np.array([0.5, 2.0]))
    ref = density.density_hat_all(new_params([3.0, 2.0, 2.0]), np.array([0.5, 2.0]))
    np.testing.assert_allclose(rows, ref, rtol=1e-5)


def test_all_rows_are_prefix_densities():
    p = new_params([5.0, 3.0, 1.5])
    rows = density.density_hat_all(p, 0.7)
    for j in range(1, 4):
        assert rows[j - 1] == pytest.approx(density.density_hat(p.prefix(j), 0.7), rel=1e-14)


@given(param_lists, st.floats(0.0, 20.0))
def test_weighted_sums_are_rescaled_tails(gs, a):
    p = new_params(gs)
    s0, s1 = density.weighted_hat_sums(p, a)
    assert s0 * math.exp(-a) == pytest.approx(density.tail_integral_0(p, a), rel=1e-12, abs=1e-300)
    assert s1 * math.exp(-a) == pytest.approx(density.tail_integral_1(p, a), rel=1e-12, abs=1e-300)
    assert s0 >= 0 and s1 >= 0
