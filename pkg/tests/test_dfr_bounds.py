import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gosbounds import dfr_bounds as dfr
from gosbounds.cli import PUBLISHED_TABLE1
from gosbounds.dfr_bounds import Case, DfrClass
from gosbounds.errors import DenominatorNonpositive, UnsupportedByTheory, WrongCase
from gosbounds.extremal import MomentSpec
from gosbounds.numerics import integrate
from gosbounds.params import new_params

negative_regime = st.lists(st.floats(1.05, 12.0), min_size=1, max_size=4).filter(
    lambda gs: sum(1 / g for g in gs) < 0.97)


def test_classify():
    assert dfr.classify_dfr(new_params([4, 2])) is DfrClass.RHO_BELOW_ONE
    assert dfr.classify_dfr(new_params([2, 2])) is DfrClass.RHO_EQ_ONE
    assert dfr.classify_dfr(new_params([1.25] * 3)) is DfrClass.PROJECTION_C
    assert dfr.classify_dfr(new_params([2, 2, 2])) is DfrClass.LINEAR
    assert dfr.classify_dfr(new_params([1, 1])) is DfrClass.LINEAR
    assert dfr.classify_dfr(new_params([3, 3, 3])) is DfrClass.RHO_EQ_ONE


def test_linear():
    for gs in ([2, 2, 2], [4, 4, 2, 2]):
        res = dfr.bound_linear(new_params(gs))
        assert res.value == pytest.approx(0.5, abs=1e-15) and res.case is Case.LINEAR
        assert res.attainer is not None
    with pytest.raises(WrongCase):
        dfr.bound_linear(new_params([4, 2]))


def test_linear_rejects_gamma_below_one():
    # rho = 1/0.6 lies in (1, 2] but the nonnegative bounds need gamma >= 1
    with pytest.raises(UnsupportedByTheory):
        dfr.bound_linear(new_params([0.6]))
    with pytest.raises(UnsupportedByTheory):
        dfr.dfr_bound(new_params([0.6]), 2)
    with pytest.raises(UnsupportedByTheory):
        dfr.dfr_bound(new_params([3.0, 1.0, 1.0]), 2)


@given(st.lists(st.floats(1.01, 6.0), min_size=2, max_size=5).filter(lambda gs: 1 < sum(1 / g for g in gs) <= 2))
def test_linear_value_in_unit_interval(gs):
    res = dfr.dfr_bound(new_params(gs), 2)
    assert 0 < res.value <= 1


# values from an independent route: Erlang densities from scipy.stats and brute quadrature
@pytest.mark.parametrize("g,C,y", [
    (1.4, 1.1433540438566554, 0.1832739355338792),
    (1.25, 1.4117807505769397, 0.8574374157795928),
    (1.1, 1.8087383866823072, 4.098242377427573),
])
def test_projection_equal_rates(g, C, y):
    res = dfr.bound_projection_C(new_params([g] * 3))
    assert res.case is Case.PROJECTION_C
    assert res.value == pytest.approx(C, rel=1e-9)
    assert res.alpha_or_y == pytest.approx(y, abs=1e-10)
    assert res.diagnostics["residual"] < 1e-10
    assert res.value > 0


def test_projection_distinct_rates():
    res = dfr.bound_projection_C(new_params([1.3, 1.2, 1.1]))
    assert res.value == pytest.approx(1.53757, abs=1e-5)
    with pytest.raises(WrongCase):
        dfr.bound_projection_C(new_params([2, 2, 2]))


def test_b_at_zero():
    p = new_params([4, 2])
    assert dfr.b_coefficient(p, 0.0) == pytest.approx(4.0, rel=1e-14)
    assert dfr.B_1(p, 0.0) == pytest.approx(math.e / 2 * 0.25, rel=1e-14)


def test_negative_bound_frozen_oracle():
    # oracle: closed-form f_hat_j for (4, 2), dense grid + bounded scalar minimiser
    p = new_params([4, 2])
    res = dfr.bound_B1(p)
    assert res.value == pytest.approx(-0.33978522855738064, abs=1e-10)
    assert res.alpha_or_y == pytest.approx(0.0, abs=1e-6)
    assert dfr.bound_negative_Bp(p, 1.0).value == pytest.approx(res.value, abs=1e-10)


def test_norm_denominator_quadrature():
    for a in (0.0, 0.4, 2.0, 6.0):
        t = math.exp(-a)
        k = a + t
        for p in (1.0, 1.5, 2.0, 3.0):
            ref = t ** p * (1 - t) + integrate(lambda x: abs(x - k) ** p * math.exp(-x), a, math.inf, points=[k])
            assert dfr.norm_denominator(a, p) == pytest.approx(ref, rel=1e-10)
        assert dfr.norm_denominator(a, 1.0) == pytest.approx(2 * math.exp(-a - t), rel=1e-12)


@given(negative_regime)
def test_p1_reduction(gs):
    p = new_params(gs)
    a = dfr.bound_negative_Bp(p, 1.0)
    b = dfr.bound_B1(p)
    assert a.value == pytest.approx(b.value, abs=1e-10)
    assert -0.5 <= b.value < 0
    for al in (0.0, 0.3, 2.0, 10.0):
        assert dfr.B_p(p, 1.0, al) == pytest.approx(dfr.B_1(p, al), rel=1e-12)


@pytest.mark.parametrize("g,beta,bound", PUBLISHED_TABLE1)
def test_first_gos_table(g, beta, bound):
    res = dfr.bound_first_gos_p1(g)
    assert res.value == pytest.approx(bound, abs=1e-3)
    assert res.diagnostics["beta0"] == pytest.approx(beta, abs=5e-3)
    assert res.value == pytest.approx(dfr.bound_B1(new_params([g])).value, abs=1e-10)
    assert res.value == pytest.approx(dfr.bound_negative_Bp(new_params([g]), 1.0).value, abs=1e-10)


def test_first_gos_limit_rows():
    for g in (2.0, 3.0):
        res = dfr.bound_first_gos_p1(g)
        assert res.value == -0.5 and res.attained_in_limit and res.diagnostics["beta0"] == 0.0
    with pytest.raises(WrongCase):
        dfr.bound_first_gos_p1(1.0)


def test_first_gos_p_above_one():
    res = dfr.bound_first_gos(new_params([2.0]), 2.0)
    assert res.value == 0.0 and res.case is Case.FIRST_GOS_ZERO and res.attained_in_limit
    seq = [dfr.first_gos_sequence(2.0, 2.0, a) for a in (1e-1, 1e-2, 1e-3)]
    assert all(s < 0 for s in seq)
    assert abs(seq[0]) > abs(seq[1]) > abs(seq[2])
    assert abs(seq[2]) < 0.03
    assert dfr.bound_first_gos(new_params([1.0]), 2.0).case is Case.ZERO_EXACT
    with pytest.raises(WrongCase):
        dfr.bound_first_gos(new_params([2.0]), 1.0)


def test_n_p_closed_forms():
    for a in np.linspace(0.05, 0.95, 10):
        assert dfr.n_p(a, 1.0) == pytest.approx(2 * a * math.exp(-a), rel=1e-12)
        assert dfr.n_p(a, 2.0) == pytest.approx(math.sqrt(a * (2 - a)), rel=1e-12)


def test_zero_cases():
    res = dfr.bound_zero_cases(new_params([2, 2]))
    assert res.value == 0.0 and res.case is Case.ZERO_EXACT
    assert dfr.bound_zero_cases(new_params([4, 2]), 2.0).case is Case.NEGATIVE_BP
    r3 = dfr.dfr_bound(new_params([3.0]), 1.0)
    assert r3.value < 0
    with pytest.raises(WrongCase):
        dfr.bound_zero_cases(new_params([2, 2, 2]))


def test_negative_p2_goes_to_zero_at_infinity():
    res = dfr.dfr_bound(new_params([5, 4, 3]), 2.0)
    assert res.case is Case.NEGATIVE_BP and res.value == 0.0 and res.attained_in_limit


def test_dispatch_and_p_restrictions():
    assert dfr.dfr_bound(new_params([2, 2, 2]), 2).case is Case.LINEAR
    assert dfr.dfr_bound(new_params([1.4] * 3), 2).case is Case.PROJECTION_C
    assert dfr.dfr_bound(new_params([1.0]), 3).case is Case.ZERO_EXACT
    with pytest.raises(UnsupportedByTheory):
        dfr.dfr_bound(new_params([2, 2, 2]), 1.0)
    with pytest.raises(ValueError):
        dfr.dfr_bound(new_params([4, 2]), 1.0, moments=MomentSpec(p=2.0))
    with pytest.raises(WrongCase):
        dfr.bound_negative_Bp(new_params([2, 2]), 1.0)


def test_denominator_guard():
    with pytest.raises(DenominatorNonpositive) as exc:
        dfr.B_p(new_params([1.2, 1.1]), 1.0, 0.0)
    assert exc.value.alpha == 0.0


def test_result_serializes():
    res = dfr.dfr_bound(new_params([4, 2]), 1.0, moments=MomentSpec(1.0, 2.0, 3.0))
    d = json.loads(json.dumps(res.to_dict()))
    assert d["case"] == "NegativeBp" and d["attainer"]["moments"]["mu"] == 2.0
