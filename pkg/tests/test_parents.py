import math

import numpy as np
import pytest
from scipy import stats

from gosbounds import parents


def test_weibull_matches_scipy():
    w = parents.Weibull(0.7, 2.0)
    ref = stats.weibull_min(0.7, scale=2.0)
    u = np.array([0.05, 0.5, 0.95])
    np.testing.assert_allclose(w.quantile(u), ref.ppf(u), rtol=1e-12)
    m = w.moments(2.0)
    assert m.mu == pytest.approx(ref.mean(), rel=1e-12)
    assert m.sigma_p == pytest.approx(ref.std(), rel=1e-8)


def test_hyperexponential_inverse():
    h = parents.Hyperexponential((0.2, 0.3, 0.5), (0.2, 1.0, 4.0))
    x = np.array([0.0, 0.01, 1.0, 7.0, 50.0, 700.0])
    y = h.composed_quantile(x)
    surv = sum(w * np.exp(-y / m) for w, m in zip(h.weights, h.means))
    np.testing.assert_allclose(-np.log(surv[:-1]), x[:-1], atol=1e-12)
    assert y[-1] == pytest.approx(4.0 * (700 + math.log(0.5)), rel=1e-12)
    assert h.composed_quantile(2.0) == pytest.approx(float(h.composed_quantile(np.array([2.0]))[0]))


def test_hyperexponential_moments():
    h = parents.Hyperexponential((0.3, 0.7), (3.0, 0.5))
    m = h.moments(2.0)
    assert m.mu == pytest.approx(1.25)
    assert m.sigma_p == pytest.approx(math.sqrt(2 * (0.3 * 9 + 0.7 * 0.25) - 1.25 ** 2), rel=1e-8)
    with pytest.raises(ValueError):
        parents.Hyperexponential((0.5, 0.4), (1.0, 2.0))


def test_exponential_moments():
    m = parents.ShiftedExponential(1.0, 2.0).moments(1.0)
    assert m.mu == 3.0
    assert m.sigma_p == pytest.approx(2 * 2 / math.e, rel=1e-10)


@pytest.mark.parametrize("par", [parents.Weibull(0.5), parents.Weibull(0.9, 3.0),
                                 parents.Hyperexponential((0.1, 0.9), (10.0, 1.0)),
                                 parents.ShiftedExponential(-1.0, 0.5)])
def test_zoo_is_dfr(par):
    x = np.linspace(0, 30, 3001)
    q = par.composed_quantile(x)
    assert np.min(q[2:] - 2 * q[1:-1] + q[:-2]) >= -1e-9 * max(1.0, abs(q).max())
