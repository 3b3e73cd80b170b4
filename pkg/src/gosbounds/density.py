"""Densities of uniform generalized order statistics.

For ``U`` the r-th uniform gOS, ``-log(1 - U)`` has the law of
``S = V_1/gamma_1 + ... + V_r/gamma_r`` with i.i.d. standard exponential
``V_i``, i.e. a hypoexponential law with rates ``gamma_i``.  Writing ``h_S``
for its density,

    f_{gamma,r}(u)        = h_S(-log(1 - u)) / (1 - u),
    f_hat_{gamma,r}(x)    = f_{gamma,r}(1 - exp(-x)) = h_S(x) * exp(x).

``f_hat`` is evaluated from the partial-fraction expansion of the Laplace
transform ``prod gamma_i / (s + gamma_i)``, grouping tied rates into Erlang
blocks.  When two distinct rates are so close that the expansion would
cancel catastrophically, the matrix exponential of the bidiagonal
phase-type generator is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from .errors import DomainError
from .params import RATE_TIE_TOL, GosParams

#: relative gap below which distinct rates are handled by the matrix exponential
NEAR_TIE_REL = 1e-6
#: coefficient magnitude above which the expansion is considered ill-conditioned
MAX_COEF = 1e10


@dataclass(frozen=True)
class HypoexpRepr:
    """Law of ``sum V_i / gamma_i`` as rate groups and Erlang-mixture coefficients.

    ``coefs[g][n]`` multiplies ``x**n / n! * exp(-rate_g * x)`` in ``h_S``.
    ``method`` is ``"grouped"`` or ``"expm"``; in the latter case the
    coefficients are unused and evaluation goes through the generator.
    """

    gamma: Tuple[float, ...]
    groups: Tuple[Tuple[float, int], ...]
    coefs: Tuple[Tuple[float, ...], ...]
    method: str

    @property
    def r(self) -> int:
        return len(self.gamma)


def _group_rates(gamma):
    groups = []
    for g in sorted(gamma, reverse=True):
        if groups and abs(groups[-1][0] - g) <= RATE_TIE_TOL:
            rate, m = groups[-1]
            groups[-1] = (rate, m + 1)
        else:
            groups.append((g, 1))
    return groups


def _erlang_coefficients(groups):
    """Partial-fraction coefficients of ``prod_g (rate_g/(s+rate_g))**m_g``."""
    log_const = sum(m * math.log(rate) for rate, m in groups)
    out = []
    for gi, (lam, m) in enumerate(groups):
        others = [(rate, mh) for hi, (rate, mh) in enumerate(groups) if hi != gi]
        s0 = -lam
        # derivatives of G(s) = prod_{h != g} (s + rate_h)^(-m_h) at s0, via G' = G * L
        nmax = m - 1
        L = [-sum(mh * (-1) ** k * math.factorial(k) / (s0 + rate) ** (k + 1) for rate, mh in others)
             for k in range(nmax)]
        G = [math.exp(log_const - sum(mh * math.log(abs(s0 + rate)) for rate, mh in others))
             * math.prod(np.sign(s0 + rate) ** mh for rate, mh in others)]
        for n in range(nmax):
            G.append(sum(math.comb(n, k) * G[k] * L[n - k] for k in range(n + 1)))
        # c_{g,k} = G^{(m-k)}(s0) / (m-k)!  multiplies x^{k-1}/(k-1)! e^{-lam x}
        out.append(tuple(G[m - k] / math.factorial(m - k) for k in range(1, m + 1)))
    return out


@lru_cache(maxsize=4096)
def _repr_for(gamma: Tuple[float, ...]) -> HypoexpRepr:
    groups = _group_rates(gamma)
    rates = [g for g, _ in groups]
    near = any(abs(a - b) < NEAR_TIE_REL * max(a, b) for a, b in zip(rates, rates[1:]))
    if near:
        return HypoexpRepr(gamma, tuple(groups), (), "expm")
    coefs = _erlang_coefficients(groups)
    if max(abs(c) for cs in coefs for c in cs) > MAX_COEF:
        return HypoexpRepr(gamma, tuple(groups), (), "expm")
    return HypoexpRepr(gamma, tuple(groups), tuple(coefs), "grouped")


def hypoexp_repr(params: GosParams) -> HypoexpRepr:
    return _repr_for(params.gamma)


def _generator(gamma):
    r = len(gamma)
    Q = np.diag(-np.asarray(gamma, dtype=float))
    Q[np.arange(r - 1), np.arange(1, r)] = gamma[:-1]
    return Q


def _hat_grouped(rep: HypoexpRepr, x: np.ndarray, order: int, shift: float = 1.0) -> np.ndarray:
    """``h_S(x) e^{shift x}`` or its derivative; ``shift=1`` gives ``f_hat``, ``shift=0`` gives ``h_S``."""
    total = np.zeros_like(x)
    for (lam, _), coefs in zip(rep.groups, rep.coefs):
        mu = lam - shift
        a = list(coefs)
        for _ in range(order):
            # d/dx of sum_n a_n x^n/n! e^{-mu x}
            a = [(a[n + 1] if n + 1 < len(a) else 0.0) - mu * a[n] for n in range(len(a))]
        poly = np.zeros_like(x)
        term = np.ones_like(x)
        for n, an in enumerate(a):
            if n:
                term = term * x / n
            poly = poly + an * term
        total = total + poly * np.exp(-mu * x)
    return total


def _hat_expm_all(gamma, x: np.ndarray, order: int, shift: float = 1.0) -> np.ndarray:
    """``f_hat_{gamma,j}`` (or its derivative) for every prefix j, shape ``(r,) + x.shape``."""
    gamma = np.asarray(gamma, dtype=float)
    M = _generator(gamma) + shift * np.eye(len(gamma))
    Mk = np.linalg.matrix_power(M, order)
    out = np.empty((len(gamma),) + x.shape)
    for idx, xv in np.ndenumerate(x):
        row = (Mk @ expm(M * xv))[0]
        out[(slice(None),) + idx] = gamma * row
    return out


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("x must be non-negative")
    return arr


def _hat(params: GosParams, x, order: int, shift: float = 1.0):
    arr = _as_array(x)
    rep = hypoexp_repr(params)
    with np.errstate(over="ignore"):
        if rep.method == "grouped":
            val = _hat_grouped(rep, arr, order, shift)
        else:
            val = _hat_expm_all(params.gamma, arr, order, shift)[-1]
    return float(val) if np.ndim(x) == 0 else val


def density_hat(params: GosParams, x):
    """``f_hat_{gamma,r}(x) = f_{gamma,r}(1 - exp(-x))`` for ``x >= 0`` (vectorised)."""
    return _hat(params, x, 0)


def density_hat_derivatives(params: GosParams, x, order: int):
    """Exact first or second derivative of :func:`density_hat`."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return _hat(params, x, order)


def density_hat_all(params: GosParams, x, order: int = 0) -> np.ndarray:
    """Rows ``f_hat_{gamma,j}(x)``, j = 1..r, built from the leading parameters."""
    arr = _as_array(x)
    rep = hypoexp_repr(params)
    with np.errstate(over="ignore"):
        if rep.method == "expm":
            return _hat_expm_all(params.gamma, arr, order)
        return np.stack([_hat(params.prefix(j), arr, order) for j in range(1, params.r + 1)])


def density_u(params: GosParams, u):
    """Density ``f_{gamma,r}`` of the r-th uniform gOS on ``(0, 1)``."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0) or np.any(np.isnan(arr)):
        raise DomainError("u must lie in the open interval (0, 1)")
    return density_hat(params, -np.log1p(-arr) if np.ndim(u) else -math.log1p(-float(u)))


def hypoexp_pdf(params: GosParams, x):
    """Density of ``S = sum V_i / gamma_i`` at ``x >= 0``."""
    return _hat(params, x, 0, shift=0.0)


def tail_integral_0(params: GosParams, alpha: float) -> float:
    """``int_alpha^inf f_hat(x) e^{-x} dx = e^{-alpha} sum_j f_hat_j(alpha) / gamma_j``."""
    fj = density_hat_all(params, float(alpha))
    return math.exp(-alpha) * math.fsum(fj / np.asarray(params.gamma))


def tail_integral_1(params: GosParams, alpha: float) -> float:
    """``int_alpha^inf (x-alpha) f_hat(x) e^{-x} dx = e^{-alpha} sum_j rho_j f_hat_j(alpha) / gamma_j``."""
    fj = density_hat_all(params, float(alpha))
    return math.exp(-alpha) * math.fsum(params.rho_table * fj / np.asarray(params.gamma))


def weighted_hat_sums(params: GosParams, alpha):
    """``(sum_j f_hat_j/gamma_j, sum_j rho_j f_hat_j/gamma_j)`` at ``alpha`` (vectorised).

    These are the exp(alpha)-rescaled tail integrals, i.e. ``e^alpha P(S > alpha)``
    and ``e^alpha E(S - alpha)^+``; they stay finite for large ``alpha``.
    """
    fj = density_hat_all(params, alpha)
    w0 = 1.0 / np.asarray(params.gamma)
    w1 = params.rho_table * w0
    shape = (-1,) + (1,) * (fj.ndim - 1)
    s0 = np.sum(fj * w0.reshape(shape), axis=0)
    s1 = np.sum(fj * w1.reshape(shape), axis=0)
    if np.ndim(alpha) == 0:
        return float(s0), float(s1)
    return s0, s1
