"""Optimal bounds on ``E (X_gamma^(r) - mu) / sigma_p`` for DFR parents.

Case split on ``rho = rho_{1,r} = sum 1/gamma_i``:

* ``rho == 1``: the bound is 0 and every shifted exponential attains it.
* ``rho < 1`` (forces all ``gamma_i > 1``): the bound is ``-inf_alpha B_p(alpha)``,
  attained by an atom followed by a shifted exponential tail.
* ``1 < rho <= 2``, ``p = 2``: the bound ``rho - 1``, attained by a shifted exponential.
* ``rho > 2``, ``p = 2``: the projection bound ``C``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from . import density, extremal
from .errors import (
    DenominatorNonpositive,
    NegativeCSquared,
    UnsupportedByTheory,
    WrongCase,
)
from .extremal import ExtremalDistribution, MomentSpec
from .numerics import (
    MinimizerReport,
    Tolerances,
    _tol,
    exp_power_integral,
    first_root,
    integrate,
    minimize_on_halfline,
    minimize_unit_interval,
)
from .params import GosParams, new_params

log = logging.getLogger(__name__)

#: tolerance for comparing rho with 1 and 2
RHO_TIE = 1e-12


class Case(str, enum.Enum):
    ZERO_EXACT = "ZeroExact"
    ZERO_LIMIT = "ZeroLimit"
    LINEAR = "Linear"
    PROJECTION_C = "ProjectionC"
    NEGATIVE_BP = "NegativeBp"
    FIRST_GOS_ZERO = "FirstGosZero"
    FIRST_GOS_P1 = "FirstGosP1"
    DFRA_NEGATIVE = "DfraNegative"


class DfrClass(str, enum.Enum):
    RHO_EQ_ONE = "RhoEqOne"
    RHO_BELOW_ONE = "RhoBelowOne"
    LINEAR = "Linear"
    PROJECTION_C = "ProjectionC"


@dataclass
class BoundResult:
    value: float
    case: Case
    alpha_or_y: Optional[float] = None
    attained_in_limit: bool = False
    attainer: Optional[ExtremalDistribution] = None
    minimizer: Optional[MinimizerReport] = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        a = self.alpha_or_y
        return {
            "value": self.value,
            "case": self.case.value,
            "alpha_or_y": "inf" if a is not None and math.isinf(a) else a,
            "attained_in_limit": self.attained_in_limit,
            "attainer": None if self.attainer is None else self.attainer.to_dict(),
            "minimizer": None if self.minimizer is None else self.minimizer.to_dict(),
            "diagnostics": self.diagnostics,
        }


def _moments(moments: Optional[MomentSpec], p: float) -> MomentSpec:
    if moments is None:
        return MomentSpec(p=p)
    if moments.p != p:
        raise ValueError(f"moment order mismatch: p={p} but moments.p={moments.p}")
    return moments


# -- classification -----------------------------------------------------------

def classify_dfr(params: GosParams) -> DfrClass:
    rho = params.rho1
    if abs(rho - 1.0) <= RHO_TIE:
        return DfrClass.RHO_EQ_ONE
    if rho < 1.0:
        return DfrClass.RHO_BELOW_ONE
    if rho <= 2.0 + RHO_TIE:
        return DfrClass.LINEAR
    return DfrClass.PROJECTION_C


def nonnegative_conditions(params: GosParams) -> bool:
    """Parameter restrictions under which the nonnegative DFR bounds hold.

    r = 1 needs ``gamma_1 >= 1``; r >= 2 needs every ``gamma_i >= 1`` with the
    second smallest strictly above 1.
    """
    g = params.gamma
    if params.r == 1:
        return g[0] >= 1.0
    return g[-1] >= 1.0 and g[-2] > 1.0


def _require_nonnegative_regime(params: GosParams):
    if not nonnegative_conditions(params):
        raise UnsupportedByTheory(
            f"{params}: the nonnegative DFR bounds need gamma_i >= 1 with the second smallest > 1")


# -- nonnegative bounds (p = 2) -------------------------------------------------

def bound_linear(params: GosParams, moments: Optional[MomentSpec] = None) -> BoundResult:
    if classify_dfr(params) is not DfrClass.LINEAR:
        raise WrongCase(f"rho = {params.rho1} is not in (1, 2]")
    _require_nonnegative_regime(params)
    moments = _moments(moments, 2.0)
    return BoundResult(params.rho1 - 1.0, Case.LINEAR,
                       attainer=extremal.attainer_linear_case(moments))


def slope_function(params: GosParams, y):
    """Slope of the best approximation ``f_hat(y) + a (x - y)`` of ``f_hat`` on ``[y, inf)``."""
    fj = density.density_hat_all(params, y)
    g = np.asarray(params.gamma)
    rho = params.rho_table
    shape = (-1,) + (1,) * (fj.ndim - 1)
    w = (rho / g).reshape(shape)
    head = np.sum(w[:-1] * fj[:-1], axis=0)
    out = 0.5 * (head + (1.0 / g[-1] ** 2 - 1.0) * fj[-1])
    return float(out) if np.ndim(y) == 0 else out


def breakpoint_equation(params: GosParams, y):
    """Left side of the equation whose smallest positive root is ``y*``."""
    fj = density.density_hat_all(params, y)
    g = np.asarray(params.gamma)
    rho = params.rho_table
    shape = (-1,) + (1,) * (fj.ndim - 1)
    w = ((1.0 - rho / 2.0) / g).reshape(shape)
    out = np.sum(w[:-1] * fj[:-1], axis=0) - (g[-1] - 1.0) ** 2 / (2.0 * g[-1] ** 2) * fj[-1]
    return float(out) if np.ndim(y) == 0 else out


def bound_projection_C(params: GosParams, tol: Optional[Tolerances] = None,
                       moments: Optional[MomentSpec] = None) -> BoundResult:
    tol = _tol(tol)
    if classify_dfr(params) is not DfrClass.PROJECTION_C:
        raise WrongCase(f"rho = {params.rho1} does not exceed 2")
    _require_nonnegative_regime(params)
    moments = _moments(moments, 2.0)

    y_star = first_root(lambda y: breakpoint_equation(params, y), 0.0, tol)
    f_y = density.density_hat(params, y_star)
    a_y = slope_function(params, y_star)
    head = integrate(lambda x: density.density_hat(params, x) ** 2 * math.exp(-x), 0.0, y_star, tol)
    c2 = head + math.exp(-y_star) * (f_y ** 2 + 2 * a_y * f_y + 2 * a_y ** 2) - 1.0
    if c2 < -1e-9:
        raise NegativeCSquared(f"C^2 = {c2:.3g} < 0 at y* = {y_star}")
    if c2 < 0.0:
        log.warning("clamping C^2 = %.3g to 0", c2)
        c2 = 0.0
    C = math.sqrt(c2)
    diag = {
        "y_star": y_star,
        "residual": abs(breakpoint_equation(params, y_star)),
        "slope_at_y_star": a_y,
        "f_hat_at_y_star": f_y,
        "C_squared": c2,
    }
    attainer = extremal.attainer_projection(params, y_star, C, a_y, moments, tol) if C > 0 else None
    return BoundResult(C, Case.PROJECTION_C, alpha_or_y=y_star, attainer=attainer, diagnostics=diag)


# -- negative bounds --------------------------------------------------------------

def kink_integral(c: float, p: float) -> float:
    """``int_0^c s^p e^s ds``."""
    return exp_power_integral(c, p)


def exp_abs_moment(alpha: float, k: float, p: float) -> float:
    """``int_alpha^inf |x - k|^p e^{-x} dx`` for ``0 <= k - alpha`` or ``k <= alpha``."""
    if k <= alpha:
        return math.exp(-k) * math.gamma(p + 1) * gammaincc(p + 1, alpha - k)
    return math.exp(-k) * (kink_integral(k - alpha, p) + math.gamma(p + 1))


def norm_denominator(alpha: float, p: float) -> float:
    """``D_p(alpha)``: p-th power norm of the broken line ``-e^{-a}`` / ``x - a - e^{-a}``."""
    t = math.exp(-alpha)
    return t ** p * (1.0 - t) + t * math.exp(-t) * (kink_integral(t, p) + math.gamma(p + 1))


def _require_negative_regime(params: GosParams):
    if params.rho1 >= 1.0 - RHO_TIE or min(params.gamma) <= 1.0:
        raise WrongCase(f"{params}: negative bounds need every gamma_i > 1 and rho < 1")


def _one_minus_sum(params: GosParams, alpha: float) -> float:
    _, s1 = density.weighted_hat_sums(params, alpha)
    d = 1.0 - s1
    if d <= 0.0:
        raise DenominatorNonpositive(f"1 - sum rho_j f_hat_j / gamma_j = {d:.3g} <= 0 at alpha = {alpha}",
                                     alpha=alpha)
    return d


def b_coefficient(params: GosParams, alpha: float) -> float:
    """Slope ``b(alpha)`` of the normalised broken line (overflows beyond alpha ~ 700)."""
    return math.exp(alpha) / _one_minus_sum(params, alpha)


def B_p(params: GosParams, p: float, alpha: float) -> float:
    """``B_p(alpha) = 1 / (b(alpha) D_p(alpha)^{1/p})``, evaluated without overflow."""
    return _one_minus_sum(params, alpha) * math.exp(-alpha) / norm_denominator(alpha, p) ** (1.0 / p)


def B_1(params: GosParams, alpha: float) -> float:
    """Closed form of ``B_p`` at ``p = 1``."""
    return 0.5 * math.exp(math.exp(-alpha)) * _one_minus_sum(params, alpha)


def B_limit(p: float) -> float:
    """``lim_{alpha -> inf} B_p(alpha)`` when every gamma_i > 1."""
    return 0.5 if p == 1 else 0.0


def negative_attainer(params: GosParams, p: float, alpha: float,
                   moments: Optional[MomentSpec] = None) -> ExtremalDistribution:
    """Atom-plus-exponential parent whose standardized expectation is ``-B_p(alpha)``."""
    moments = _moments(moments, p)
    return extremal.attainer_negative(params, p, alpha, b_coefficient(params, alpha), B_p(params, p, alpha), moments)


def _negative_result(params, p, report: MinimizerReport, moments, case, extra=None) -> BoundResult:
    value = -report.value
    attainer = None
    if not report.at_infinity:
        attainer = negative_attainer(params, p, report.argmin, moments)
    diag = {"beta0": report.t_argmin}
    diag.update(extra or {})
    return BoundResult(value if value != 0 else 0.0, case, alpha_or_y=report.argmin,
                       attained_in_limit=report.attained_in_limit, attainer=attainer,
                       minimizer=report, diagnostics=diag)


def bound_negative_Bp(params: GosParams, p: float, tol: Optional[Tolerances] = None,
                      moments: Optional[MomentSpec] = None) -> BoundResult:
    _require_negative_regime(params)
    moments = _moments(moments, p)
    report = minimize_on_halfline(lambda a: B_p(params, p, a), B_limit(p), tol)
    return _negative_result(params, p, report, moments, Case.NEGATIVE_BP)


def bound_B1(params: GosParams, tol: Optional[Tolerances] = None,
             moments: Optional[MomentSpec] = None) -> BoundResult:
    _require_negative_regime(params)
    moments = _moments(moments, 1.0)
    report = minimize_on_halfline(lambda a: B_1(params, a), 0.5, tol)
    return _negative_result(params, 1.0, report, moments, Case.NEGATIVE_BP)


# -- first gOS ----------------------------------------------------------------------

def n_p(alpha: float, p: float) -> float:
    return extremal.n_p(alpha, p)


def first_gos_sequence(gamma1: float, p: float, alpha: float) -> float:
    """Standardized expectation of the first gOS under the attainer with parameter ``alpha``."""
    num = alpha ** (1.0 - 1.0 / p) * (alpha ** (gamma1 - 1.0) / gamma1 - 1.0)
    den = alpha ** (p - 1) - alpha ** p + math.exp(-alpha) * (kink_integral(alpha, p) + math.gamma(p + 1))
    return num / den ** (1.0 / p)


def bound_first_gos(params: GosParams, p: float, moments: Optional[MomentSpec] = None) -> BoundResult:
    if params.r != 1 or params.gamma[0] < 1.0 or not p > 1.0:
        raise WrongCase("first-gOS analysis needs r = 1, gamma >= 1 and p > 1")
    g = params.gamma[0]
    if g == 1.0:
        return BoundResult(0.0, Case.ZERO_EXACT, diagnostics={"note": "E X = mu for every parent"})
    moments = _moments(moments, p)
    seq = {f"{a:g}": first_gos_sequence(g, p, a) for a in (1e-1, 1e-2, 1e-3)}
    return BoundResult(0.0, Case.FIRST_GOS_ZERO, alpha_or_y=0.0, attained_in_limit=True,
                       attainer=extremal.attainer_first_gos(g, p, 1e-3, moments),
                       diagnostics={"sequence": seq, "attainer_alpha": 1e-3})


def first_gos_p1_objective(gamma1: float, beta: float) -> float:
    return 0.5 * math.exp(beta) * (1.0 - beta ** (gamma1 - 1.0) / gamma1)


def bound_first_gos_p1(gamma1: float, tol: Optional[Tolerances] = None,
                       moments: Optional[MomentSpec] = None) -> BoundResult:
    """``-inf_{0 < beta <= 1} e^beta (1 - beta^(gamma-1)/gamma) / 2`` for the first gOS."""
    if not gamma1 > 1.0:
        raise WrongCase("gamma1 must exceed 1")
    beta, value, evals = minimize_unit_interval(lambda b: first_gos_p1_objective(gamma1, b), 0.5, tol)
    alpha = math.inf if beta == 0.0 else -math.log(beta)
    report = MinimizerReport(alpha, value, beta == 0.0, evals, beta)
    return _negative_result(new_params([gamma1]), 1.0, report, _moments(moments, 1.0), Case.FIRST_GOS_P1)


# -- dispatch -----------------------------------------------------------------------

def bound_zero_cases(params: GosParams, p: float = 2.0, tol: Optional[Tolerances] = None,
                     moments: Optional[MomentSpec] = None) -> BoundResult:
    cls = classify_dfr(params)
    moments = _moments(moments, p)
    if cls is DfrClass.RHO_EQ_ONE:
        return BoundResult(0.0, Case.ZERO_EXACT, attainer=extremal.attainer_exponential(moments),
                           diagnostics={"note": "attained by every shifted exponential parent"})
    if cls is DfrClass.RHO_BELOW_ONE:
        # rho < 1 already forces every gamma_i > 1
        return bound_negative_Bp(params, p, tol, moments)
    raise WrongCase(f"rho = {params.rho1} exceeds 1")


def dfr_bound(params: GosParams, p: float = 2.0, tol: Optional[Tolerances] = None,
              moments: Optional[MomentSpec] = None) -> BoundResult:
    """Sharp upper bound for a DFR parent, dispatching on ``rho`` and ``p``."""
    moments = _moments(moments, p)
    cls = classify_dfr(params)
    if params.r == 1 and cls is DfrClass.RHO_BELOW_ONE:
        if p == 1:
            return bound_first_gos_p1(params.gamma[0], tol, moments)
        return bound_first_gos(params, p, moments)
    if params.r == 1 and params.gamma[0] == 1.0:
        return BoundResult(0.0, Case.ZERO_EXACT, attainer=extremal.attainer_exponential(moments),
                           diagnostics={"note": "E X = mu for every parent"})
    if cls in (DfrClass.RHO_EQ_ONE, DfrClass.RHO_BELOW_ONE):
        return bound_zero_cases(params, p, tol, moments)
    if p != 2:
        raise UnsupportedByTheory(f"rho = {params.rho1} > 1: bounds are only available for p = 2")
    if cls is DfrClass.LINEAR:
        return bound_linear(params, moments)
    return bound_projection_C(params, tol, moments)
