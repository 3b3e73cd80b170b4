"""Nonpositive bounds for parents with decreasing failure rate on the average."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import density, extremal
from .dfr_bounds import BoundResult, Case, _moments, exp_abs_moment
from .errors import (
    ConditionFails,
    DenominatorNonpositive,
    NoBetaHat,
    NoInflectionPoint,
    RootNotFound,
    WrongCase,
)
from .extremal import MomentSpec
from .numerics import Tolerances, _tol, find_root, first_root, minimize_on_halfline
from .params import GosParams


@lru_cache(maxsize=1)
def alpha0() -> float:
    """Unique positive solution of ``alpha = (alpha + 1) e^{-alpha}`` (about 0.8065)."""
    return find_root(_alpha0_equation, 0.1, 2.0, Tolerances(root_abs=1e-15))


def _alpha0_equation(a):
    return a - (a + 1.0) * np.exp(-a)


@dataclass(frozen=True)
class DfraDiagnostics:
    theta_hat: float
    beta_hat: float
    condition_lhs: float
    condition_rhs: float
    condition_holds: bool
    alpha0: float
    reading: str

    def to_dict(self) -> dict:
        return asdict(self)


def inflection_point(params: GosParams, tol: Optional[Tolerances] = None) -> float:
    """Smallest positive zero crossing of the second derivative of ``f_hat``."""
    try:
        return first_root(lambda x: density.density_hat_derivatives(params, x, 2), 0.0, tol)
    except RootNotFound as exc:
        raise NoInflectionPoint(str(exc)) from None


def dfra_admissible(params: GosParams, tol: Optional[Tolerances] = None, reading: str = "j") -> DfraDiagnostics:
    """Locate ``theta_hat`` and ``beta_hat`` and test the admissibility condition.

    ``reading="j"`` evaluates ``sum_j (rho_j + beta) f_hat_j(beta) / gamma_j``;
    ``reading="r"`` uses ``f_hat_r(beta)`` (= 1) in every term instead.
    """
    tol = _tol(tol)
    if params.r < 2:
        raise WrongCase("the DFRA bound is stated for r >= 2")
    if reading not in ("j", "r"):
        raise ValueError("reading must be 'j' or 'r'")
    theta = inflection_point(params, tol)
    try:
        beta = first_root(lambda x: density.density_hat(params, x) - 1.0, 0.0, tol,
                          step=min(tol.scan_step, theta / 64.0), cap=theta)
    except RootNotFound:
        raise NoBetaHat(f"f_hat - 1 has no sign change on (0, {theta:.6g})") from None
    g = np.asarray(params.gamma)
    rho = params.rho_table
    fj = density.density_hat_all(params, beta) if reading == "j" else np.full(params.r, density.density_hat(params, beta))
    lhs = math.fsum((rho + beta) * fj / g)
    rhs = 1.0 + beta
    return DfraDiagnostics(theta, beta, lhs, rhs, lhs <= rhs, alpha0(), reading)


def bracket(params: GosParams, alpha):
    """``sum_j f_hat_j(alpha) (alpha + rho_j) / gamma_j - alpha - 1`` (must stay negative)."""
    s0, s1 = density.weighted_hat_sums(params, alpha)
    return s1 + alpha * s0 - alpha - 1.0


def b_alpha(params: GosParams, alpha: float) -> float:
    br = bracket(params, alpha)
    if br >= 0.0:
        raise DenominatorNonpositive(f"bracket = {br:.3g} >= 0 at alpha = {alpha}", alpha=alpha)
    return -math.exp(alpha) / br


def star_denominator(alpha: float, p: float) -> float:
    """p-th power norm of ``-k`` on ``[0, alpha)`` and ``x - k`` beyond, ``k = (alpha+1) e^{-alpha}``.

    Below ``alpha0`` the kink ``k`` lies right of ``alpha`` (three-term form);
    from ``alpha0`` on it does not (two-term form).
    """
    t = math.exp(-alpha)
    k = (alpha + 1.0) * t
    return k ** p * (1.0 - t) + exp_abs_moment(alpha, k, p)


def B_star(params: GosParams, p: float, alpha: float) -> float:
    """``B*_p(alpha) = 1 / (b_alpha D*(alpha)^{1/p})`` without forming ``e^alpha``."""
    br = bracket(params, alpha)
    if br >= 0.0:
        raise DenominatorNonpositive(f"bracket = {br:.3g} >= 0 at alpha = {alpha}", alpha=alpha)
    return -br * math.exp(-alpha) / star_denominator(alpha, p) ** (1.0 / p)


def B_star_limit(p: float) -> float:
    """``lim_{alpha -> inf} B*_p(alpha)``: 1/2 for p = 1, otherwise 0."""
    return 0.5 if p == 1 else 0.0


def dfra_attainer(params: GosParams, p: float, alpha: float,
                  moments: Optional[MomentSpec] = None) -> extremal.ExtremalDistribution:
    """Atom-plus-exponential parent whose standardized expectation is ``-B*_p(alpha)``."""
    moments = _moments(moments, p)
    return extremal.attainer_dfra(params, p, alpha, b_alpha(params, alpha), B_star(params, p, alpha), moments)


def bound_dfra(params: GosParams, p: float, tol: Optional[Tolerances] = None,
               moments: Optional[MomentSpec] = None, reading: str = "j") -> BoundResult:
    tol = _tol(tol)
    moments = _moments(moments, p)
    diag = dfra_admissible(params, tol, reading)
    if not diag.condition_holds:
        raise ConditionFails(f"admissibility condition fails: {diag.condition_lhs:.6g} > {diag.condition_rhs:.6g}")
    report = minimize_on_halfline(lambda a: B_star(params, p, a), B_star_limit(p), tol, open_at_zero=True)
    attainer = None
    if not report.at_infinity and report.argmin > 0:
        attainer = dfra_attainer(params, p, report.argmin, moments)
    value = -report.value
    return BoundResult(value if value != 0 else 0.0, Case.DFRA_NEGATIVE, alpha_or_y=report.argmin,
                       attained_in_limit=report.attained_in_limit, attainer=attainer,
                       minimizer=report, diagnostics=diag.to_dict())
