"""Quadrature, bracketed root finding and scalar minimisation on [0, inf).

All routines take a :class:`Tolerances` instance; ``None`` means the package
default (which can be changed through the ``GOSBOUNDS_TOLERANCES``
environment variable, see :meth:`Tolerances.from_env`).
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize as _optimize

from .errors import NoSignChange, RootNotFound

ENV_VAR = "GOSBOUNDS_TOLERANCES"

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Tolerances:
    quad_rel: float = 1e-10
    root_abs: float = 1e-12
    min_abs_x: float = 1e-8
    min_abs_f: float = 1e-10
    grid_points: int = 512
    scan_step: float = 1.0 / 64.0
    scan_cap: float = 50.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"tolerance {f.name} must be strictly positive")
        if self.grid_points < 16:
            raise ValueError("grid_points must be at least 16")
        object.__setattr__(self, "grid_points", int(self.grid_points))

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **overrides) -> "Tolerances":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "Tolerances":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def profile(cls, name: str) -> "Tolerances":
        try:
            return cls(**PROFILES[name])
        except KeyError:
            raise ValueError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}") from None

    @classmethod
    def from_env(cls) -> "Tolerances":
        """Profile name or JSON file named by ``$GOSBOUNDS_TOLERANCES``."""
        value = os.environ.get(ENV_VAR, "").strip()
        if not value:
            return cls()
        if value in PROFILES:
            return cls.profile(value)
        return cls.from_file(value)


PROFILES = {
    "default": {},
    "strict": {"quad_rel": 1e-12, "min_abs_x": 1e-10, "min_abs_f": 1e-12, "grid_points": 2048},
    "fast": {"quad_rel": 1e-8, "min_abs_x": 1e-6, "min_abs_f": 1e-8, "grid_points": 128},
}


def default_tolerances() -> Tolerances:
    return Tolerances.from_env()


def _tol(tol: Optional[Tolerances]) -> Tolerances:
    return default_tolerances() if tol is None else tol


# -- quadrature -------------------------------------------------------------

def integrate(f: Callable[[float], float], a: float, b: float, tol: Optional[Tolerances] = None,
              points=None, full_output: bool = False):
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``(a, b)``; ``b`` may be ``inf``.

    On non-convergence an :class:`scipy.integrate.IntegrationWarning` is
    emitted and the best estimate is still returned.  With
    ``full_output=True`` the result is ``(value, abs_error, converged)``.
    """
    tol = _tol(tol)
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    # QUADPACK rejects relative tolerances below 50 machine epsilons
    kw = dict(epsabs=0.0, epsrel=max(tol.quad_rel, 50 * np.finfo(float).eps), limit=500, full_output=1)
    if math.isinf(b):
        pieces = []
        lo = a
        for p in sorted(points or []):
            if lo < p < b:
                pieces.append((lo, p))
                lo = p
        pieces.append((lo, b))
        total, err, ok = 0.0, 0.0, True
        for lo, hi in pieces:
            res = _integrate.quad(f, lo, hi, **kw)
            total += res[0]
            err += res[1]
            ok = ok and len(res) == 3
    else:
        if points is not None:
            points = [p for p in points if a < p < b] or None
        res = _integrate.quad(f, a, b, points=points, **kw)
        total, err, ok = res[0], res[1], len(res) == 3
    if not ok:
        warnings.warn(f"quadrature on ({a}, {b}) did not converge (est. error {err:.3g})",
                      _integrate.IntegrationWarning, stacklevel=2)
    if full_output:
        return total, err, ok
    return total


# -- roots ------------------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float, tol: Optional[Tolerances] = None) -> float:
    """Root of ``f`` in ``[lo, hi]`` by Brent's safeguarded bisection/secant method."""
    tol = _tol(tol)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo})={flo:.6g} and f({hi})={fhi:.6g} have the same sign")
    return float(_optimize.brentq(f, lo, hi, xtol=tol.root_abs, rtol=4 * np.finfo(float).eps, maxiter=500))


def first_root(f: Callable, start: float = 0.0, tol: Optional[Tolerances] = None,
               step: Optional[float] = None, cap: Optional[float] = None,
               vectorized: bool = True) -> float:
    """Smallest root of ``f`` beyond ``start``.

    ``f`` is tabulated on ``start + k*step`` up to ``cap`` and the first sign
    change is refined with :func:`find_root`.  Grid points where ``f`` is
    exactly zero count as roots, except ``start`` itself; a value at ``start``
    that is roundoff-small relative to the tabulated range counts as zero.
    """
    tol = _tol(tol)
    step = tol.scan_step if step is None else step
    cap = tol.scan_cap if cap is None else cap
    grid = start + step * np.arange(0, int(math.ceil((cap - start) / step)) + 1)
    vals = np.asarray(f(grid)) if vectorized else np.array([f(x) for x in grid])
    s = np.sign(vals)
    if abs(vals[0]) <= 1e-12 * np.max(np.abs(vals)):
        s[0] = 0.0
    for k in range(1, len(grid)):
        if s[k] == 0.0:
            return float(grid[k])
        if s[k - 1] != 0.0 and s[k] != s[k - 1]:
            g = (lambda x: float(f(np.array([x]))[0])) if vectorized else f
            return find_root(g, float(grid[k - 1]), float(grid[k]), tol)
    raise RootNotFound(f"no sign change on [{start}, {cap}] with step {step}")


# -- minimisation -----------------------------------------------------------

@dataclass(frozen=True)
class MinimizerReport:
    """Outcome of a minimisation over ``alpha in [0, inf)``.

    ``argmin`` is ``math.inf`` when the infimum is the limit at infinity.
    ``t_argmin`` is the same point on the compactified scale ``t = exp(-alpha)``.
    """

    argmin: float
    value: float
    attained_in_limit: bool
    evaluations: int
    t_argmin: float

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.argmin)

    def to_dict(self) -> dict:
        return {
            "argmin": "inf" if self.at_infinity else self.argmin,
            "t_argmin": self.t_argmin,
            "value": self.value,
            "attained_in_limit": self.attained_in_limit,
            "evaluations": self.evaluations,
        }


def golden_section(g: Callable[[float], float], a: float, b: float, xtol: float):
    """Golden-section search for a minimum of ``g`` on ``[a, b]``.

    Returns ``(x, g(x), evaluations)``; the endpoints are not evaluated.
    """
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    gc, gd = g(c), g(d)
    n = 2
    while b - a > xtol:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - _INV_PHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INV_PHI * (b - a)
            gd = g(d)
        n += 1
    return (c, gc, n) if gc <= gd else (d, gd, n)


def minimize_unit_interval(g: Callable[[float], float], value_at_zero: float,
                           tol: Optional[Tolerances] = None):
    """Minimise ``g`` on ``[0, 1]`` where ``g(0)`` is supplied, not evaluated.

    Grid search on ``grid_points`` equispaced nodes, then golden-section
    refinement of the bracket around the best node.  Returns
    ``(t, value, evaluations)``; ties resolve to the largest ``t``.
    """
    tol = _tol(tol)
    n = tol.grid_points
    ts = np.linspace(0.0, 1.0, n)
    vals = np.empty(n)
    vals[0] = value_at_zero
    for k in range(1, n):
        vals[k] = g(ts[k])
    evals = n - 1
    k = n - 1 - int(np.argmin(vals[::-1]))
    best_t, best_v = ts[k], vals[k]
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, n - 1)]
    if hi - lo > tol.min_abs_x:
        x, v, m = golden_section(g, lo, hi, tol.min_abs_x)
        evals += m
        if v < best_v:
            best_t, best_v = x, v
    return float(best_t), float(best_v), evals


def minimize_on_halfline(f: Callable[[float], float], limit: float, tol: Optional[Tolerances] = None,
                         open_at_zero: bool = False) -> MinimizerReport:
    """Infimum of ``f`` over ``alpha in [0, inf)`` given ``limit = lim f(alpha)``.

    The half-line is mapped onto ``t = exp(-alpha) in (0, 1]`` so that the
    point at infinity becomes ``t = 0``.  When the limit beats every finite
    point the report carries ``argmin = inf``.  With ``open_at_zero`` the
    domain is ``(0, inf)`` and a minimum at ``alpha = 0`` is only approached.
    """
    tol = _tol(tol)

    def g(t):
        return f(-math.log(t)) if t < 1.0 else f(0.0)

    t, value, evals = minimize_unit_interval(g, limit, tol)
    if t == 0.0:
        return MinimizerReport(math.inf, value, True, evals, 0.0)
    alpha = -math.log(t) if t < 1.0 else 0.0
    return MinimizerReport(alpha, value, bool(open_at_zero and alpha == 0.0), evals, t)


# -- special integrals --------------------------------------------------------

def exp_power_integral(c: float, p: float) -> float:
    """``int_0^c s^p e^s ds`` for ``c >= 0`` by its everywhere-convergent power series."""
    if c < 0:
        raise ValueError("c must be non-negative")
    if c == 0.0:
        return 0.0
    total = 0.0
    term = c ** (p + 1)  # c^{p+k+1} / k!
    k = 0
    while True:
        inc = term / (p + k + 1)
        total += inc
        if k > c and inc <= 1e-17 * total:
            return total
        k += 1
        term *= c / k
