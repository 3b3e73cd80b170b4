"""Bound-attaining parent distributions.

Every distribution here is stored through its *composed quantile*
``q(x) = F^{-1}(1 - exp(-x))``, ``x >= 0``, as an ordered list of pieces on
consecutive ``x``-intervals.  This is the natural coordinate for the DFR and
DFRA classes (``q`` convex, resp. ``(q(x) - q(0))/x`` non-decreasing) and it
lets simulation feed exponential sums straight into ``q`` without the loss
of precision of ``u -> -log(1 - u)`` near ``u = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Union

import numpy as np

from . import density
from .errors import DomainError, InvalidCoefficients, NonMonotoneBranch, RootNotFound
from .numerics import Tolerances, exp_power_integral, first_root, integrate
from .params import GosParams


@dataclass(frozen=True)
class MomentSpec:
    """Location ``mu``, scale ``sigma_p`` and order ``p`` of the central absolute moment."""

    p: float = 2.0
    mu: float = 0.0
    sigma_p: float = 1.0

    def __post_init__(self):
        if not self.p >= 1.0:
            raise ValueError(f"moment order p must be >= 1, got {self.p}")
        if not self.sigma_p > 0.0:
            raise ValueError(f"sigma_p must be positive, got {self.sigma_p}")


# -- pieces -----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    location: float
    x_lo: float
    x_hi: float
    kind: str = field(default="atom", init=False)

    def value(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.location)

    @property
    def mass(self) -> float:
        return math.exp(-self.x_lo) - math.exp(-self.x_hi)


@dataclass(frozen=True)
class ExponentialTail:
    """Shifted exponential piece ``F(y) = 1 - exp(-(y - location)/scale - x_lo)``."""

    location: float
    scale: float
    x_lo: float
    x_hi: float = math.inf
    kind: str = field(default="exponential_tail", init=False)

    @property
    def onset_probability(self) -> float:
        return -math.expm1(-self.x_lo)

    def value(self, x):
        return self.location + self.scale * (np.asarray(x, dtype=float) - self.x_lo)


@dataclass(frozen=True)
class AffineInExponentialArgument:
    """``q(x) = intercept + slope * x``."""

    slope: float
    intercept: float
    x_lo: float
    x_hi: float = math.inf
    kind: str = field(default="affine_exp_arg", init=False)

    def value(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class InverseDensitySegment:
    """``q(x) = offset + slope * f_hat_{gamma,r}(x)``.

    On the corresponding probability range the cdf is the inverse of the
    uniform-gOS density on its increasing branch.
    """

    gamma: tuple
    offset: float
    slope: float
    x_lo: float
    x_hi: float
    kind: str = field(default="inverse_density", init=False)

    def value(self, x):
        return self.offset + self.slope * density.density_hat(GosParams(self.gamma), x)


Piece = Union[Atom, ExponentialTail, AffineInExponentialArgument, InverseDensitySegment]
_KINDS = {"atom": Atom, "exponential_tail": ExponentialTail,
          "affine_exp_arg": AffineInExponentialArgument, "inverse_density": InverseDensitySegment}


@dataclass(frozen=True)
class ExtremalDistribution:
    pieces: tuple
    moments: MomentSpec
    label: str = ""

    def __post_init__(self):
        if not self.pieces or self.pieces[0].x_lo != 0.0:
            raise InvalidCoefficients("pieces must start at x = 0")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.x_hi != b.x_lo:
                raise InvalidCoefficients("pieces must tile [0, inf) without gaps")
        if not math.isinf(self.pieces[-1].x_hi):
            raise InvalidCoefficients("last piece must extend to infinity")

    @property
    def breakpoints(self) -> List[float]:
        return [p.x_lo for p in self.pieces[1:]]

    def composed_quantile(self, x):
        """``F^{-1}(1 - exp(-x))`` for ``x >= 0`` (vectorised)."""
        arr = np.asarray(x, dtype=float)
        out = np.empty_like(arr)
        for p in self.pieces:
            m = (arr >= p.x_lo) & (arr < p.x_hi)
            if np.any(m):
                out[m] = p.value(arr[m])
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, u):
        arr = np.asarray(u, dtype=float)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainError("u must lie in (0, 1)")
        return self.composed_quantile(-np.log1p(-arr))

    def cdf(self, y: float) -> float:
        """``F(y)`` by bisection on the non-decreasing composed quantile."""
        q = self.composed_quantile
        if y < q(0.0):
            return 0.0
        lo, hi = 0.0, 1.0
        while q(hi) <= y:
            lo, hi = hi, 2.0 * hi
            if hi > 1e4:
                return 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if q(mid) <= y:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-14 * max(1.0, hi):
                break
        return -math.expm1(-lo)

    # -- moments ----------------------------------------------------------

    def _integral(self, fn, tol):
        """``int_0^inf fn(q(x)) e^{-x} dx`` piece by piece; atoms exactly."""
        total = 0.0
        for p in self.pieces:
            if isinstance(p, Atom):
                total += p.mass * fn(p.location)
                continue
            g = lambda x, p=p: fn(float(p.value(x))) * math.exp(-x)
            pts = None
            if not isinstance(p, InverseDensitySegment):
                # kink of |q - mu|^p where the affine piece crosses mu
                slope = p.scale if isinstance(p, ExponentialTail) else p.slope
                q0 = float(p.value(p.x_lo))
                if slope > 0 and q0 < self.moments.mu:
                    pts = [p.x_lo + (self.moments.mu - q0) / slope]
            else:
                root = _crossing(p, self.moments.mu)
                pts = [root] if root is not None else None
            total += integrate(g, p.x_lo, p.x_hi, tol, points=pts)
        return total

    def mean(self, tol: Optional[Tolerances] = None) -> float:
        return self._integral(lambda y: y, tol)

    def central_abs_moment(self, p: Optional[float] = None, tol: Optional[Tolerances] = None) -> float:
        """``E|X - mu_target|^p`` (defaults to the target order)."""
        p = self.moments.p if p is None else p
        mu = self.moments.mu
        return self._integral(lambda y: abs(y - mu) ** p, tol)

    def check_moments(self, rel: float = 1e-6, tol: Optional[Tolerances] = None) -> dict:
        m = self.moments
        mean = self.mean(tol)
        cm = self.central_abs_moment(tol=tol)
        return {
            "mean": mean,
            "central_abs_moment": cm,
            "mean_ok": abs(mean - m.mu) <= rel * m.sigma_p,
            "moment_ok": abs(cm - m.sigma_p ** m.p) <= rel * m.sigma_p ** m.p,
        }

    # -- class membership checks -------------------------------------------

    def min_second_difference(self, x_max: float = 20.0, n: int = 2001) -> float:
        """Smallest scaled second difference of ``q`` on a grid (>= 0 for DFR)."""
        x = np.linspace(0.0, x_max, n)
        h = x[1] - x[0]
        q = self.composed_quantile(x)
        return float(np.min((q[2:] - 2 * q[1:-1] + q[:-2]) / (h * h)) * h * h / self.moments.sigma_p)

    def star_ratio_nondecreasing(self, x_max: float = 20.0, n: int = 2001, slack: float = 1e-8) -> bool:
        """Whether ``(q(x) - q(0)) / x`` is non-decreasing on a grid (DFRA check)."""
        x = np.linspace(0.0, x_max, n)[1:]
        ratio = (self.composed_quantile(x) - self.composed_quantile(0.0)) / x
        return bool(np.all(np.diff(ratio) >= -slack * self.moments.sigma_p))

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        pieces = []
        for p in self.pieces:
            d = asdict(p)
            if "gamma" in d:
                d["gamma"] = list(d["gamma"])
            for key in ("x_lo", "x_hi"):
                if math.isinf(d[key]):
                    d[key] = "inf"
            pieces.append(d)
        return {"label": self.label, "moments": asdict(self.moments), "pieces": pieces}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ExtremalDistribution":
        pieces = []
        for d in data["pieces"]:
            d = dict(d)
            kind = d.pop("kind")
            for key in ("x_lo", "x_hi"):
                if d.get(key) == "inf":
                    d[key] = math.inf
            if "gamma" in d:
                d["gamma"] = tuple(d["gamma"])
            pieces.append(_KINDS[kind](**d))
        return cls(tuple(pieces), MomentSpec(**data["moments"]), data.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "ExtremalDistribution":
        return cls.from_dict(json.loads(text))


def _crossing(piece: InverseDensitySegment, mu: float):
    lo, hi = piece.x_lo, piece.x_hi
    vlo, vhi = float(piece.value(lo)) - mu, float(piece.value(hi)) - mu
    if vlo * vhi >= 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (float(piece.value(mid)) - mu) * vlo > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- constructors -------------------------------------------------------------

def shifted_exponential(location: float, scale: float, moments: MomentSpec, label: str = "") -> ExtremalDistribution:
    if not scale > 0:
        raise InvalidCoefficients("scale must be positive")
    return ExtremalDistribution((ExponentialTail(location, scale, 0.0),), moments, label)


def atom_plus_exponential(atom: float, scale: float, alpha: float, moments: MomentSpec,
                          label: str = "") -> ExtremalDistribution:
    """Atom of mass ``1 - e^{-alpha}`` at ``atom`` followed by an exponential tail."""
    if not (scale > 0 and alpha >= 0 and math.isfinite(alpha)):
        raise InvalidCoefficients(f"need scale > 0 and finite alpha >= 0 (scale={scale}, alpha={alpha})")
    tail = ExponentialTail(atom, scale, alpha)
    if alpha == 0.0:
        return ExtremalDistribution((tail,), moments, label)
    return ExtremalDistribution((Atom(atom, 0.0, alpha), tail), moments, label)


def exponential_p_moment(p: float) -> float:
    """``E|V - 1|^p`` for a standard exponential ``V``."""
    return math.exp(-1.0) * (exp_power_integral(1.0, p) + math.gamma(p + 1.0))


def attainer_exponential(moments: MomentSpec) -> ExtremalDistribution:
    """Shifted exponential with mean ``mu`` and p-th central absolute moment ``sigma_p^p``."""
    lam = moments.sigma_p / exponential_p_moment(moments.p) ** (1.0 / moments.p)
    return shifted_exponential(moments.mu - lam, lam, moments, "exponential")


def attainer_linear_case(moments: MomentSpec) -> ExtremalDistribution:
    """``F(x) = 1 - exp(-(x - mu)/sigma_2 - 1)`` for ``x > mu - sigma_2``."""
    if moments.p != 2:
        raise InvalidCoefficients("the linear-case attainer is defined for p = 2")
    return shifted_exponential(moments.mu - moments.sigma_p, moments.sigma_p, moments, "linear-case")


def attainer_projection(params: GosParams, y_star: float, C: float, slope: float, moments: MomentSpec,
                        tol: Optional[Tolerances] = None) -> ExtremalDistribution:
    """Three-piece attainer of the projection bound ``C``.

    ``q(x) = mu + sigma (f_hat(x) - 1)/C`` on ``[0, y*]`` and the tangent-free
    linear continuation ``mu + sigma (f_hat(y*) + slope (x - y*) - 1)/C``
    beyond, where ``slope`` is the best-approximation slope at ``y*``.
    """
    if not (C > 0 and y_star > 0 and slope > 0):
        raise InvalidCoefficients(f"need C, y*, slope > 0 (C={C}, y*={y_star}, slope={slope})")
    mode = density_mode(params, tol)
    if mode is not None and y_star > mode:
        raise NonMonotoneBranch(f"f_hat decreases on [{mode:.6g}, {y_star:.6g}]; "
                                "the inverse-density branch is not monotone")
    s = moments.sigma_p / C
    fy = density.density_hat(params, y_star)
    pieces = (
        InverseDensitySegment(params.gamma, moments.mu - s, s, 0.0, y_star),
        AffineInExponentialArgument(s * slope, moments.mu + s * (fy - 1.0 - slope * y_star), y_star),
    )
    return ExtremalDistribution(pieces, moments, "projection")


def density_mode(params: GosParams, tol: Optional[Tolerances] = None) -> Optional[float]:
    """First critical point of ``f_hat`` (``None`` if it is monotone up to the scan cap)."""
    try:
        return first_root(lambda x: density.density_hat_derivatives(params, x, 1), 0.0, tol)
    except RootNotFound:
        return None


def attainer_negative(params: GosParams, p: float, alpha0: float, b_val: float, Bp_val: float,
                   moments: MomentSpec) -> ExtremalDistribution:
    """Atom at ``mu - e^{-alpha0} c1`` plus exponential tail of scale ``c1 = b B_p sigma_p``."""
    if not (b_val > 0 and Bp_val > 0):
        raise InvalidCoefficients(f"need b > 0 and B_p > 0 (b={b_val}, B_p={Bp_val})")
    c1 = b_val * Bp_val * moments.sigma_p
    c2 = moments.mu - math.exp(-alpha0) * c1
    return atom_plus_exponential(c2, c1, alpha0, moments, "negative-bound")


def n_p(alpha: float, p: float) -> float:
    """Normaliser of the first-gOS attainers, see :func:`attainer_first_gos`."""
    val = alpha ** p - alpha ** (p + 1) + alpha * math.exp(-alpha) * (exp_power_integral(alpha, p) + math.gamma(p + 1))
    return val ** (1.0 / p)


def attainer_first_gos(gamma1: float, p: float, alpha: float, moments: MomentSpec) -> ExtremalDistribution:
    """Atom of mass ``1 - alpha`` and exponential of scale ``sigma_p / N_p(alpha)``."""
    if not 0.0 < alpha < 1.0:
        raise InvalidCoefficients(f"alpha must lie in (0, 1), got {alpha}")
    scale = moments.sigma_p / n_p(alpha, p)
    return atom_plus_exponential(moments.mu - alpha * scale, scale, -math.log(alpha), moments, "first-gos")


def attainer_dfra(params: GosParams, p: float, alpha_star: float, b_val: float, Bstar_val: float,
                  moments: MomentSpec) -> ExtremalDistribution:
    """Constant ``mu - b k B* sigma`` below ``alpha*``, ``mu + b B* sigma (x - k)`` above.

    ``k = (alpha* + 1) e^{-alpha*}``.  The second piece extends to infinity.
    """
    if not (b_val > 0 and Bstar_val > 0 and alpha_star > 0 and math.isfinite(alpha_star)):
        raise InvalidCoefficients("need b > 0, B* > 0 and finite alpha* > 0")
    k = (alpha_star + 1.0) * math.exp(-alpha_star)
    s = b_val * Bstar_val * moments.sigma_p
    pieces = (
        Atom(moments.mu - s * k, 0.0, alpha_star),
        ExponentialTail(moments.mu + s * (alpha_star - k), s, alpha_star),
    )
    return ExtremalDistribution(pieces, moments, "dfra")
