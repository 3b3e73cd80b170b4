"""DFR parent distributions used to probe the bounds empirically.

Each parent exposes the composed quantile ``q(x) = F^{-1}(1 - e^{-x})``; DFR
means ``q`` is convex.  Moments are computed by quadrature in ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .extremal import MomentSpec
from .numerics import Tolerances, integrate


class Parent:
    name = "parent"

    def composed_quantile(self, x):
        raise NotImplementedError

    def quantile(self, u):
        return self.composed_quantile(-np.log1p(-np.asarray(u, dtype=float)))

    def mean(self, tol: Optional[Tolerances] = None) -> float:
        return integrate(lambda x: float(self.composed_quantile(x)) * math.exp(-x), 0.0, math.inf, tol)

    def moments(self, p: float, tol: Optional[Tolerances] = None) -> MomentSpec:
        mu = self.mean(tol)
        xs = self._crossing(mu)
        cm = integrate(lambda x: abs(float(self.composed_quantile(x)) - mu) ** p * math.exp(-x),
                       0.0, math.inf, tol, points=[xs])
        return MomentSpec(p=p, mu=mu, sigma_p=cm ** (1.0 / p))

    def _crossing(self, level):
        lo, hi = 0.0, 1.0
        while float(self.composed_quantile(hi)) < level:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self.composed_quantile(mid)) < level:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ShiftedExponential(Parent):
    theta: float
    lam: float
    name: str = field(default="shifted_exponential", init=False)

    def composed_quantile(self, x):
        return self.theta + self.lam * np.asarray(x, dtype=float)

    def mean(self, tol=None):
        return self.theta + self.lam


@dataclass(frozen=True)
class Weibull(Parent):
    """``F(y) = 1 - exp(-(y/scale)^shape)``; DFR for ``shape <= 1``."""

    shape: float
    scale: float = 1.0
    name: str = field(default="weibull", init=False)

    def composed_quantile(self, x):
        return self.scale * np.asarray(x, dtype=float) ** (1.0 / self.shape)

    def mean(self, tol=None):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


@dataclass(frozen=True)
class Hyperexponential(Parent):
    """Finite mixture of exponentials with weights ``weights`` and means ``means`` (always DFR)."""

    weights: Sequence[float]
    means: Sequence[float]
    name: str = field(default="hyperexponential", init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12 or np.any(np.asarray(self.means) <= 0):
            raise ValueError("weights must be positive and sum to one; means must be positive")

    def mean(self, tol=None):
        return float(np.dot(self.weights, self.means))

    def composed_quantile(self, x):
        """Solve ``-log sum w_i exp(-y/m_i) = x`` by Newton from the left (the map is concave)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(self.weights, dtype=float)[:, None]
        m = np.asarray(self.means, dtype=float)[:, None]
        xf = np.atleast_1d(x).ravel()
        # both are lower bounds of the root, so Newton increases monotonically
        k = int(np.argmax(self.means))
        y = np.maximum(xf * m.min(), m[k, 0] * (xf + math.log(self.weights[k])))
        for _ in range(100):
            z = np.log(w) - y[None, :] / m
            log_surv = logsumexp(z, axis=0)
            hazard = np.sum(np.exp(z - log_surv) / m, axis=0)
            step = (xf + log_surv) / hazard
            y = y + step
            if np.all(np.abs(step) <= 1e-13 * np.maximum(1.0, y)):
                break
        return float(y[0]) if x.ndim == 0 else y.reshape(x.shape)
