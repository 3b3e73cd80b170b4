"""Parameter vectors of generalized order statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    EmptyVector,
    InvalidModelParameters,
    NonPositiveGamma,
)

#: Absolute tolerance used to treat two rates as equal.
RATE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class GosParams:
    """Validated parameters ``gamma_1 >= ... >= gamma_r > 0`` of the r-th gOS.

    The marginal law of a single gOS is invariant under permutations of its
    parameters, so the vector is always stored sorted in non-increasing order.
    Use :func:`new_params` (or the constructors below) rather than building
    instances by hand.
    """

    gamma: tuple

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma)
        if not g:
            raise EmptyVector("gamma must contain at least one entry")
        if any(not math.isfinite(v) or v <= 0.0 for v in g):
            raise NonPositiveGamma(f"all gamma_i must be positive and finite, got {g}")
        object.__setattr__(self, "gamma", tuple(sorted(g, reverse=True)))

    @property
    def r(self) -> int:
        return len(self.gamma)

    @property
    def product(self) -> float:
        """Normalising constant ``gamma_1 * ... * gamma_r`` of the density."""
        return math.prod(self.gamma)

    def rho(self, j: int) -> float:
        return rho(self, j)

    @property
    def rho_table(self) -> np.ndarray:
        """Array ``[rho_{1,r}, ..., rho_{r,r}]``."""
        return rho_table(self)

    @property
    def rho1(self) -> float:
        return rho(self, 1)

    def prefix(self, j: int) -> "GosParams":
        """Parameters of the j-th gOS built from the same leading coefficients."""
        if not 1 <= j <= self.r:
            raise IndexError(f"prefix length {j} outside 1..{self.r}")
        return GosParams(self.gamma[:j])

    def __repr__(self):
        return f"GosParams(gamma={list(self.gamma)})"


def new_params(gamma: Union[Sequence[float], float]) -> GosParams:
    if np.ndim(gamma) == 0:
        gamma = [gamma]
    return GosParams(tuple(gamma))


def rho(params: GosParams, j: int) -> float:
    """``sum_{i=j}^r 1/gamma_i``, accumulated from the smallest term up."""
    if not 1 <= j <= params.r:
        raise IndexError(f"index j={j} outside 1..{params.r}")
    # gamma is non-increasing, so 1/gamma_i grows with i: add from j upward
    return math.fsum(1.0 / g for g in params.gamma[j - 1:])


def rho_table(params: GosParams) -> np.ndarray:
    return np.array([rho(params, j) for j in range(1, params.r + 1)])


# -- standard submodels -----------------------------------------------------

@dataclass(frozen=True)
class OrderStatistics:
    n: int
    r: int


@dataclass(frozen=True)
class KRecords:
    k: float
    r: int


@dataclass(frozen=True)
class ProgressiveCensoring:
    n: int
    removals: tuple
    r: int


def from_model(model) -> GosParams:
    """Embed a classical model of ordered data into the gOS framework.

    * r-th order statistic of n:      gamma_i = n - i + 1
    * r-th k-th record value:         gamma_i = k
    * progressive type-II censoring of n units with removals R_1, R_2, ...
      after the successive failures:  gamma_i = n - i + 1 - sum_{j<i} R_j
    """
    if isinstance(model, OrderStatistics):
        n, r = model.n, model.r
        if not (1 <= r <= n):
            raise InvalidModelParameters(f"need 1 <= r <= n, got n={n}, r={r}")
        return new_params([n - i + 1 for i in range(1, r + 1)])
    if isinstance(model, KRecords):
        if not model.k >= 1 or model.r < 1:
            raise InvalidModelParameters(f"need k >= 1 and r >= 1, got {model}")
        return new_params([model.k] * model.r)
    if isinstance(model, ProgressiveCensoring):
        n, R, r = model.n, tuple(model.removals), model.r
        m = len(R)
        if m < 1 or any(x < 0 for x in R):
            raise InvalidModelParameters(f"removal scheme must be non-empty and >= 0: {R}")
        if not (1 <= r <= m):
            raise InvalidModelParameters(f"need 1 <= r <= len(R)={m}, got r={r}")
        if m + sum(R) > n:
            raise InvalidModelParameters(f"m + sum(R) = {m + sum(R)} exceeds n = {n}")
        return new_params([n - i + 1 - sum(R[: i - 1]) for i in range(1, r + 1)])
    raise InvalidModelParameters(f"unknown model {model!r}")
