"""Simulation of generalized order statistics and empirical checks of bounds.

Samples are generated in fixed-size chunks, each with its own child of a
``numpy.random.SeedSequence`` (PCG64 streams).  The stream therefore does
not depend on how many workers process the chunks, and chunk statistics are
merged in chunk order so estimates are bit-identical for any ``workers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, List, Optional

import numpy as np

from . import density
from .errors import NonFiniteSample
from .extremal import MomentSpec
from .numerics import Tolerances, integrate
from .params import GosParams

CHUNK = 1 << 17
ROUTES = ("expsum", "beta")


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    route: str

    @property
    def ci95(self):
        return (self.mean - 1.96 * self.std_error, self.mean + 1.96 * self.std_error)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


def _chunk_sizes(n: int):
    full, rest = divmod(n, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _draw_chunk(params: GosParams, size: int, seed_seq, route: str):
    """Return ``(u, x)``: the uniform gOS and ``x = -log(1 - u)`` computed without cancellation."""
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    g = np.asarray(params.gamma)[:, None]
    if route == "expsum":
        x = np.sum(rng.standard_exponential((params.r, size)) / g, axis=0)
        return -np.expm1(-x), x
    if route == "beta":
        logb = np.log(rng.random((params.r, size))) / g  # log of Beta(gamma_i, 1) draws
        s = np.sum(logb, axis=0)
        return -np.expm1(s), -s
    raise ValueError(f"route must be one of {ROUTES}")


def _seeds(seed: int, n: int):
    return np.random.SeedSequence(seed).spawn(len(_chunk_sizes(n)))


def sample_uniform_gos(params: GosParams, n: int, seed: int, route: str = "expsum") -> np.ndarray:
    """``n`` i.i.d. copies of the r-th uniform gOS."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parts = [_draw_chunk(params, m, s, route)[0] for m, s in zip(_chunk_sizes(n), _seeds(seed, n))]
    return np.concatenate(parts)


def sample_exponential_sum(params: GosParams, n: int, seed: int, route: str = "expsum") -> np.ndarray:
    """``n`` copies of ``-log(1 - U)`` for the r-th uniform gOS ``U``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parts = [_draw_chunk(params, m, s, route)[1] for m, s in zip(_chunk_sizes(n), _seeds(seed, n))]
    return np.concatenate(parts)


def estimate_standardized_expectation(params: GosParams, quantile_fn: Callable, moments: MomentSpec,
                                      n: int, seed: int, route: str = "expsum", scale: str = "u",
                                      workers: int = 1) -> EstimateWithCI:
    """Monte Carlo estimate of ``E (X_gamma^(r) - mu) / sigma_p`` with ``X = F^{-1}(U)``.

    ``scale="u"`` means ``quantile_fn`` is ``F^{-1}`` on (0, 1); ``scale="x"``
    means it is the composed quantile ``F^{-1}(1 - e^{-x})``.
    """
    return estimate_many(params, [(quantile_fn, moments)], n, seed, route, scale, workers)[0]


def estimate_many(params: GosParams, targets, n: int, seed: int, route: str = "expsum", scale: str = "u",
                  workers: int = 1) -> List[EstimateWithCI]:
    """Like :func:`estimate_standardized_expectation` for several ``(quantile_fn, moments)`` pairs.

    All targets are evaluated on the same draws (common random numbers), so
    each estimate equals the one obtained by a separate call with the same seed.
    """
    if scale not in ("u", "x"):
        raise ValueError("scale must be 'u' or 'x'")
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    targets = list(targets)

    def chunk_stats(job):
        size, ss = job
        u, x = _draw_chunk(params, size, ss, route)
        arg = x if scale == "x" else u
        out = []
        for fn, mom in targets:
            y = (np.asarray(fn(arg), dtype=float) - mom.mu) / mom.sigma_p
            if not np.all(np.isfinite(y)):
                raise NonFiniteSample(f"quantile function returned {np.sum(~np.isfinite(y))} non-finite values")
            m = float(np.mean(y))
            out.append((m, float(np.sum((y - m) ** 2))))
        return size, out

    jobs = list(zip(_chunk_sizes(n), _seeds(seed, n)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            stats = list(ex.map(chunk_stats, jobs))
    else:
        stats = [chunk_stats(j) for j in jobs]
    results = []
    for k in range(len(targets)):
        # Chan et al. pairwise merge, in chunk order
        count, mean, m2 = 0, 0.0, 0.0
        for size, out in stats:
            m, s2 = out[k]
            delta = m - mean
            tot = count + size
            mean += delta * size / tot
            m2 += s2 + delta * delta * count * size / tot
            count = tot
        results.append(EstimateWithCI(mean, math.sqrt(m2 / (count - 1) / count), count, seed, route))
    return results


def standardized_expectation_quad(params: GosParams, composed_fn: Callable, moments: MomentSpec,
                                  breakpoints=(), tol: Optional[Tolerances] = None, power: int = 1) -> float:
    """``E [((F^{-1}(U) - mu)/sigma_p)^power]`` by quadrature against the law of ``-log(1-U)``."""
    def integrand(x):
        y = (float(composed_fn(x)) - moments.mu) / moments.sigma_p
        return y ** power * float(density.hypoexp_pdf(params, x))

    return integrate(integrand, 0.0, math.inf, tol, points=list(breakpoints))


def model_std_error(params: GosParams, composed_fn: Callable, moments: MomentSpec, n: int,
                    breakpoints=(), tol: Optional[Tolerances] = None) -> float:
    """Exact standard error of the n-sample mean, from quadrature of the first two moments."""
    m1 = standardized_expectation_quad(params, composed_fn, moments, breakpoints, tol)
    m2 = standardized_expectation_quad(params, composed_fn, moments, breakpoints, tol, power=2)
    return math.sqrt(max(m2 - m1 * m1, 0.0) / n)

