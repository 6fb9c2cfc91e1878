"""LRU page-default (miss) probability from the move-to-front limit law.

An LRU cache of size ``k`` misses exactly when the requested item sits at MTF
position ``>= k``, so the page default is ``pi_k = P(S_n >= k)``. With
``k = alpha * n`` and ``n`` large this is the survival function of ``S`` at
``alpha``, which vanishes beyond ``1 - p0``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import limit_law
from .errors import DomainError
from .mtf_sim import _as_request, sample_search_cost

SIZE_TOL = 1e-12


@dataclass(frozen=True)
class MissCurve:
    alpha: np.ndarray
    pi: np.ndarray
    source: str = "asymptotic"

    @property
    def points(self):
        return list(zip(self.alpha.tolist(), self.pi.tolist()))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("alpha,pi\n")
        for a, p in self.points:
            buf.write(f"{a:.6g},{p:.6g}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps([[a, p] for a, p in self.points])


def page_default_asymptotic(law, alpha):
    """Large-n miss probability of an LRU cache holding a fraction ``alpha`` of the items."""
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a >= 0) & (a <= 1))):
        raise DomainError(f"cache fraction must lie in [0, 1], got {alpha}")
    out = np.where(a >= law.support_end, 0.0, 1.0 - np.asarray(limit_law.cdf(law, a)))
    return float(out) if out.ndim == 0 else out


def page_default_empirical(p, k, m, seed, method="bernoulli", threads=1):
    """Fraction of ``m`` stationary MTF costs at or beyond position ``k``."""
    req = _as_request(p)
    if not 0 <= k <= req.n:
        raise DomainError(f"cache size must lie in [0, {req.n}], got {k}")
    if k == 0:
        return 1.0
    samples = sample_search_cost(req, m, seed, method=method, threads=threads)
    return float(np.mean(samples.costs >= k))


def cache_size_index(alpha, n):
    """Cache size ``ceil(alpha * n)`` used when comparing against finite n."""
    return int(math.ceil(alpha * n - 1e-9))


def miss_curve(law, grid_size=1001):
    if grid_size < 2:
        raise DomainError(f"grid needs at least 2 points, got {grid_size}")
    alpha = np.linspace(0.0, 1.0, grid_size)
    return MissCurve(alpha, page_default_asymptotic(law, alpha), "asymptotic")


def cache_size_for_target(law, pi_target):
    """Smallest cache fraction whose asymptotic miss probability is at most ``pi_target``."""
    if not 0 < pi_target <= 1:
        raise DomainError(f"target miss probability must lie in (0, 1], got {pi_target}")
    if pi_target >= 1:
        return 0.0
    lo, hi = 0.0, law.support_end
    while hi - lo > SIZE_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if page_default_asymptotic(law, mid) <= pi_target:
            hi = mid
        else:
            lo = mid
    return hi
