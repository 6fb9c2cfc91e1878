"""Finite-n move-to-front machinery.

Stationary search costs are sampled exactly, two ways:

``chain``
    Coupling from the past. Read requests backwards from now, ``r_{-1},
    r_{-2}, ...``, until every item of positive probability has appeared.
    Running the MTF chain forward over that segment (from the identity order,
    or from any order) ends in the list ranked by first backward appearance,
    and this state is exactly stationary. The position of one more
    independent request is then a stationary draw. Stopping a forward run at
    its own coverage time is not exact: the item that completes coverage is
    biased towards rare items and sits at the front.

``bernoulli``
    Poisson embedding. Give item ``j`` an exponential clock of rate ``p_j``
    running backwards from now; ``j`` sits above the requested item ``i`` iff
    its clock rings before ``i``'s. Conditional on ``i`` and on ``i``'s age
    ``T ~ Exp(p_i)``, the indicators are independent
    ``Bernoulli(1 - exp(-p_j T))``, so the cost is their sum. Without the
    conditioning on ``T`` the indicators are correlated.

Replicas are processed in fixed-size blocks; block ``b`` draws from
``rng.stream(seed, b)`` so the output does not depend on thread count.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _quad
from .errors import DegenerateInputError, DomainError, SizeError
from .limit_law import cdf as limit_cdf
from .rng import stream

METHODS = ("chain", "bernoulli")
BRUTEFORCE_MAX_N = 8
_CELLS_PER_BLOCK = 1 << 21
_CHAIN_CHUNK = 256


def _rows_per_block(n, method):
    # block layout depends only on (n, method), never on the thread count
    if method == "chain":
        return max(1, _CELLS_PER_BLOCK // (n * _CHAIN_CHUNK))
    return max(1, _CELLS_PER_BLOCK // n)


@dataclass(frozen=True)
class RequestProbabilities:
    p: np.ndarray
    n: int
    positive_count: int


def request_probabilities(weights):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise DegenerateInputError("weights must be a nonempty 1-d sequence")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise DegenerateInputError("all weights are zero, request distribution undefined")
    p = w / total
    p.setflags(write=False)
    return RequestProbabilities(p=p, n=w.size, positive_count=int(np.count_nonzero(w)))


def _as_request(p):
    if isinstance(p, RequestProbabilities):
        return p
    return request_probabilities(p)


@dataclass(frozen=True)
class MtfState:
    order: tuple

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise DomainError(f"not a permutation of 0..n-1: {self.order}")

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    def position(self, item):
        return self.order.index(item)


def mtf_step(state, item):
    """Move ``item`` to the front, keeping the relative order of the rest."""
    if not isinstance(item, (int, np.integer)) or not 0 <= item < len(state.order):
        raise DomainError(f"item {item!r} is not in the list")
    rest = tuple(x for x in state.order if x != item)
    return MtfState((int(item),) + rest)


@dataclass
class SearchCostSamples:
    costs: np.ndarray
    n: int
    seed: int
    method: str

    def __len__(self):
        return len(self.costs)

    @property
    def scaled(self):
        return self.costs / self.n

    def to_csv(self, path_or_file):
        if hasattr(path_or_file, "write"):
            _write_costs(path_or_file, self.costs)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write_costs(fh, self.costs)

    @classmethod
    def from_csv(cls, path, n, seed, method):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["cost"]:
                raise DomainError(f"expected header 'cost', got {header}")
            costs = np.array([int(row[0]) for row in reader], dtype=np.int64)
        return cls(costs, n, seed, method)


def _write_costs(fh, costs):
    fh.write("cost\n")
    fh.writelines(f"{int(c)}\n" for c in costs)


# -- exact stationary samplers ----------------------------------------------


def _bernoulli_costs(p, item, rng):
    """Costs for requested items ``item`` (one per row) under probabilities ``p``.

    ``p`` is either shape ``(n,)`` shared by all rows or ``(rows, n)``.
    """
    rows = item.shape[0]
    p_req = p[item] if p.ndim == 1 else p[np.arange(rows), item]
    age = rng.standard_exponential(rows) / p_req
    pm = p[None, :] if p.ndim == 1 else p
    above = rng.random((rows, pm.shape[1])) < -np.expm1(-pm * age[:, None])
    above[np.arange(rows), item] = False
    return above.sum(axis=1)


def _choice_rows(cum, rng):
    """One index per row of the row-wise cumulative weights ``cum``."""
    u = rng.random(cum.shape[0]) * cum[:, -1]
    return np.argmax(cum > u[:, None], axis=1)


def _chain_block(p, positive_count, rng, rows):
    n = p.size
    cum = np.cumsum(p)
    positive = np.flatnonzero(p > 0)
    out = np.empty(rows, dtype=np.int64)
    pending = np.arange(rows)
    # backward request history, most recent first, one row per pending replica
    hist = np.empty((rows, 0), dtype=np.int64)
    chunk = max(_CHAIN_CHUNK // 4, 4 * n)
    while pending.size:
        u = rng.random((pending.size, chunk)) * cum[-1]
        fresh = np.minimum(np.searchsorted(cum, u, side="right"), n - 1)
        hist = np.concatenate([hist, fresh], axis=1)
        span = hist.shape[1]
        # first backward appearance; the current list is ranked by it
        first = np.full((pending.size, n), span, dtype=np.int64)
        for j in positive:
            hit = hist == j
            first[:, j] = np.where(hit.any(axis=1), hit.argmax(axis=1), span)
        cover = first[:, positive].max(axis=1)
        ok = cover + 1 < span
        if np.any(ok):
            # one more independent request beyond the coverage point
            req = hist[ok, cover[ok] + 1]
            out[pending[ok]] = (first[ok] < first[ok, req][:, None]).sum(axis=1)
        pending, hist = pending[~ok], hist[~ok]
        chunk *= 2
    return out


def chain_state_from_past(requests_backward, n):
    """List order after replaying ``requests_backward`` (most recent first) from the identity."""
    state = MtfState.identity(n)
    for item in reversed(list(requests_backward)):
        state = mtf_step(state, int(item))
    return state


def _block_sizes(m, per):
    sizes = [per] * (m // per)
    if m % per:
        sizes.append(m % per)
    return sizes


def _run_blocks(fn, m, per, threads):
    sizes = _block_sizes(m, per)
    jobs = list(enumerate(sizes))
    if threads is None or threads <= 1 or len(jobs) == 1:
        parts = [fn(b, size) for b, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts).astype(np.int64) if parts else np.zeros(0, dtype=np.int64)


def sample_search_cost(p, m, seed, method="bernoulli", threads=1):
    """``m`` iid stationary search costs for fixed request probabilities ``p``."""
    req = _as_request(p)
    if m < 1:
        raise DomainError(f"need at least one sample, got m={m}")
    if method not in METHODS:
        raise DomainError(f"unknown sampling method {method!r}")
    pv = np.asarray(req.p)

    if method == "bernoulli":
        cum = np.cumsum(pv)

        def block(b, size):
            rng = stream(seed, b)
            u = rng.random(size) * cum[-1]
            item = np.minimum(np.searchsorted(cum, u, side="right"), req.n - 1)
            return _bernoulli_costs(pv, item, rng)
    else:

        def block(b, size):
            return _chain_block(pv, req.positive_count, stream(seed, b), size)

    costs = _run_blocks(block, m, _rows_per_block(req.n, method), threads)
    return SearchCostSamples(costs, req.n, seed, method)


def _weight_rows(family, rng, rows, n):
    """``rows`` weight vectors with positive total; zero-total rows are redrawn."""
    w = family.sample(rng, (rows, n))
    bad = w.sum(axis=1) <= 0
    while np.any(bad):
        w[bad] = family.sample(rng, (int(bad.sum()), n))
        bad = w.sum(axis=1) <= 0
    return w


def sample_search_cost_random(family, n, m, seed, method="bernoulli", threads=1):
    """Stationary costs with fresh iid weights per replicate.

    This is the joint law of the random request vector and the MTF chain, the
    object whose scaled limit is ``S``. Weight vectors summing to zero
    (possible with an atom at zero) are redrawn, i.e. the law is conditioned
    on ``W_n > 0``.
    """
    if n < 1 or m < 1:
        raise DomainError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if method not in METHODS:
        raise DomainError(f"unknown sampling method {method!r}")

    if method == "bernoulli":

        def block(b, size):
            rng = stream(seed, b)
            w = _weight_rows(family, rng, size, n)
            cum = np.cumsum(w, axis=1)
            item = _choice_rows(cum, rng)
            return _bernoulli_costs(w / cum[:, -1:], item, rng)
    else:

        def block(b, size):
            rng = stream(seed, b)
            w = _weight_rows(family, rng, size, n)
            out = np.empty(size, dtype=np.int64)
            for k in range(size):
                req = request_probabilities(w[k])
                out[k] = _chain_block(req.p, req.positive_count, rng, 1)[0]
            return out

    costs = _run_blocks(block, m, _rows_per_block(n, method), threads)
    return SearchCostSamples(costs, n, seed, method)


# -- exact oracles ------------------------------------------------------------


def stationary_pmf_bruteforce(p):
    """Exact pmf of the stationary search cost by enumerating all orders.

    Orders are enumerated over positive-probability items only; zero-weight
    items sit below them and are never requested.
    """
    req = _as_request(p)
    if req.n > BRUTEFORCE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTEFORCE_MAX_N}, got n={req.n}")
    pv = [float(x) for x in req.p]
    items = [i for i, x in enumerate(pv) if x > 0]
    pmf = np.zeros(req.n)
    for order in itertools.permutations(items):
        prob, remaining = 1.0, 1.0
        for i in order:
            prob *= pv[i] / remaining
            remaining -= pv[i]
        for pos, i in enumerate(order):
            pmf[pos] += prob * pv[i]
    return pmf / pmf.sum()


def laplace_Sn_quadrature(family, n, s):
    """``E[exp(-s S_n)]`` from the double-integral representation for iid weights.

    ``n * int_0^inf int_0^inf phi''(t+u) [phi(t+u) + e^{-s}(phi(u) - phi(t+u))]^{n-1} du dt``

    The integrand carries a factor ``w_1**2``, so the event that every weight
    is zero contributes nothing. The integral is therefore divided by
    ``1 - p0**n``, which conditions on a positive total exactly as the
    samplers do.
    """
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not s >= 0:
        raise DomainError(f"Laplace argument must be nonnegative, got {s}")
    phi, d2 = family.derivative(0), family.derivative(2)
    es = math.exp(-s)

    def inner(t):
        def g(u):
            r = t + u
            pr = float(phi(r))
            base = min(max(pr + es * (float(phi(u)) - pr), 0.0), 1.0)
            return float(d2(r)) * base ** (n - 1)

        return _quad.integrate_to_inf(g, budget=1e-8)

    value = n * _quad.integrate_to_inf(inner, budget=1e-7 / n)
    return value / -math.expm1(n * math.log(family.p0)) if family.p0 > 0 else value


def laplace_Sn_montecarlo(family, n, s, m, seed, threads=1):
    """Monte-Carlo ``E[exp(-s S_n)]`` with weights resampled per replicate.

    Returns ``(estimate, standard_error)``.
    """
    samples = sample_search_cost_random(family, n, m, seed, method="bernoulli", threads=threads)
    vals = np.exp(-s * samples.costs)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


# -- convergence diagnostics ----------------------------------------------------


def ks_distance(values, cdf):
    """Two-sided Kolmogorov-Smirnov distance between ``values`` and ``cdf``."""
    x = np.sort(np.asarray(values, dtype=float))
    m = x.size
    if m == 0:
        raise DomainError("need at least one value")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def ks_statistic(samples, law):
    """KS distance between the scaled costs ``S_n / n`` and the limit CDF."""
    return ks_distance(samples.scaled, lambda x: limit_cdf(law, x))
