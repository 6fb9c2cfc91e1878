"""Adaptive quadrature helpers built on QUADPACK (``scipy.integrate.quad``)."""

import math
import warnings

from scipy import integrate

from .errors import ConvergenceError

EPSABS = 1e-12
EPSREL = 1e-10
LIMIT = 200


def integrate_interval(f, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT, points=None):
    """Integrate ``f`` over the finite interval ``[a, b]``.

    Raises ConvergenceError when QUADPACK reports failure and the error
    estimate is worse than the requested tolerance.
    """
    if b <= a:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points, full_output=1
        )[:3]
    if not math.isfinite(value) or err > 100 * max(epsabs, epsrel * abs(value)):
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge",
            value=value,
            error_estimate=err,
            evaluations=info.get("neval"),
        )
    return value


def tail_cutoff(tail_mass, eps=1e-13, start=1.0, max_doublings=2000):
    """Smallest doubling ``t = start * 2**k`` with ``tail_mass(t) < eps``.

    ``tail_mass`` must be nonincreasing; it bounds the integral beyond ``t``.
    """
    t = start
    for _ in range(max_doublings):
        if tail_mass(t) < eps:
            return t
        t *= 2.0
        if not math.isfinite(t):
            break
    raise ConvergenceError("tail cutoff not found", last_t=t, tail=tail_mass(t / 2))


def integrate_halfline(f, tail_mass, eps=1e-13, epsabs=EPSABS, epsrel=EPSREL):
    """Integrate ``f`` over ``[0, inf)`` on dyadic pieces ``[0,1], [1,2], [2,4], ...``.

    The range is truncated at the first dyadic point where ``tail_mass`` (an
    upper bound on the remaining integral) drops below ``eps``. Dyadic pieces
    keep each QUADPACK call on a scale where polynomial tails look smooth.
    """
    t_end = tail_cutoff(tail_mass, eps=eps)
    total = integrate_interval(f, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel)
    a = 1.0
    while a < t_end:
        total += integrate_interval(f, a, 2.0 * a, epsabs=epsabs, epsrel=epsrel)
        a *= 2.0
    return total


def integrate_interval_weighted(f, a, b, alpha, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT):
    """Integrate ``f(x) * (x - a)**alpha`` over ``[a, b]`` (QUADPACK QAWS).

    Handles the integrable power singularity at ``a`` for ``alpha > -1``.
    """
    if b <= a:
        return 0.0
    if alpha == 0:
        return integrate_interval(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            f, a, b, weight="alg", wvar=(alpha, 0.0),
            epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1,
        )[:3]
    if not math.isfinite(value) or err > 100 * max(epsabs, epsrel * abs(value)):
        raise ConvergenceError(
            f"weighted quadrature on [{a}, {b}] did not converge",
            value=value,
            error_estimate=err,
            evaluations=info.get("neval"),
        )
    return value


def integrate_to_inf(f, epsabs=1e-11, epsrel=1e-10, budget=1e-7, limit=LIMIT):
    """Integrate over ``[0, inf)`` with QUADPACK QAGI.

    Roundoff warnings are tolerated as long as the error estimate stays
    within ``budget``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            f, 0.0, math.inf, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
        )[:3]
    if not math.isfinite(value) or err > budget:
        raise ConvergenceError(
            "half-line quadrature did not converge",
            value=value,
            error_estimate=err,
            evaluations=info.get("neval"),
        )
    return value
