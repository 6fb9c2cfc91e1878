"""Limiting distribution of the scaled move-to-front search cost.

For iid weights with Laplace transform ``phi`` and finite mean ``mu``, the
scaled cost ``S_n / n`` converges to a law ``S`` on ``[0, 1 - p0]`` with
density

    f(x) = -(1/mu) * phi''(r) / phi'(r),   r = phi^{-1}(1 - x),

and distribution function ``F(x) = 1 + phi'(r) / mu``. The generic route
evaluates these through ``phi_inverse``; the four built-in families also carry
their closed forms, which is what ``LimitLaw.of`` uses by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import _quad
from .errors import ConvergenceError, DomainError
from .weights import Kind, WeightFamily, phi_inverse

END_OFFSET = 1e-14
DENSITY_CAP = 1e12
QUANTILE_TOL = 1e-10
MOMENT_AGREEMENT = 1e-8


class ClosedForm(str, Enum):
    UNIFORM = "Uniform"
    BETA = "Beta(1, 1+1/alpha)"
    GEOMETRIC_POLY = "GeometricPoly(p)"
    POISSON_LOG = "PoissonLog(lambda)"


_TAGS = {
    Kind.DIRAC: ClosedForm.UNIFORM,
    Kind.GAMMA: ClosedForm.BETA,
    Kind.GEOMETRIC: ClosedForm.GEOMETRIC_POLY,
    Kind.POISSON: ClosedForm.POISSON_LOG,
}


@dataclass(frozen=True)
class LimitLaw:
    family: WeightFamily
    closed_form: Optional[ClosedForm] = None
    inverse_method: str = "auto"

    @classmethod
    def of(cls, family, closed_form=True, inverse_method="auto"):
        tag = _TAGS.get(family.kind) if closed_form else None
        return cls(family, tag, inverse_method)

    @property
    def support_end(self):
        return 1.0 - self.family.p0

    def generic(self, inverse_method=None):
        """Same law, evaluated through ``phi_inverse`` instead of closed forms."""
        return replace(self, closed_form=None, inverse_method=inverse_method or self.inverse_method)


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


def _closed_density(law, x):
    par = law.family.params
    tag = law.closed_form
    if tag is ClosedForm.UNIFORM:
        return np.ones_like(x)
    if tag is ClosedForm.BETA:
        a = par["alpha"]
        return (1 + 1 / a) * (1 - x) ** (1 / a)
    if tag is ClosedForm.GEOMETRIC_POLY:
        p = par["p"]
        return (2 * (1 - x) - p) / (1 - p)
    lam = par["lambda"]
    return (np.log1p(-x) + lam + 1) / lam


def _closed_cdf(law, x):
    par = law.family.params
    tag = law.closed_form
    if tag is ClosedForm.UNIFORM:
        return x
    if tag is ClosedForm.BETA:
        a = par["alpha"]
        return 1 - (1 - x) ** (1 + 1 / a)
    if tag is ClosedForm.GEOMETRIC_POLY:
        p = par["p"]
        return x * (2 - p - x) / (1 - p)
    lam = par["lambda"]
    return x - (1 - x) * np.log1p(-x) / lam


def _inverse_at(law, x):
    fam = law.family
    y = np.maximum(1.0 - x, fam.p0 + END_OFFSET)
    return phi_inverse(fam, np.minimum(y, 1.0), method=law.inverse_method)


def _generic_density(fam, r):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return -fam.derivative(2)(r) / (fam.mu * fam.derivative(1)(r))


def _endpoint_density(law):
    """One-sided limit of the generic density at ``x = 1 - p0``."""
    fam = law.family
    if fam.p0 > 0:
        offsets = [END_OFFSET]
    else:
        # f may vanish like a small power of 1 - x; get as close as phi^{-1} allows
        offsets = [1e-300, 1e-200, 1e-100, 1e-50, 1e-30, END_OFFSET]
    for off in offsets:
        with np.errstate(all="ignore"):
            r = phi_inverse(fam, fam.p0 + off, method=law.inverse_method)
            val = float(_generic_density(fam, r))
        if math.isfinite(r) and math.isfinite(val):
            return val
    return math.inf


def density(law, x):
    """Limit density ``f_S(x)``; zero outside ``[0, 1 - p0]``.

    At the right end the one-sided limit is returned, or ``inf`` when the
    generic evaluation exceeds ``DENSITY_CAP``.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xa)
    inside = (xa >= 0) & (xa <= law.support_end)
    if np.any(inside):
        xi = xa[inside]
        if law.closed_form is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = _closed_density(law, np.minimum(xi, law.support_end))
        else:
            at_end = 1.0 - xi <= law.family.p0 + END_OFFSET
            vals = np.empty_like(xi)
            if np.any(~at_end):
                vals[~at_end] = _generic_density(law.family, _inverse_at(law, xi[~at_end]))
            if np.any(at_end):
                vals[at_end] = _endpoint_density(law)
            vals = np.where(vals > DENSITY_CAP, np.inf, vals)
        out[inside] = np.maximum(vals, 0.0)
    return _scalar_or_array(out if np.ndim(x) else out[0], x)


def cdf(law, x):
    """``P(S <= x)``, computed from the exact antiderivative ``1 + phi'(r)/mu``."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.where(xa >= law.support_end, 1.0, 0.0)
    inside = (xa >= 0) & (xa < law.support_end)
    if np.any(inside):
        xi = xa[inside]
        if law.closed_form is not None:
            vals = _closed_cdf(law, xi)
        else:
            fam = law.family
            vals = 1.0 + fam.derivative(1)(_inverse_at(law, xi)) / fam.mu
        out[inside] = np.clip(vals, 0.0, 1.0)
    return _scalar_or_array(out if np.ndim(x) else out[0], x)


def survival(law, x):
    return _scalar_or_array(1.0 - np.asarray(cdf(law, x)), x)


def quantile(law, u):
    """Smallest ``x`` with ``cdf(x) >= u``, by bisection on the support."""
    ua = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(~((ua >= 0) & (ua <= 1))):
        raise DomainError(f"quantile level must lie in [0, 1], got {u}")
    lo = np.zeros_like(ua)
    hi = np.full_like(ua, law.support_end)
    while np.any(hi - lo > QUANTILE_TOL * 1e-2):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        ok = np.asarray(cdf(law, mid)) >= ua
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out = np.where(ua <= 0, 0.0, np.where(ua >= 1, law.support_end, hi))
    return _scalar_or_array(out if np.ndim(u) else out[0], u)


def _check_q(q):
    if not q > -1:
        raise DomainError(f"moment order must exceed -1 (E[S^q] diverges otherwise), got {q}")


def moment_y_route(law, q):
    """``E[S^q] = int_0^{1-p0} y^q f(y) dy`` with the power as a QUADPACK weight."""
    _check_q(q)
    f = lambda y: float(density(law, y))
    return _quad.integrate_interval_weighted(f, 0.0, law.support_end, alpha=q)


def moment_t_route(law, q):
    """``E[S^q] = (1/mu) int_0^inf (1 - phi(t))^q phi''(t) dt``."""
    _check_q(q)
    fam = law.family
    phi, d1, d2 = fam.derivative(0), fam.derivative(1), fam.derivative(2)
    mu = fam.mu

    def head(t):
        # (1 - phi(t))^q = t^q * ((1 - phi(t)) / t)^q, the t^q goes to the weight
        if t == 0.0:
            ratio = mu
        else:
            ratio = (1.0 - float(phi(t))) / t
        return ratio**q * float(d2(t)) / mu

    def body(t):
        return (1.0 - float(phi(t))) ** q * float(d2(t)) / mu

    def tail(t):
        return -float(d1(t)) / mu * max(1.0, (1.0 - float(phi(t))) ** q)

    t_end = _quad.tail_cutoff(tail)
    total = _quad.integrate_interval_weighted(head, 0.0, 1.0, alpha=q)
    a = 1.0
    while a < t_end:
        total += _quad.integrate_interval(body, a, 2 * a)
        a *= 2
    return total


def moment(law, q, check=True):
    """``E[S^q]`` for ``q > -1``.

    The change-of-variable route over ``[0, 1 - p0]`` gives the value; with
    ``check`` the half-line route is run as well and a ConvergenceError is
    raised if the two disagree by more than ``MOMENT_AGREEMENT``.
    """
    value = moment_y_route(law, q)
    if check:
        other = moment_t_route(law, q)
        if abs(value - other) > MOMENT_AGREEMENT:
            raise ConvergenceError(
                f"moment routes disagree for q={q}", y_route=value, t_route=other
            )
    return value


def mean(law):
    return moment(law, 1.0, check=False)


def variance(law):
    m1 = moment(law, 1.0, check=False)
    return moment(law, 2.0, check=False) - m1 * m1


def laplace_limit(law, s):
    """``E[exp(-s S)] = (1/mu) int_0^inf phi''(t) exp(-(1 - phi(t)) s) dt``."""
    if not s >= 0:
        raise DomainError(f"Laplace argument must be nonnegative, got {s}")
    fam = law.family
    phi, d1, d2 = fam.derivative(0), fam.derivative(1), fam.derivative(2)
    mu = fam.mu

    def f(t):
        return float(d2(t)) * math.exp(-(1.0 - float(phi(t))) * s) / mu

    return _quad.integrate_halfline(f, lambda t: -float(d1(t)) / mu)
