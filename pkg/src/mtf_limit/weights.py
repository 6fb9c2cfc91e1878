"""Weight distributions described through their Laplace transform.

A weight family is what the rest of the package needs to know about the iid
popularity weights: the transform ``phi(r) = E[exp(-r w)]`` with its first two
derivatives, the mean ``mu = -phi'(0)``, the atom ``p0 = P(w = 0)`` and a
sampler. Four families are built in (Dirac, Gamma, Geometric, Poisson); custom
families come from callables or from a JSON descriptor describing a finite
mixture of Gamma laws and point masses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .rng import stream


class Kind(str, Enum):
    DIRAC = "dirac"
    GAMMA = "gamma"
    GEOMETRIC = "geometric"
    POISSON = "poisson"
    CUSTOM = "custom"


FD_STEP = 1e-5
BISECT_TOL = 1e-12
BISECT_MAXITER = 200


def _fd_first(f, r):
    r = np.asarray(r, dtype=float)
    h = FD_STEP * (1.0 + r)
    central = (f(r + h) - f(np.maximum(r - h, 0.0))) / (2 * h)
    # second-order one-sided stencil where the backward point would leave [0, inf)
    forward = (-3 * f(r) + 4 * f(r + h) - f(r + 2 * h)) / (2 * h)
    return np.where(r < h, forward, central)


def _fd_second(f, r):
    r = np.asarray(r, dtype=float)
    h = FD_STEP * (1.0 + r)
    central = (f(r + h) - 2 * f(r) + f(np.maximum(r - h, 0.0))) / h**2
    forward = (2 * f(r) - 5 * f(r + h) + 4 * f(r + 2 * h) - f(r + 3 * h)) / h**2
    return np.where(r < h, forward, central)


@dataclass(frozen=True)
class WeightFamily:
    """An iid weight law seen through its Laplace transform.

    ``phi`` and, when given, ``dphi``/``d2phi`` must accept floats or numpy
    arrays. Missing derivatives are replaced by finite differences.
    ``inverse`` is an optional closed-form inverse of ``phi``.
    """

    kind: Kind
    params: dict
    mu: float
    p0: float
    phi: Callable
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    dphi: Optional[Callable] = None
    d2phi: Optional[Callable] = None
    inverse: Optional[Callable] = field(default=None, repr=False)
    second_moment: Optional[float] = None

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"mean weight must be positive and finite, got {self.mu}")
        if not 0.0 <= self.p0 < 1.0:
            raise DomainError(f"atom at zero must lie in [0, 1), got {self.p0}")

    def derivative(self, order):
        if order == 0:
            return self.phi
        if order == 1:
            return self.dphi if self.dphi is not None else (lambda r: _fd_first(self.phi, r))
        if order == 2:
            if self.d2phi is not None:
                return self.d2phi
            if self.dphi is not None:
                return lambda r: _fd_first(self.dphi, r)
            return lambda r: _fd_second(self.phi, r)
        raise DomainError(f"derivative order must be 0, 1 or 2, got {order}")

    def sample(self, rng, size):
        return np.asarray(self.sampler(rng, size), dtype=float)

    @property
    def has_finite_second_moment(self):
        return self.second_moment is not None and math.isfinite(self.second_moment)

    def describe(self):
        return {"kind": self.kind.value, "params": self.params}


# -- built-in families ------------------------------------------------------


def dirac():
    return WeightFamily(
        kind=Kind.DIRAC,
        params={},
        mu=1.0,
        p0=0.0,
        phi=lambda r: np.exp(-np.asarray(r, dtype=float)),
        dphi=lambda r: -np.exp(-np.asarray(r, dtype=float)),
        d2phi=lambda r: np.exp(-np.asarray(r, dtype=float)),
        inverse=lambda y: -np.log(y),
        sampler=lambda rng, size: np.ones(size),
        second_moment=1.0,
    )


def gamma(alpha):
    """Gamma(shape ``alpha``, scale 1) weights, ``phi(r) = (1 + r)**-alpha``."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"Gamma shape alpha must be positive, got {alpha}")
    a = float(alpha)

    def phi(r):
        return (1.0 + np.asarray(r, dtype=float)) ** -a

    def dphi(r):
        return -a * (1.0 + np.asarray(r, dtype=float)) ** (-a - 1)

    def d2phi(r):
        return a * (a + 1) * (1.0 + np.asarray(r, dtype=float)) ** (-a - 2)

    return WeightFamily(
        kind=Kind.GAMMA,
        params={"alpha": a},
        mu=a,
        p0=0.0,
        phi=phi,
        dphi=dphi,
        d2phi=d2phi,
        inverse=lambda y: np.asarray(y, dtype=float) ** (-1.0 / a) - 1.0,
        sampler=lambda rng, size: rng.gamma(a, 1.0, size),
        second_moment=a * (a + 1),
    )


def geometric(p):
    """Geometric weights on {0, 1, 2, ...} with ``P(w = k) = p (1 - p)**k``."""
    if not 0 < p < 1:
        raise DomainError(f"Geometric success probability must lie in (0, 1), got {p}")
    p = float(p)
    q = 1.0 - p

    # 1 - q e^{-r} written as p - q expm1(-r): exact at r = 0
    def _den(r):
        return p - q * np.expm1(-np.asarray(r, dtype=float))

    def phi(r):
        return p / _den(r)

    def dphi(r):
        z = q * np.exp(-np.asarray(r, dtype=float))
        return -p * z / _den(r) ** 2

    def d2phi(r):
        z = q * np.exp(-np.asarray(r, dtype=float))
        return p * z * (1.0 + z) / _den(r) ** 3

    def inverse(y):
        y = np.asarray(y, dtype=float)
        return np.log(q * y / (y - p))

    return WeightFamily(
        kind=Kind.GEOMETRIC,
        params={"p": p},
        mu=q / p,
        p0=p,
        phi=phi,
        dphi=dphi,
        d2phi=d2phi,
        inverse=inverse,
        # numpy's geometric counts trials, shift to failures
        sampler=lambda rng, size: rng.geometric(p, size) - 1,
        second_moment=q * (1 + q) / p**2,
    )


def poisson(lam):
    """Poisson weights, ``phi(r) = exp(lam * (exp(-r) - 1))``."""
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"Poisson rate lambda must be positive, got {lam}")
    lam = float(lam)

    def phi(r):
        return np.exp(lam * np.expm1(-np.asarray(r, dtype=float)))

    def dphi(r):
        e = np.exp(-np.asarray(r, dtype=float))
        return -lam * e * phi(r)

    def d2phi(r):
        e = np.exp(-np.asarray(r, dtype=float))
        return lam * e * (1.0 + lam * e) * phi(r)

    return WeightFamily(
        kind=Kind.POISSON,
        params={"lambda": lam},
        mu=lam,
        p0=math.exp(-lam),
        phi=phi,
        dphi=dphi,
        d2phi=d2phi,
        inverse=lambda y: -np.log1p(np.log(y) / lam),
        sampler=lambda rng, size: rng.poisson(lam, size),
        second_moment=lam + lam**2,
    )


def custom(phi, mu, p0, sampler, dphi=None, d2phi=None, inverse=None, second_moment=None, params=None):
    return WeightFamily(
        kind=Kind.CUSTOM,
        params=params or {},
        mu=float(mu),
        p0=float(p0),
        phi=phi,
        dphi=dphi,
        d2phi=d2phi,
        inverse=inverse,
        sampler=sampler,
        second_moment=second_moment,
    )


def mixture(components):
    """Finite mixture of Gamma laws and point masses.

    Each component is a dict with a ``weight`` and either
    ``{"kind": "gamma", "shape": a, "scale": theta}`` or
    ``{"kind": "point", "value": v}``. Weights are normalized.
    """
    if not components:
        raise DomainError("mixture needs at least one component")
    c = np.array([float(comp["weight"]) for comp in components])
    if np.any(c < 0) or c.sum() <= 0:
        raise DomainError("mixture weights must be nonnegative with positive sum")
    c = c / c.sum()
    gam = []  # (weight, shape, scale)
    pts = []  # (weight, value)
    for ci, comp in zip(c, components):
        kind = comp.get("kind", "gamma")
        if kind == "gamma":
            a, th = float(comp["shape"]), float(comp.get("scale", 1.0))
            if a <= 0 or th <= 0:
                raise DomainError(f"gamma component needs positive shape and scale, got {comp}")
            gam.append((ci, a, th))
        elif kind == "point":
            v = float(comp["value"])
            if v < 0:
                raise DomainError(f"point component needs a nonnegative value, got {comp}")
            pts.append((ci, v))
        else:
            raise DomainError(f"unknown mixture component kind {kind!r}")

    def phi(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for ci, a, th in gam:
            out = out + ci * (1 + th * r) ** -a
        for ci, v in pts:
            out = out + ci * np.exp(-v * r)
        return out

    def dphi(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for ci, a, th in gam:
            out = out - ci * a * th * (1 + th * r) ** (-a - 1)
        for ci, v in pts:
            out = out - ci * v * np.exp(-v * r)
        return out

    def d2phi(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for ci, a, th in gam:
            out = out + ci * a * (a + 1) * th**2 * (1 + th * r) ** (-a - 2)
        for ci, v in pts:
            out = out + ci * v**2 * np.exp(-v * r)
        return out

    ordered = [
        ("gamma", float(comp["shape"]), float(comp.get("scale", 1.0)))
        if comp.get("kind", "gamma") == "gamma"
        else ("point", float(comp["value"]), None)
        for comp in components
    ]

    def sampler(rng, size):
        which = rng.choice(len(ordered), size=size, p=c)
        out = np.empty(size)
        for idx, (kind, a, th) in enumerate(ordered):
            sel = which == idx
            out[sel] = rng.gamma(a, th, int(sel.sum())) if kind == "gamma" else a
        return out

    mu = sum(ci * a * th for ci, a, th in gam) + sum(ci * v for ci, v in pts)
    p0 = sum(ci for ci, v in pts if v == 0.0)
    m2 = sum(ci * a * (a + 1) * th**2 for ci, a, th in gam) + sum(ci * v**2 for ci, v in pts)
    return custom(
        phi, mu, p0, sampler, dphi=dphi, d2phi=d2phi, second_moment=m2,
        params={"components": [dict(comp) for comp in components]},
    )


_BUILTINS = {
    Kind.DIRAC: lambda params: dirac(),
    Kind.GAMMA: lambda params: gamma(params["alpha"]),
    Kind.GEOMETRIC: lambda params: geometric(params["p"]),
    Kind.POISSON: lambda params: poisson(params["lambda"]),
    Kind.CUSTOM: lambda params: mixture(params["components"]),
}


def from_descriptor(desc):
    """Build a family from ``{"kind": ..., "params": {...}}``."""
    try:
        kind = Kind(str(desc["kind"]).lower())
    except (KeyError, ValueError) as exc:
        raise DomainError(f"unknown or missing family kind in {desc!r}") from exc
    try:
        return _BUILTINS[kind](desc.get("params", {}))
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc} for family {kind.value}") from exc


def load_descriptor(path):
    with open(path) as fh:
        return from_descriptor(json.load(fh))


# -- operations -------------------------------------------------------------


def phi_eval(family, r, order=0):
    """Evaluate ``phi``, ``phi'`` or ``phi''`` (``order`` 0, 1, 2) at ``r >= 0``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise DomainError(f"Laplace variable must be nonnegative, got {r}")
    out = family.derivative(order)(r_arr)
    return float(out) if np.ndim(out) == 0 else out


def _bisect_inverse(phi, y):
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    for _ in range(2000):
        grow = phi(hi) >= y
        if not np.any(grow):
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2 * hi, hi)
    for _ in range(BISECT_MAXITER):
        mid = 0.5 * (lo + hi)
        if np.all((hi - lo <= BISECT_TOL) | (mid == lo) | (mid == hi)):
            break
        above = phi(mid) >= y
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return np.where(y >= 1.0, 0.0, 0.5 * (lo + hi))


def phi_inverse(family, y, method="auto"):
    """Solve ``phi(r) = y`` for ``r >= 0``; ``y`` must lie in ``(p0, 1]``.

    ``method="auto"`` uses the family's closed-form inverse when it has one,
    ``"bisect"`` forces bracketing bisection.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > family.p0)) or np.any(y_arr > 1.0):
        raise DomainError(f"phi takes values in ({family.p0}, 1], cannot invert {y}")
    if method == "auto" and family.inverse is not None:
        out = np.maximum(family.inverse(y_arr), 0.0)
    elif method in ("auto", "bisect"):
        out = _bisect_inverse(family.phi, y_arr)
    else:
        raise DomainError(f"unknown inversion method {method!r}")
    return float(out) if np.ndim(out) == 0 else out


def family_stats(family):
    return family.mu, family.p0


def sample_weights(family, n, seed):
    if n < 1:
        raise DomainError(f"need at least one weight, got n={n}")
    return family.sample(stream(seed, 0), n)


@dataclass
class ValidationReport:
    family: dict
    tol: float
    failures: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def fail(self, check, r, detail):
        self.failures.append({"check": check, "r": r, "detail": detail})

    def to_dict(self):
        return {
            "family": self.family,
            "tol": self.tol,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
        }


def validate_family(family, tol=1e-5, r_grid=None):
    """Check that a family's evaluators behave like a Laplace transform.

    Every failed check is recorded with the offending ``r``; nothing raises.
    """
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    report = ValidationReport(family=family.describe(), tol=tol)
    if r_grid is None:
        r_grid = np.concatenate([[0.0], np.logspace(-6, math.log10(50.0), 200)])
    r = np.asarray(r_grid, dtype=float)
    with np.errstate(all="ignore"):
        f0 = family.derivative(0)(r)
        f1 = family.derivative(1)(r)
        f2 = family.derivative(2)(r)

        report.checks.append("phi(0)=1")
        if abs(float(family.phi(0.0)) - 1.0) > tol:
            report.fail("phi(0)=1", 0.0, float(family.phi(0.0)))

        report.checks.append("decreasing")
        bad = np.nonzero(np.diff(f0) > 0)[0]
        for i in bad[:5]:
            report.fail("decreasing", float(r[i + 1]), float(f0[i + 1] - f0[i]))
        for i in np.nonzero(~(f1 < 0))[0][:5]:
            report.fail("decreasing", float(r[i]), float(f1[i]))

        report.checks.append("convex")
        slopes = np.diff(f0) / np.diff(r)
        slack = 1e-12 * np.maximum(np.abs(slopes[1:]), 1e-300)
        for i in np.nonzero(np.diff(slopes) < -slack)[0][:5]:
            report.fail("convex", float(r[i + 1]), float(slopes[i + 1] - slopes[i]))
        for i in np.nonzero(~(f2 >= 0))[0][:5]:
            report.fail("convex", float(r[i]), float(f2[i]))

        report.checks.append("mean")
        mean = -float(family.derivative(1)(0.0))
        if not abs(mean - family.mu) <= tol:
            report.fail("mean", 0.0, {"minus_dphi0": mean, "declared_mu": family.mu})

        report.checks.append("atom")
        r_max = 1e300
        tail = float(family.phi(r_max))
        if not abs(tail - family.p0) <= tol:
            report.fail("atom", r_max, {"phi_rmax": tail, "declared_p0": family.p0})

        # finite differences only mean something where one step moves phi resolvably
        live = np.abs(f1) * FD_STEP * (1.0 + r) > 1e-9 * np.abs(f0)
        if family.dphi is not None:
            report.checks.append("dphi-finite-difference")
            fd = _fd_first(family.phi, r)
            bad = live & ~(np.abs(fd - f1) <= tol * np.abs(f1))
            for i in np.nonzero(bad)[0][:5]:
                report.fail("dphi-finite-difference", float(r[i]), float(fd[i] - f1[i]))
        if family.d2phi is not None:
            report.checks.append("d2phi-finite-difference")
            fd = _fd_first(family.dphi, r) if family.dphi is not None else _fd_second(family.phi, r)
            bad = live & ~(np.abs(fd - f2) <= tol * np.abs(f2))
            for i in np.nonzero(bad)[0][:5]:
                report.fail("d2phi-finite-difference", float(r[i]), float(fd[i] - f2[i]))
    return report
