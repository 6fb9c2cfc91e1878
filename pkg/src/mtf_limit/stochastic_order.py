"""Numerical check of ``S <=_st Uniform(0, 1)`` for a given limit law.

``S`` is stochastically smaller than the uniform law iff ``F_S(x) >= x`` on
``[0, 1]``, so the report records the largest ``x - F_S(x)`` over a grid.
Random mixture sweeps never raise on a violation; they return the offending
families so they can be inspected.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import limit_law, weights
from .errors import DomainError
from .rng import stream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DominanceReport:
    family: dict
    grid_size: int
    tolerance: float
    max_violation: float
    worst_x: float
    passed: bool

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def dominance_report(law, grid_size=10_001, tolerance=1e-10):
    if grid_size < 10:
        raise DomainError(f"grid needs at least 10 points, got {grid_size}")
    if tolerance < 0:
        raise DomainError(f"tolerance must be nonnegative, got {tolerance}")
    x = np.linspace(0.0, 1.0, grid_size)
    gap = x - np.asarray(limit_law.cdf(law, x))
    i = int(np.argmax(gap))
    worst = float(gap[i])
    return DominanceReport(
        family=law.family.describe(),
        grid_size=grid_size,
        tolerance=tolerance,
        max_violation=worst,
        worst_x=float(x[i]),
        passed=worst <= tolerance,
    )


BUILTIN_SWEEP = (
    [("gamma", {"alpha": a}) for a in (0.25, 1.0, 4.0)]
    + [("geometric", {"p": p}) for p in (0.1, 0.5, 0.9)]
    + [("poisson", {"lambda": lam}) for lam in (0.5, 1.0, 5.0)]
    + [("dirac", {})]
)


def builtin_sweep(grid_size=10_001, tolerance=1e-10):
    return [
        dominance_report(limit_law.LimitLaw.of(weights.from_descriptor({"kind": k, "params": par})),
                         grid_size, tolerance)
        for k, par in BUILTIN_SWEEP
    ]


def random_gamma_mixture(rng, max_components=4, with_atom=True):
    """A random finite Gamma mixture, optionally with a point mass at zero."""
    k = int(rng.integers(1, max_components + 1))
    comps = [
        {
            "kind": "gamma",
            "weight": float(rng.uniform(0.05, 1.0)),
            "shape": float(np.exp(rng.uniform(np.log(0.2), np.log(10.0)))),
            "scale": float(np.exp(rng.uniform(np.log(0.1), np.log(10.0)))),
        }
        for _ in range(k)
    ]
    if with_atom and rng.random() < 0.3:
        comps.append({"kind": "point", "value": 0.0, "weight": float(rng.uniform(0.01, 0.5))})
    return weights.mixture(comps)


def random_mixture_sweep(count=100, seed=0, grid_size=2001, tolerance=1e-10):
    """Dominance reports for ``count`` random Gamma mixtures.

    Returns ``(reports, violations)``; violations are logged with the full
    family parameters, never raised.
    """
    rng = stream(seed, 0)
    reports = []
    for _ in range(count):
        fam = random_gamma_mixture(rng)
        reports.append(dominance_report(limit_law.LimitLaw.of(fam), grid_size, tolerance))
    violations = [r for r in reports if not r.passed]
    for r in violations:
        log.warning("dominance violated: %s", r.to_json())
    return reports, violations
