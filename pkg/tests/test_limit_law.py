import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gammaln

from mtf_limit import limit_law as L
from mtf_limit import weights as W
from mtf_limit.errors import DomainError
from mtf_limit.limit_law import LimitLaw
from mtf_limit.rng import stream
from mtf_limit.stochastic_order import random_gamma_mixture


def law_of(fam, **kw):
    return LimitLaw.of(fam, **kw)


def quad(f, a, b, **kw):
    return integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=500, **kw)[0]


# -- worked examples ---------------------------------------------------------


def test_density_examples():
    assert L.density(law_of(W.dirac()), 0.4) == 1.0
    assert L.density(law_of(W.gamma(1)), 0.5) == pytest.approx(1.0, abs=1e-15)
    assert L.density(law_of(W.geometric(0.5)), 0.0) == pytest.approx(3.0, abs=1e-15)
    # same numbers along the generic route
    assert L.density(law_of(W.dirac()).generic(), 0.4) == pytest.approx(1.0, abs=1e-14)
    assert L.density(law_of(W.gamma(1)).generic(), 0.5) == pytest.approx(1.0, abs=1e-14)
    assert L.density(law_of(W.geometric(0.5)).generic(), 0.0) == pytest.approx(3.0, abs=1e-14)


def test_density_outside_support():
    law = law_of(W.geometric(0.3))
    assert L.density(law, -0.1) == 0.0
    assert L.density(law, 0.71) == 0.0
    assert L.density(law.generic(), 0.71) == 0.0
    np.testing.assert_array_equal(L.density(law, np.array([-1.0, 2.0])), [0.0, 0.0])


def test_terminal_density():
    # finite positive for atoms and Dirac, zero for Gamma
    assert L.density(law_of(W.dirac()).generic(), 1.0) == pytest.approx(1.0, abs=1e-12)
    assert L.density(law_of(W.gamma(2)).generic(), 1.0) == pytest.approx(0.0, abs=1e-12)
    p = 0.3
    assert L.density(law_of(W.geometric(p)).generic(), 1 - p) == pytest.approx(p / (1 - p), abs=1e-12)
    lam = 2.0
    assert L.density(law_of(W.poisson(lam)).generic(), 1 - math.exp(-lam)) == pytest.approx(1 / lam, abs=1e-12)


def test_cdf_examples():
    assert L.cdf(law_of(W.dirac()), 0.3) == pytest.approx(0.3, abs=1e-15)
    assert L.cdf(law_of(W.gamma(1)), 0.5) == pytest.approx(0.75, abs=1e-15)
    assert L.cdf(law_of(W.poisson(1)), 1 - math.exp(-1)) == 1.0
    assert L.cdf(law_of(W.poisson(1)).generic(), 1 - math.exp(-1)) == 1.0
    assert L.cdf(law_of(W.gamma(1)), -0.2) == 0.0
    assert L.cdf(law_of(W.gamma(1)), 1.2) == 1.0


def test_poisson_cdf_formula_at_support_end_limit():
    lam = 1.0
    x = 1 - math.exp(-lam) - 1e-9
    closed = x - (1 - x) * math.log(1 - x) / lam
    assert closed == pytest.approx(1.0, abs=1e-8)


def test_quantile_examples():
    assert L.quantile(law_of(W.dirac()), 0.25) == pytest.approx(0.25, abs=1e-10)
    assert L.quantile(law_of(W.gamma(1)), 0.75) == pytest.approx(0.5, abs=1e-10)
    for fam in (W.dirac(), W.gamma(3), W.geometric(0.4), W.poisson(2)):
        assert L.quantile(law_of(fam), 1.0) == 1 - fam.p0
        assert L.quantile(law_of(fam), 0.0) == 0.0
    with pytest.raises(DomainError):
        L.quantile(law_of(W.dirac()), 1.5)
    with pytest.raises(DomainError):
        L.quantile(law_of(W.dirac()), -0.01)


def test_moment_examples():
    assert L.moment(law_of(W.dirac()), 2) == pytest.approx(1 / 3, abs=1e-12)
    assert L.moment(law_of(W.gamma(2)), 1) == pytest.approx(0.4, abs=1e-12)
    assert L.moment(law_of(W.geometric(0.5)), 2) == pytest.approx(0.0625, abs=1e-12)


@pytest.mark.parametrize("q", [-1, -1.5, -3])
def test_moment_order_domain(q):
    with pytest.raises(DomainError):
        L.moment(law_of(W.gamma(1)), q)


@pytest.mark.parametrize("alpha", [0.25, 1.0, 2.5, 4.0])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 3.0])
def test_gamma_moment_formula(alpha, k):
    expected = math.exp(gammaln(k + 1) + gammaln(2 + 1 / alpha) - gammaln(2 + k + 1 / alpha))
    law = law_of(W.gamma(alpha))
    assert L.moment(law, k) == pytest.approx(expected, abs=1e-10)
    assert L.moment(law.generic(), k) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 3.0])
def test_geometric_moment_formula(p, k):
    expected = (2 + p * k) * (1 - p) ** k / ((k + 1) * (k + 2))
    assert L.moment(law_of(W.geometric(p)).generic(), k) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("lam", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_poisson_integer_moment_formula(lam, k):
    c = 1 - math.exp(-lam)
    expected = (lam + c ** (k + 1) - sum(c**i / i for i in range(1, k + 2))) / (lam * (k + 1))
    assert L.moment(law_of(W.poisson(lam)).generic(), k) == pytest.approx(expected, abs=1e-10)


def test_laplace_examples():
    for fam in (W.dirac(), W.gamma(1), W.geometric(0.2), W.poisson(3)):
        assert L.laplace_limit(law_of(fam), 0.0) == pytest.approx(1.0, abs=1e-10)
    assert L.laplace_limit(law_of(W.dirac()), 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-10)
    # int_0^1 2 (1 - x) e^{-x} dx = 2/e
    assert L.laplace_limit(law_of(W.gamma(1)), 1.0) == pytest.approx(2 * math.exp(-1), abs=1e-10)
    with pytest.raises(DomainError):
        L.laplace_limit(law_of(W.dirac()), -1.0)


# -- properties over the built-in sweep --------------------------------------


def test_normalization(builtin_law):
    law = builtin_law.generic()
    assert quad(lambda x: L.density(law, x), 0, law.support_end) == pytest.approx(1.0, abs=1e-8)


def test_closed_and_generic_agree(builtin_law):
    x = np.linspace(0, 1, 1000)
    for generic in (builtin_law.generic(), builtin_law.generic("bisect")):
        np.testing.assert_allclose(L.density(generic, x), L.density(builtin_law, x), rtol=0, atol=1e-8)
        np.testing.assert_allclose(L.cdf(generic, x), L.cdf(builtin_law, x), rtol=0, atol=1e-8)


def test_density_at_zero_is_scaled_second_moment(builtin_law):
    fam = builtin_law.family
    expected = W.phi_eval(fam, 0.0, 2) / (-W.phi_eval(fam, 0.0, 1) * fam.mu)
    assert L.density(builtin_law.generic(), 0.0) == pytest.approx(expected, abs=1e-6)
    assert expected == pytest.approx(fam.second_moment / fam.mu**2, rel=1e-12)


def test_cdf_shape(builtin_law):
    law = builtin_law.generic()
    x = np.linspace(-0.1, 1.1, 2001)
    F = L.cdf(law, x)
    assert np.all(np.diff(F) >= -1e-15)
    assert L.cdf(law, 0.0) == 0.0
    assert L.cdf(law, law.support_end) == 1.0


def test_density_nonincreasing(builtin_law):
    law = builtin_law.generic()
    x = np.linspace(0, law.support_end, 2001)
    assert np.all(np.diff(L.density(law, x)) <= 1e-12)


def test_cdf_derivative_is_density(builtin_law):
    law = builtin_law.generic()
    h = 1e-6
    x = np.linspace(0.01, law.support_end - 0.01, 97)
    fd = (np.asarray(L.cdf(law, x + h)) - np.asarray(L.cdf(law, x - h))) / (2 * h)
    np.testing.assert_allclose(fd, L.density(law, x), atol=1e-6)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 3.0])
def test_moment_routes_agree(builtin_law, q):
    law = builtin_law.generic()
    assert L.moment_t_route(law, q) == pytest.approx(L.moment_y_route(law, q), abs=1e-8)


def test_first_moment_is_mean_of_density(builtin_law):
    law = builtin_law.generic()
    direct = quad(lambda x: x * L.density(law, x), 0, law.support_end)
    assert L.moment(law, 1) == pytest.approx(direct, abs=1e-8)


@pytest.mark.parametrize("s", [0.5, 1.0, 5.0])
def test_laplace_matches_density_transform(builtin_law, s):
    law = builtin_law.generic()
    direct = quad(lambda x: math.exp(-s * x) * L.density(law, x), 0, law.support_end)
    assert L.laplace_limit(law, s) == pytest.approx(direct, abs=1e-8)


def test_quantile_inverts_cdf(builtin_law):
    law = builtin_law
    x = np.linspace(0.001, law.support_end - 0.001, 199)
    # where F is flat to rounding, u = F(x) no longer determines x
    x = x[L.density(law, x) >= 1e-6]
    np.testing.assert_allclose(L.quantile(law, L.cdf(law, x)), x, atol=1e-8)


# -- random Gamma mixtures ----------------------------------------------------


@pytest.mark.parametrize("index", range(8))
def test_random_mixture_properties(index):
    fam = random_gamma_mixture(stream(77, index))
    law = law_of(fam)
    assert law.closed_form is None
    assert quad(lambda x: L.density(law, x), 0, law.support_end) == pytest.approx(1.0, abs=1e-8)
    for q in (0.5, 1.0, 2.0):
        assert L.moment_t_route(law, q) == pytest.approx(L.moment_y_route(law, q), abs=1e-8)
    x = np.linspace(0, law.support_end, 501)
    assert np.all(np.diff(L.density(law, x)) <= 1e-10)
    assert L.density(law, 0.0) == pytest.approx(fam.second_moment / fam.mu**2, rel=1e-6)


def test_variance_helpers():
    for alpha in (0.5, 3.0):
        law = law_of(W.gamma(alpha))
        assert L.mean(law) == pytest.approx(alpha / (2 * alpha + 1), abs=1e-12)
        expected = (alpha + 1) * alpha**2 / ((3 * alpha + 1) * (2 * alpha + 1) ** 2)
        assert L.variance(law) == pytest.approx(expected, abs=1e-12)
