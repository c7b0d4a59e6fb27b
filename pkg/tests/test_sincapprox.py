import math

import numpy as np
import pytest

from swiftpricing.sincapprox import SincKind, SincVariant, sinc_approx, sinc_error_bound

ALL_KINDS = list(SincKind)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_value_at_zero(kind):
    assert sinc_approx(0.0, SincVariant(kind, 8)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kind", [SincKind.VIETA_MIDPOINT, SincKind.TRAPEZOID])
def test_converges_to_sinc(kind):
    x = 3.3
    assert abs(sinc_approx(x, SincVariant(kind, 2**10)) - np.sinc(x)) < 1e-5


def test_vieta_product_identity():
    # prod_{j=1}^{n} cos(pi x / 2^j) is the average of J = 2^{n-1} cosines
    x, n = 1.7, 6
    prod = np.prod([math.cos(math.pi * x / 2**j) for j in range(1, n + 1)])
    assert sinc_approx(x, SincVariant(SincKind.VIETA_MIDPOINT, 2 ** (n - 1))) == pytest.approx(prod, abs=1e-15)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_even_in_x(kind):
    x = np.random.default_rng(0).uniform(-20, 20, 50)
    v = SincVariant(kind, 32)
    np.testing.assert_allclose(sinc_approx(-x, v), sinc_approx(x, v), atol=1e-15)


def test_simpson_is_two_thirds_mid_one_third_trapezoid():
    x = np.linspace(-5, 5, 21)
    mid = sinc_approx(x, SincVariant(SincKind.VIETA_MIDPOINT, 16))
    trap = sinc_approx(x, SincVariant(SincKind.TRAPEZOID, 16))
    np.testing.assert_allclose(sinc_approx(x, SincVariant(SincKind.SIMPSON, 16)), 2 / 3 * mid + trap / 3, atol=1e-15)


def _slope(kind, Js, x=2.37):
    errs = [abs(sinc_approx(x, SincVariant(kind, J)) - np.sinc(x)) for J in Js]
    return np.polyfit(np.log(Js), np.log(errs), 1)[0]


@pytest.mark.parametrize("kind", [SincKind.VIETA_MIDPOINT, SincKind.TRAPEZOID])
def test_second_order_slope(kind):
    Js = 2.0 ** np.arange(4, 13)
    assert _slope(kind, Js.astype(int)) == pytest.approx(-2.0, abs=0.3)


@pytest.mark.parametrize("kind", [SincKind.MIDPOINT_D1, SincKind.TRAPEZOID_D1])
def test_fourth_order_slope(kind):
    # beyond J = 2^9 the O(1/J^4) error falls under the rounding floor
    Js = 2 ** np.arange(4, 10)
    assert _slope(kind, Js) == pytest.approx(-4.0, abs=0.3)


def test_bound_zero_at_origin():
    assert sinc_error_bound(0.0, 4) == 0.0


@pytest.mark.parametrize("x", [0.3, 1.0, 7.5, 100.0, 1000.0])
def test_ceil_x_is_inside_convergence_domain(x):
    J = math.ceil(abs(x))
    assert math.pi * math.sqrt(0.08) <= 0.89
    assert math.isfinite(sinc_error_bound(x, J))


def test_bound_diverges_outside_domain():
    with pytest.raises(ValueError, match="diverges"):
        sinc_error_bound(10.0, 1)


def test_trapezoid_bound_is_twice_midpoint():
    assert sinc_error_bound(3.0, 5, trapezoid=True) == pytest.approx(2 * sinc_error_bound(3.0, 5))
