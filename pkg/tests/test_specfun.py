import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakyloop.specfun import DomainError, EULER_GAMMA, bessel_i0, bessel_k0, free_kernel, k0_i0
from oracles import k0_integral

# mpmath.besselk(0, x) at 30 digits, frozen
MPMATH_K0 = {
    1e-8: 18.536612259610777,
    1e-4: 9.326271913450276,
    1e-6: 13.93144207362642,
    0.1: 2.4270690247020164,
    1.0: 0.42102443824070834,
    2.0: 0.11389387274953344,
    5.0: 0.0036910983340425942,
    30.0: 2.1324774964630563e-14,
    100.0: 4.656628229175902e-45,
    300.0: 3.7236948548891435e-132,
    700.0: 4.669776431685377e-306,
}


@pytest.mark.parametrize("x,expected", sorted(MPMATH_K0.items()))
def test_k0_reference_values(x, expected):
    assert bessel_k0(x) == pytest.approx(expected, rel=1e-14)


def test_k0_matches_integral_oracle_across_cutoff():
    x = np.linspace(1.9, 2.1, 201)
    assert np.max(np.abs(bessel_k0(x) / k0_integral(x) - 1)) < 1e-13


@pytest.mark.parametrize("x", [1e-4, 1e-6, 1e-8, 1e-12])
def test_k0_small_argument_asymptotics(x):
    # K0(x) + ln(x/2) + gamma = O(x^2 ln x)
    k0 = bessel_k0(x)
    assert abs(k0 + math.log(x / 2) + EULER_GAMMA) <= 3 * x * x * abs(math.log(x)) + 4e-16 * k0


def test_k0_convexity_grid():
    x = np.linspace(0.01, 20, 2000)
    h = 1e-3
    second = bessel_k0(x - h) + bessel_k0(x + h) - 2 * bessel_k0(x)
    assert np.all(second >= 0)


def test_k0_one_and_monotone_probe():
    assert bessel_k0(1.0) == pytest.approx(0.421024438240708, rel=1e-14)
    assert bessel_k0(2.0) < bessel_k0(1.0)


def test_k0_large_argument_asymptotics():
    x = 200.0
    lead = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 - 1 / (8 * x) + 9 / (128 * x * x))
    assert bessel_k0(x) == pytest.approx(lead, rel=1e-6)


def test_k0_underflows_to_zero():
    assert bessel_k0(800.0) == 0.0


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_k0_domain(bad):
    with pytest.raises(DomainError):
        bessel_k0(bad)


def test_k0_array_shape_and_scalar_type():
    out = bessel_k0(np.array([[0.5, 1.0], [3.0, 4.0]]))
    assert out.shape == (2, 2)
    assert isinstance(bessel_k0(1.0), float)


def test_i0_reference():
    # I0(1), I0(10) from mpmath
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-15)
    assert bessel_i0(10.0) == pytest.approx(2815.7166284662544, rel=1e-14)
    with pytest.raises(DomainError):
        bessel_i0(31.0)


def test_joint_evaluation_consistent():
    x = np.logspace(-3, 1.4, 300)
    k, i = k0_i0(x)
    assert np.array_equal(k, bessel_k0(x))
    assert np.allclose(i, bessel_i0(x), rtol=1e-15, atol=0)


def test_free_kernel():
    assert free_kernel(2.0, 0.5) == pytest.approx(MPMATH_K0[1.0] / (2 * math.pi), rel=1e-14)
    assert free_kernel(2.0, 0.5) == free_kernel(1.0, 1.0)
    assert 0 <= free_kernel(1.0, 700.0) < 1e-300
    with pytest.raises(DomainError):
        free_kernel(1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-5, max_value=60.0))
def test_k0_positive_and_decreasing(x):
    a, b = bessel_k0(x), bessel_k0(x * 1.001)
    assert a > 0 and b < a


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_k0_wronskian(x):
    # I0 K1 + I1 K0 = 1/x with K1 = -K0', I1 = I0'
    h = 1e-5 * x
    k1 = -(bessel_k0(x + h) - bessel_k0(x - h)) / (2 * h)
    i1 = (bessel_i0(x + h) - bessel_i0(x - h)) / (2 * h)
    assert bessel_i0(x) * k1 + i1 * bessel_k0(x) == pytest.approx(1 / x, rel=1e-7)
