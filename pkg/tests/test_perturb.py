import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakyloop.chords import chord_moment
from leakyloop.errors import ArgumentError, PreconditionError
from leakyloop.geometry import CurvatureSpec, build_closed_from_curvature, random_curvature_spec
from leakyloop.perturb import (
    F_n,
    I_g,
    I_g_direct,
    c2_from_curvature,
    circle_c2,
    mode_kernel,
    mode_table_csv,
    second_order_expansion_audit,
)
from oracles import weighted_sine_integral

TWO_PI = 2 * math.pi
HALF_PI = math.pi / 2


# ---- F_n


def test_F1_at_quarter_period():
    assert F_n(1, HALF_PI) == pytest.approx((10 - 3 * math.pi) / 18, abs=1e-15)
    assert F_n(1, HALF_PI) == pytest.approx(0.0319568, abs=1e-7)


def test_F2_at_quarter_period():
    assert F_n(2, HALF_PI) == pytest.approx(math.pi / 16, abs=1e-15)


def test_F3_matches_quadrature():
    assert F_n(3, 0.3) == pytest.approx(weighted_sine_integral(3, 0.3)[0], abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 50])
def test_F_closed_forms_match_definition(n):
    v = np.linspace(0.01, HALF_PI, 40)
    assert np.max(np.abs(F_n(n, v) - weighted_sine_integral(n, v))) <= 1e-13


def test_F_positivity_on_fine_grid():
    v = np.linspace(HALF_PI / 1000, HALF_PI, 1000)
    for n in range(1, 201):
        assert np.all(F_n(n, v) > 0)


def test_F1_single_interior_maximum_beyond_quarter():
    v = np.linspace(0, HALF_PI, 4001)[1:]
    f = F_n(1, v)
    k = int(np.argmax(f))
    assert 0 < k < len(v) - 1
    assert v[k] > math.pi / 4
    slope = np.sign(np.diff(f))
    assert np.count_nonzero(np.diff(slope) != 0) == 1


def test_sine_below_identity():
    x = np.linspace(1e-6, 10, 1000)
    assert np.all(np.sin(x) < x)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.6, float("nan")])
def test_F_rejects_outside_range(bad):
    with pytest.raises(ArgumentError):
        F_n(2, bad)


def test_F_rejects_bad_index():
    with pytest.raises(ArgumentError):
        F_n(0, 1.0)


# ---- I_g


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_mode_kernel_matches_definition(n):
    v = np.linspace(0.01, HALF_PI, 40)
    assert np.max(np.abs(mode_kernel(n, v) - weighted_sine_integral(n, v, square=True))) <= 1e-13


def test_first_mode_kernel_turns_negative():
    # the n = 1 weight is negative near v = pi/2: (1/4) - pi^2 / 32
    assert mode_kernel(1, HALF_PI) == pytest.approx(0.25 - math.pi**2 / 32, abs=1e-15)
    assert mode_kernel(1, HALF_PI) < 0


def test_Ig_zero_spec():
    total, modes = I_g(CurvatureSpec(TWO_PI), 1.0)
    assert total == 0.0 and modes == []


def test_Ig_single_mode():
    eps, L, u = 0.01, TWO_PI, 2.0
    total, modes = I_g(CurvatureSpec(L, ((3, eps, 0.0),)), u)
    expected = L**5 / (2 * math.pi**4) * eps**2 / 9 * mode_kernel(3, math.pi * u / L)
    assert total == pytest.approx(expected, rel=1e-14)
    assert modes[0].n == 3 and modes[0].weight == pytest.approx(eps**2 / 9)


def test_Ig_closed_form_vs_direct():
    rng = np.random.default_rng(7)
    for _ in range(4):
        spec = random_curvature_spec(rng, 3.0, (1, 2, 3, 4, 5), 0.05)
        for u in (0.4, 1.0, 1.5):
            total = I_g(spec, u).total
            assert I_g_direct(spec, u) == pytest.approx(total, rel=1e-10, abs=1e-30)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=4).filter(
        lambda c: any(abs(a) + abs(b) > 1e-3 for a, b in c)
    ),
    st.floats(min_value=0.01, max_value=1.0),
)
def test_Ig_positive_without_first_mode(coeffs, frac):
    # no n = 1 mode: every mode weight is positive on (0, pi/2]
    spec = CurvatureSpec(TWO_PI, tuple((n + 2, a, b) for n, (a, b) in enumerate(coeffs)))
    assert I_g(spec, frac * math.pi).total > 0


def test_Ig_short_separation_regime_is_structural():
    # for u <= L/4 the defining integrand is nonnegative, whatever the modes
    spec = CurvatureSpec(TWO_PI, ((1, 0.3, -0.2), (4, 0.1, 0.0)))
    u = TWO_PI / 4
    x = np.linspace(0, u, 50)
    assert np.all(np.cos(2 * np.pi * x / TWO_PI) >= -1e-15)
    assert I_g(spec, u).total > 0
    # beyond L/4 a strong first mode drives the closed-form sum negative
    assert I_g(CurvatureSpec(TWO_PI, ((1, 0.3, 0.0),)), TWO_PI / 2).total < 0


def test_Ig_argument_checks():
    spec = CurvatureSpec(1.0, ((2, 0.1, 0.0),))
    for u in (0.0, 0.6):
        with pytest.raises(ArgumentError):
            I_g(spec, u)


def test_Ig_negative_for_closed_curves_never():
    # after closure projection the n = 1 pair is second order, so I_g > 0 again
    spec = random_curvature_spec(np.random.default_rng(0), TWO_PI, (1, 2, 3, 4, 5), 0.05)
    _, closed = build_closed_from_curvature(spec, 256)
    for u in np.linspace(0.1, math.pi, 8):
        assert I_g(closed, u).total > 0


# ---- c2 from curvature


def test_c2_circle():
    L = TWO_PI
    for u in (0.4, 1.7, math.pi):
        assert c2_from_curvature(CurvatureSpec(L), u) == pytest.approx(circle_c2(L, u), rel=1e-10)


def test_c2_second_mode_below_circle():
    L = TWO_PI
    assert c2_from_curvature(CurvatureSpec(L, ((2, 0.01, 0.0),)), L / 2) < circle_c2(L, L / 2)


def test_c2_matches_chord_moment_on_realised_curve():
    spec = CurvatureSpec(TWO_PI, ((2, 0.01, 0.0), (3, 0.003, 0.004)))
    curve, closed = build_closed_from_curvature(spec, 2048)
    for u in (TWO_PI / 8, TWO_PI / 4, TWO_PI / 2):
        assert abs(c2_from_curvature(closed, u) - chord_moment(curve, u, 2).value) <= 1e-6


def test_linear_term_cancels():
    # modes 2 + 3 = 5 so the cubic coupling is present
    spec = CurvatureSpec(TWO_PI, ((2, 1.0, 0.3), (3, -0.5, 0.2), (5, 0.4, 0.1)))
    u = 2.0
    odd = []
    for eps in (0.02, 0.01):
        odd.append(c2_from_curvature(spec.scaled(eps), u) - c2_from_curvature(spec.scaled(-eps), u))
    # no O(eps) part: halving eps shrinks the odd part by ~8
    assert abs(odd[0]) / abs(odd[1]) == pytest.approx(8.0, rel=0.05)


# ---- expansion audit


def test_audit_zero_spec():
    audit = second_order_expansion_audit(CurvatureSpec(TWO_PI), math.pi, 0.02)
    assert audit.residual_full == 0.0 and audit.verdict == "consistent"


def test_audit_generic_spec_is_cubic():
    spec = random_curvature_spec(np.random.default_rng(1), TWO_PI, (1, 2, 3, 4, 5), 1.0)
    audit = second_order_expansion_audit(spec, math.pi, 0.02)
    assert audit.verdict == "consistent"
    assert 6 <= audit.ratio <= 10


def test_audit_single_mode_cubic_term_vanishes():
    # for one mode the cubic coefficient integrates sin^3 over a period and vanishes: ratio ~16
    audit = second_order_expansion_audit(CurvatureSpec(1.0, ((2, 1.0, 0.0),)), 0.5, 0.02)
    assert audit.verdict == "consistent"
    assert audit.ratio == pytest.approx(16, rel=0.05)


def test_audit_precondition():
    with pytest.raises(PreconditionError):
        second_order_expansion_audit(CurvatureSpec(TWO_PI, ((2, 1.0, 0.0),)), math.pi, 0.02)


def test_mode_table_csv():
    spec = CurvatureSpec(TWO_PI, ((2, 0.01, 0.0), (5, 0.0, 0.02)))
    text = mode_table_csv(I_g(spec, 1.0))
    lines = text.splitlines()
    assert lines[0] == "n,a,b,weight,F,contribution"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "5"]
