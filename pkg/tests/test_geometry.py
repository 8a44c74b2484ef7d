import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakyloop.errors import ArgumentError, NonClosableError
from leakyloop.geometry import (
    ArcLengthCurve,
    CurvatureSpec,
    Polygon,
    build_circle,
    build_closed_from_curvature,
    build_ellipse,
    build_from_curvature,
    build_lens,
    build_paperclip,
    build_regular_polygon,
    close_curve,
    closure_integrals,
    curve_from_dict,
    curve_to_dict,
    equilateral_reprojection,
    load_curve,
    load_polygon,
    load_spec,
    polygon_curve,
    polygon_to_dict,
    random_curvature_spec,
    resample,
    rhomboid,
    spec_to_dict,
)

TWO_PI = 2 * math.pi


def chord_at(curve, u):
    return curve.chords(curve.grid_index(u))


# ---- circle


def test_circle_diameter_and_quarter_chord():
    c = build_circle(TWO_PI, 64)
    assert np.allclose(chord_at(c, math.pi), 2.0, rtol=1e-14)
    assert np.allclose(chord_at(c, math.pi / 2), math.sqrt(2), rtol=1e-14)


def test_circle_half_length_chord_unit_length():
    c = build_circle(1.0, 256)
    assert np.allclose(chord_at(c, 0.5), 1 / math.pi, rtol=1e-14)


def test_circle_all_chords():
    c = build_circle(3.0, 128)
    for m in range(1, 65):
        exact = c.length / math.pi * abs(math.sin(math.pi * m / 128))
        assert np.allclose(c.chords(m), exact, rtol=1e-12, atol=0)


@pytest.mark.parametrize("L,N", [(0.0, 64), (-1.0, 64), (1.0, 15), (1.0, 17), (1.0, 8)])
def test_builder_argument_errors(L, N):
    with pytest.raises(ArgumentError):
        build_circle(L, N)


# ---- arc-length invariants


@pytest.mark.parametrize(
    "curve",
    [
        build_circle(TWO_PI, 2048),
        build_lens(1.0, TWO_PI, 2048),
        build_lens(2.0 / 3.0, TWO_PI, 2048),
        polygon_curve(build_regular_polygon(6, 1.0), 1200),
    ],
    ids=["circle", "lens", "apple", "hexagon"],
)
def test_uniform_spacing_for_analytic_curves(curve):
    # the inscribed polyline of a circle is short by pi^2 / (6 N^2): N = 2048 keeps it below 1e-6
    steps = np.hypot(*np.diff(np.vstack([curve.points, curve.points[:1]]), axis=0).T)
    # straight pieces give exactly h; arcs give 2R sin(h/2R)
    assert np.all(steps <= curve.step * (1 + 1e-12))
    assert curve.polyline_length() == pytest.approx(curve.length, rel=1e-6)


def test_polyline_deficit_of_circle():
    c = build_circle(TWO_PI, 1024)
    deficit = 1 - c.polyline_length() / c.length
    assert deficit == pytest.approx(math.pi**2 / (6 * 1024**2), rel=1e-5)


def test_ellipse_is_arc_length_sampled():
    e = build_ellipse(2.0, TWO_PI, 2048)
    assert e.polyline_length() == pytest.approx(TWO_PI, rel=1e-6)
    steps = np.hypot(*np.diff(np.vstack([e.points, e.points[:1]]), axis=0).T)
    assert np.ptp(steps) < 1e-5 * e.step


# ---- curvature specs


def test_spec_validation():
    with pytest.raises(ArgumentError):
        CurvatureSpec(1.0, ((0, 1.0, 0.0),))
    with pytest.raises(ArgumentError):
        CurvatureSpec(1.0, ((2, 1.0, 0.0), (2, 0.0, 1.0)))
    spec = CurvatureSpec(1.0, ((3, 0.1, 0.0), (1, 0.0, 0.2)))
    assert [m[0] for m in spec.modes] == [1, 3]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=6))
def test_sup_norm_bound_is_an_upper_bound(coeffs):
    spec = CurvatureSpec(2.0, tuple((n + 1, a, b) for n, (a, b) in enumerate(coeffs)))
    assert spec.sup_norm(2048) <= spec.sup_norm_bound * (1 + 1e-12)


def test_empty_spec_gives_unit_circle():
    c = build_from_curvature(CurvatureSpec(TWO_PI), 256)
    assert c.closure_defect <= 1e-10
    r = np.hypot(*(c.points - c.points.mean(axis=0)).T)
    assert np.allclose(r, 1.0, atol=1e-12)


def test_pure_second_mode_closes_to_second_order():
    c = build_from_curvature(CurvatureSpec(TWO_PI, ((2, 0.01, 0.0),)), 4096)
    assert c.closure_defect <= 1e-6


def test_first_mode_opens_at_first_order():
    c = build_from_curvature(CurvatureSpec(TWO_PI, ((1, 0.01, 0.0),)), 4096)
    assert 1e-3 < c.closure_defect < 1e-1


def test_curvature_curve_has_unit_speed_and_matching_tangent():
    spec = CurvatureSpec(TWO_PI, ((2, 0.05, 0.01), (3, -0.02, 0.03)))
    c, _ = build_closed_from_curvature(spec, 1024)
    assert c.polyline_length() == pytest.approx(TWO_PI, rel=1e-5)
    assert c.tangent_defect <= 1e-10


def test_close_curve_leaves_circle_unchanged():
    spec = CurvatureSpec(TWO_PI)
    c = build_from_curvature(spec, 128)
    closed, out = close_curve(c, spec)
    assert out.modes == ()
    assert np.allclose(closed.points, c.points, atol=1e-14)


def test_close_curve_small_first_mode_correction():
    spec = CurvatureSpec(TWO_PI, ((2, 0.05, 0.0),))
    closed, out = close_curve(build_from_curvature(spec, 512), spec)
    a1, b1 = out.mode(1)
    assert abs(a1) <= 1e-2 and abs(b1) <= 1e-2
    assert closed.closure_defect <= 1e-10 * TWO_PI
    assert abs(closure_integrals(out, 4096)) <= 1e-10 * TWO_PI
    assert out.mode(2) == (0.05, 0.0)


def test_close_curve_gives_up_on_large_defect():
    spec = CurvatureSpec(TWO_PI, ((1, 0.5, 0.0),))
    with pytest.raises(NonClosableError):
        close_curve(build_from_curvature(spec, 256), spec, max_iter=2)


def test_random_spec_reaches_requested_sup_norm():
    spec = random_curvature_spec(np.random.default_rng(3), TWO_PI, (2, 3, 4), 0.05)
    assert spec.sup_norm() == pytest.approx(0.05, rel=1e-12)
    assert [m[0] for m in spec.modes] == [2, 3, 4]


# ---- lens and paperclip


def test_lens_at_circle_radius_matches_circle_chords():
    L = TWO_PI
    lens = build_lens(L / TWO_PI, L, 256)
    circ = build_circle(L, 256)
    for m in (1, 17, 64, 128):
        assert np.allclose(lens.chords(m), circ.chords(m), rtol=1e-10)


def test_lens_shape_and_corners():
    L = TWO_PI
    lens = build_lens(L / math.pi, L, 512)
    c0, c1 = lens.points[0], lens.points[256]
    assert abs(c0[0]) < 1e-14 and abs(c1[0]) < 1e-14
    # each arc spans a quarter circle of radius 2, corner half-chord 2 sin(pi/4)
    assert abs(c1[1] - c0[1]) == pytest.approx(2 * 2 * math.sin(math.pi / 4), rel=1e-14)
    assert lens.corners == (0.0, L / 2)


def test_apple_is_reflex_but_simple():
    apple = build_lens(TWO_PI / (3 * math.pi), TWO_PI, 512)
    assert not apple.self_intersects()


def test_lens_radius_guard():
    with pytest.raises(ArgumentError):
        build_lens(0.5, TWO_PI, 64)  # L / 4pi


def test_paperclip_defects():
    clip = build_paperclip(1.0, 0.1, 0.01, 1024)
    assert clip.closure_defect == pytest.approx(0.9, rel=1e-14)
    assert clip.tangent_defect <= 1e-10
    assert not clip.is_closed
    sym = build_paperclip(1.0, 1.0, 0.01, 1024)
    assert sym.closure_defect <= 1e-14


# ---- polygons


def test_square_and_rhomboids():
    sq = build_regular_polygon(4, 1.0)
    assert np.allclose(sq.diagonals(2), math.sqrt(2), rtol=1e-15)
    r4 = rhomboid(math.pi / 4, 1.0)
    assert np.allclose(r4.diagonals(2), math.sqrt(2), rtol=1e-15)
    r3 = rhomboid(math.pi / 3, 1.0)
    assert sorted(set(np.round(r3.diagonals(2), 14))) == pytest.approx([1.0, math.sqrt(3)], rel=1e-14)


def test_rhomboid_right_angle_is_degenerate():
    # half-angle pi/2: one diagonal collapses to zero
    flat = rhomboid(math.pi / 2, 1.0)
    assert np.min(flat.diagonals(2)) < 1e-15


def test_regular_polygon_circumradius():
    p = build_regular_polygon(7, 0.3)
    r = np.hypot(*p.vertices.T)
    assert np.allclose(r, 0.3 / (2 * math.sin(math.pi / 7)), rtol=1e-14)


def test_polygon_equilateral_check():
    with pytest.raises(ArgumentError):
        Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]), 1.0)


def test_equilateral_reprojection():
    base = build_regular_polygon(6, 1.0)
    rng = np.random.default_rng(5)
    p = equilateral_reprojection(base.vertices + 0.01 * rng.standard_normal((6, 2)), 1.0)
    sides = np.hypot(*(np.roll(p.vertices, -1, axis=0) - p.vertices).T)
    assert np.allclose(sides, 1.0, atol=1e-11)


# ---- Euclidean invariance, resampling


def test_chords_invariant_under_rigid_motion():
    rng = np.random.default_rng(11)
    c = build_ellipse(1.7, 3.0, 256)
    moved = c.transformed(rng.uniform(0, TWO_PI), rng.normal(size=2) * 10)
    for m in (1, 40, 128):
        assert np.allclose(moved.chords(m), c.chords(m), rtol=1e-12, atol=0)


def test_resample_by_interpolation_is_spectral():
    c = build_ellipse(1.5, TWO_PI, 256)
    bare = ArcLengthCurve(c.length, c.points)
    up = resample(bare, 512)
    exact = build_ellipse(1.5, TWO_PI, 512)
    assert np.max(np.abs(up.points - exact.points)) < 1e-11
    down = resample(up, 256)
    assert np.max(np.abs(down.points - c.points)) < 1e-11


def test_resample_refuses_cornered_curve_without_evaluator():
    lens = build_lens(2.0, TWO_PI, 128)
    bare = ArcLengthCurve(lens.length, lens.points, breaks=lens.breaks, corners=lens.corners)
    with pytest.raises(ArgumentError):
        resample(bare, 256)


def test_self_intersection_flag():
    figure8 = ArcLengthCurve(
        TWO_PI,
        np.column_stack([np.sin(np.linspace(0, TWO_PI, 64, endpoint=False)),
                         np.sin(2 * np.linspace(0, TWO_PI, 64, endpoint=False))]),
    )
    assert figure8.self_intersects()
    assert not build_circle(1.0, 64).self_intersects()


# ---- files


def test_curve_round_trip(tmp_path):
    clip = build_paperclip(1.0, 0.5, 0.1, 256)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(curve_to_dict(clip)))
    back = load_curve(path)
    assert np.array_equal(back.points, clip.points)
    assert back.breaks == clip.breaks and np.array_equal(back.offset, clip.offset)
    assert back.source == "paperclip"
    data = json.loads(path.read_text())
    assert {"length", "n", "points", "closure_defect", "source"} <= set(data)


def test_spec_and_polygon_round_trip(tmp_path):
    spec = CurvatureSpec(2.0, ((2, 0.1, -0.2),))
    (tmp_path / "s.json").write_text(json.dumps(spec_to_dict(spec)))
    assert load_spec(tmp_path / "s.json") == spec
    poly = rhomboid(1.0, 2.0)
    (tmp_path / "p.json").write_text(json.dumps(polygon_to_dict(poly)))
    assert np.allclose(load_polygon(tmp_path / "p.json").vertices, poly.vertices)


def test_malformed_records(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ArgumentError):
        load_curve(bad)
    with pytest.raises(ArgumentError):
        curve_from_dict({"length": 1.0, "n": 20, "points": [[0, 0]] * 16})
