"""Grids, signed distances, zero-set extraction, and parabolic rescaling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcflab import (
    AxisymProfile,
    LevelSetField,
    ParabolicBall,
    ParametricCurve,
    SpaceTimePoint,
    SphereFlow,
    dumbbell_profile,
    extract_curves,
    extract_surface,
    make_grid,
    parabolic_rescale,
    reinitialize,
    signed_distance,
)
from oracles import inside_revolved

ORIGIN2 = SpaceTimePoint(np.zeros(2), 0.0)
ORIGIN3 = SpaceTimePoint(np.zeros(3), 0.0)


def unit_circle(n=512):
    a = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return ParametricCurve(np.stack([np.cos(a), np.sin(a)], axis=1))


# ---------------------------------------------------------------------------
# grids and signed distances


def test_make_grid_is_symmetric_about_the_center():
    origin, shape = make_grid((0.3, -0.2), 1.0, 1.0 / 32)
    assert shape == (65, 65)
    top = origin + (np.array(shape) - 1) / 32.0
    assert np.allclose((origin + top) / 2.0, [0.3, -0.2], atol=1e-14)


def test_circle_distance_hits_known_values():
    h = 1.0 / 64
    origin, shape = make_grid((0.0, 0.0), 2.0, h)
    field = signed_distance(unit_circle(2048), origin, h, shape)
    center = field.interp(np.array([[0.0, 0.0]]))[0]
    corner_edge = field.interp(np.array([[2.0 - h, 0.0]]))[0]
    assert abs(center - (-1.0)) < h
    assert abs(corner_edge - (1.0 - h)) < h


def test_polygon_and_analytic_circle_distances_agree():
    h = 1.0 / 64
    origin, shape = make_grid((0.0, 0.0), 1.5, h)
    poly = signed_distance(unit_circle(4096), origin, h, shape)
    exact = signed_distance(SphereFlow(1.0, 2), origin, h, shape)
    band = exact.zero_band_mask(4 * h)
    gap = np.abs(poly.values - exact.values)[band].max()
    assert gap < 2e-4  # secant sag of the 4096-gon


def test_revolved_distance_sign_matches_membership_oracle():
    prof = dumbbell_profile(0.35, 1.0, 2.4)
    h = 1.0 / 24
    origin, shape = make_grid((0.0, 0.0, 0.0), 2.6, h)
    field = signed_distance(prof, origin, h, shape)
    rng = np.random.Generator(np.random.PCG64(7))
    pts = rng.uniform(-2.5, 2.5, size=(10000, 3))
    vals = field.interp(pts)
    clear = np.abs(vals) > h  # skip the band where interpolation blurs signs
    inside = inside_revolved(prof, pts)
    assert np.array_equal(vals[clear] < 0.0, inside[clear])


def test_zero_contour_round_trip_stays_within_two_cells():
    h = 1.0 / 64
    origin, shape = make_grid((0.0, 0.0), 1.5, h)
    field = signed_distance(SphereFlow(1.0, 2), origin, h, shape)
    curves = extract_curves(field)
    assert len(curves) == 1
    radii = np.hypot(*curves[0].points.T)
    assert np.abs(radii - 1.0).max() < 2 * h


def test_zero_surface_round_trip_stays_within_two_cells():
    h = 1.0 / 16
    origin, shape = make_grid((0.0, 0.0, 0.0), 1.4, h)
    field = signed_distance(SphereFlow(1.0, 3), origin, h, shape)
    verts, faces = extract_surface(field)
    assert faces.shape[1] == 3
    radii = np.linalg.norm(verts, axis=1)
    assert np.abs(radii - 1.0).max() < 2 * h


def test_rasterizing_a_curve_needs_a_planar_grid():
    origin, shape = make_grid((0.0, 0.0, 0.0), 1.0, 1.0 / 8)
    with pytest.raises(ValueError, match="2-D grid"):
        signed_distance(unit_circle(64), origin, 1.0 / 8, shape)


# ---------------------------------------------------------------------------
# reinitialization


def test_reinitialize_restores_unit_gradient_without_moving_the_zero_set():
    h = 1.0 / 64
    origin, shape = make_grid((0.0, 0.0), 1.5, h)
    axes = [origin[k] + h * np.arange(shape[k]) for k in range(2)]
    X, Y = np.meshgrid(*axes, indexing="ij")
    # same zero set as the unit circle but with gradient |x| instead of 1
    warped = LevelSetField(origin, h, (X * X + Y * Y - 1.0) / 2.0)
    out = reinitialize(warped, iters=60)
    band = out.zero_band_mask(3 * h)
    gn = out.grad_norm()[band]
    assert 0.5 < gn.min() and gn.max() < 2.0
    assert not np.any(np.sign(out.values) * np.sign(warped.values) < 0)
    radii = np.hypot(*extract_curves(out)[0].points.T)
    assert np.abs(radii - 1.0).max() < h


# ---------------------------------------------------------------------------
# parabolic rescaling


def test_rescaling_by_one_about_the_base_point_is_the_identity():
    curve = unit_circle(128)
    out = parabolic_rescale(curve, 1.0, ORIGIN2)
    assert np.allclose(out.points, curve.points, atol=1e-15)


def test_rescaling_about_extinction_matches_the_double_radius_flow():
    flow = SphereFlow(1.0, 2)
    about = SpaceTimePoint(np.zeros(2), flow.extinction_time)
    zoomed = parabolic_rescale(flow, 2.0, about)
    reference = SphereFlow(2.0, 2)
    # both are extinct at their respective final times; align those
    shift = reference.extinction_time - zoomed.extinction_time
    for t in (-2.0, -1.0, -0.25):
        assert abs(zoomed.radius(t) - reference.radius(t + shift)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(lam1=st.floats(0.25, 4.0), lam2=st.floats(0.25, 4.0))
def test_successive_rescalings_compose_to_their_product(lam1, lam2):
    curve = unit_circle(64)
    about = SpaceTimePoint(np.array([0.4, -0.1]), 0.3)
    once = parabolic_rescale(parabolic_rescale(curve, lam1, about),
                             lam2, ORIGIN2)
    direct = parabolic_rescale(curve, lam1 * lam2, about)
    assert np.allclose(once.points, direct.points, rtol=0, atol=1e-12)


def test_rescaled_field_scales_values_and_zero_level_together():
    h = 1.0 / 32
    origin, shape = make_grid((0.0, 0.0), 1.5, h)
    field = signed_distance(SphereFlow(1.0, 2), origin, h, shape)
    out = parabolic_rescale(field, 3.0, ORIGIN2)
    assert out.spacing == pytest.approx(3.0 * h)
    assert np.allclose(out.values, 3.0 * field.values)
    radii = np.hypot(*extract_curves(out)[0].points.T)
    assert np.abs(radii - 3.0).max() < 2 * out.spacing


def test_rescaled_field_can_be_resampled_onto_a_fresh_grid():
    h = 1.0 / 48
    origin, shape = make_grid((0.0, 0.0), 1.4, h)
    field = signed_distance(SphereFlow(1.0, 2), origin, h, shape)
    target = make_grid((0.0, 0.0), 1.2, h)
    out = parabolic_rescale(field, 0.5, ORIGIN2,
                            resample_to=(target[0], h, target[1]))
    assert out.shape == target[1]
    radii = np.hypot(*extract_curves(out)[0].points.T)
    assert np.abs(radii - 0.5).max() < 2 * h


def test_rescaling_rejects_nonpositive_factors():
    with pytest.raises(ValueError, match="positive"):
        parabolic_rescale(unit_circle(32), 0.0, ORIGIN2)


def test_history_rescaling_moves_times_events_and_geometry_together():
    flow = SphereFlow(1.0, 2)
    hist = flow.history([0.0, 0.25])
    about = SpaceTimePoint(np.zeros(2), 0.5)
    out = parabolic_rescale(hist, 2.0, about)
    assert np.allclose(out.times, [-2.0, -1.0])
    assert abs(out.exact.radius(-2.0) - 2.0) < 1e-12


# ---------------------------------------------------------------------------
# spacetime primitives


def test_parabolic_ball_is_half_open_backward_in_time():
    ball = ParabolicBall(SpaceTimePoint(np.zeros(2), 1.0), 0.5)
    pts = np.zeros((4, 2))
    times = np.array([1.0, 1.0 - 0.25, 1.0 + 1e-9, 1.0 - 0.25 + 1e-9])
    got = ball.contains(pts, times)
    assert got.tolist() == [True, False, False, True]


def test_parabolic_ball_spatial_boundary_is_closed():
    ball = ParabolicBall(SpaceTimePoint(np.zeros(2), 0.0), 0.5)
    pts = np.array([[0.5, 0.0], [0.5 + 1e-9, 0.0]])
    got = ball.contains(pts, np.array([0.0, 0.0]))
    assert got.tolist() == [True, False]


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(0.1, 10.0))
def test_rescaled_ball_keeps_its_membership(lam):
    center = SpaceTimePoint(np.array([1.0, -0.5]), 2.0)
    ball = ParabolicBall(center, 0.7)
    about = SpaceTimePoint(np.array([0.2, 0.1]), 1.5)
    pt = np.array([1.3, -0.4])
    t = 1.8
    image = ball.rescaled(lam, about)
    pt_im = lam * (pt - about.x)
    t_im = lam * lam * (t - about.t)
    assert ball.contains(pt, t)[0] == image.contains(pt_im, t_im)[0]


# ---------------------------------------------------------------------------
# boundary representation types


def test_circle_polygon_measures_its_own_geometry():
    c = unit_circle(2048)
    assert c.enclosed_area() == pytest.approx(np.pi, rel=1e-5)
    assert c.length() == pytest.approx(2.0 * np.pi, rel=1e-5)
    assert c.spacing_ratio() == pytest.approx(1.0, abs=1e-9)
    assert c.is_simple()


def test_figure_eight_is_not_simple():
    a = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
    pts = np.stack([np.sin(2 * a), np.sin(a)], axis=1)
    assert not ParametricCurve(pts).is_simple()


def test_resampling_equalizes_spacing_and_keeps_the_length():
    a = np.linspace(0.0, 2.0 * np.pi, 400, endpoint=False)
    warp = a + 0.3 * np.sin(a)
    c = ParametricCurve(np.stack([np.cos(warp), np.sin(warp)], axis=1))
    assert c.spacing_ratio() > 1.5
    out = c.resample(512)
    assert out.n == 512
    assert out.spacing_ratio() < 1.01
    assert out.length() == pytest.approx(c.length(), rel=1e-3)


def test_profile_rejects_malformed_inputs():
    x = np.linspace(-1.0, 1.0, 9)
    r = np.full(9, 0.5)
    with pytest.raises(ValueError, match="r = 0 at both ends"):
        AxisymProfile(x, r, 3, "capped")
    with pytest.raises(ValueError, match="ambient dimension"):
        AxisymProfile(x, r, 2, "periodic")
    with pytest.raises(ValueError, match="strictly increasing"):
        AxisymProfile(x[::-1], r, 3, "periodic")
    bad = r.copy()
    bad[3] = -0.1
    with pytest.raises(ValueError, match="positive"):
        AxisymProfile(x, bad, 3, "periodic")
    with pytest.raises(ValueError, match="at least 5"):
        AxisymProfile(x[:4], r[:4], 3, "periodic")
