import math

import numpy as np
import pytest

from normdens import InputError
from normdens.crofton import (
    HyperplaneSample,
    arclength,
    circle,
    curve_from_json,
    euclid_crofton_length,
    great_circle,
    hyperplane_constant,
    product_crofton_check,
    product_density_integral,
    rotation_matrix,
    sample_hyperplane,
    sample_hyperplanes,
    segment,
    small_circle,
    spherical_ellipse,
    sphere_crofton_length,
    trig_curve,
)

# E|<u, e>| for u uniform on S^{d-1}: plain numpy, 10^7 samples, seed 12345 (value, std error)
FROZEN_CD = {1: (1.0, 0.0), 2: (0.6366271731885796, 9.7e-5), 3: (0.5000665976067153, 9.1e-5)}


@pytest.mark.parametrize("d", [1, 2, 3])
def test_hyperplane_constant_matches_frozen_monte_carlo(d):
    value, se = FROZEN_CD[d]
    assert abs(hyperplane_constant(d) - value) <= 4 * se + 1e-15


def test_hyperplane_constant_closed_values():
    assert hyperplane_constant(1) == pytest.approx(1.0)
    assert hyperplane_constant(2) == pytest.approx(2 / math.pi)
    assert hyperplane_constant(3) == pytest.approx(0.5)


def test_points_hitting_unit_interval():
    # d = 1: hyperplanes are points, and the weighted measure of those in [0, 1] is exactly 1
    rng = np.random.default_rng(0)
    u, a, w = sample_hyperplanes(1, 1.0, rng, 200_000)
    hits = (a * u[:, 0] >= 0) & (a * u[:, 0] <= 1)
    assert np.all(np.abs(u) == 1.0)
    assert w * hits.mean() == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("d", [2, 3])
def test_weighted_fraction_meeting_unit_segment_is_one(d):
    rng = np.random.default_rng(d)
    u, a, w = sample_hyperplanes(d, 1.0, rng, 100_000)
    # the hyperplane <u, x> = a meets [0, e1] iff a lies between 0 and u_1
    hits = (np.minimum(0, u[:, 0]) <= a) & (a <= np.maximum(0, u[:, 0]))
    est = w * hits.mean()
    se = w * hits.std() / math.sqrt(len(a))
    assert abs(est - 1.0) < 3 * se


def test_hyperplane_sample_validation():
    s = sample_hyperplane(3, 2.0, np.random.default_rng(1))
    assert abs(np.linalg.norm(s.u) - 1) < 1e-12 and -2 <= s.a <= 2 and s.weight > 0
    with pytest.raises(InputError):
        HyperplaneSample(np.array([1.0, 1.0]), 0.0, 1.0)
    with pytest.raises(InputError):
        sample_hyperplanes(2, -1.0, np.random.default_rng(0), 3)


def test_arclength_quadrature():
    assert arclength(circle(2.0)) == pytest.approx(4 * math.pi, rel=1e-12)
    assert arclength(segment([0, 0, 0], [1, 2, 2])) == pytest.approx(3.0, rel=1e-12)
    assert arclength(small_circle(math.pi / 6)) == pytest.approx(math.pi, rel=1e-12)
    ellipse = trig_curve([0, 0], cos=[[2, 0]], sin=[[0, 1]])
    assert arclength(ellipse) == pytest.approx(9.688448220547675, rel=1e-10)


def test_euclid_examples():
    s = euclid_crofton_length(segment([0, 0], [1, 0]), 20_000, 2.0, 1)
    assert abs(s.value - 1.0) < 3 * s.std_error
    c = euclid_crofton_length(circle(1.0), 20_000, 1.5, 2)
    assert abs(c.value - 2 * math.pi) < 3 * c.std_error
    c3 = euclid_crofton_length(circle(1.0, space="R3"), 20_000, 1.5, 3)
    assert abs(c3.value - 2 * math.pi) < 3 * c3.std_error


def test_euclid_requires_enclosing_range():
    with pytest.raises(InputError):
        euclid_crofton_length(circle(1.0), 1000, 0.9, 0)
    with pytest.raises(InputError):
        euclid_crofton_length(great_circle(), 1000, 2.0, 0)


def test_sphere_examples():
    g = sphere_crofton_length(great_circle(), 5000, 4)
    assert g.value == pytest.approx(2 * math.pi, abs=1e-12) and g.std_error == 0.0
    sc = sphere_crofton_length(small_circle(math.pi / 6), 20_000, 5)
    assert abs(sc.value - math.pi) < 3 * sc.std_error


def test_spherical_ellipse_against_quadrature():
    curve = spherical_ellipse(1.0, 0.5, 1.0)
    est = sphere_crofton_length(curve, 20_000, 6)
    assert abs(est.value - arclength(curve)) < 3 * est.std_error


def test_rotated_curves_keep_their_length():
    R = rotation_matrix([0.3, -1.0, 2.0], 1.1)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)
    curve = small_circle(0.8)
    a = sphere_crofton_length(curve, 10_000, 7)
    b = sphere_crofton_length(curve.rotated(R), 10_000, 8)
    assert abs(a.value - b.value) < 3 * math.hypot(a.std_error, b.std_error)
    assert rotation_matrix([0, 0], math.pi / 2) @ np.array([1.0, 0.0]) == pytest.approx([0.0, 1.0])


def test_product_examples():
    gg = product_crofton_check(great_circle(), great_circle((0, 1, 0)), 2000, 9, grid=64)
    assert gg.mc_estimate == pytest.approx(4.0) and gg.density_integral == pytest.approx(4.0, rel=1e-9)
    gs = product_crofton_check(great_circle(), small_circle(math.pi / 6), 10_000, 10, grid=64)
    assert gs.density_integral == pytest.approx(2.0, rel=1e-9)
    assert gs.agrees()


def test_product_with_point_factor_is_zero():
    point = small_circle(0.0)
    r = product_crofton_check(great_circle(), point, 1000, 11, grid=32)
    assert r.density_integral == 0.0
    assert r.mc_estimate == 0.0


def test_product_density_uses_mc_kernel_too():
    from normdens.mixed_volume import MixedVolumeConfig

    v = product_density_integral(great_circle(), small_circle(1.0), 32, MixedVolumeConfig(trials=5000, seed=1))
    assert v == pytest.approx(2 * math.sin(1.0) * 2, rel=0.01)


def test_curves_from_json():
    assert curve_from_json({"space": "R2", "type": "segment", "start": [0, 0], "end": [3, 4]}).max_norm() == pytest.approx(5)
    assert arclength(curve_from_json({"space": "R3", "type": "circle", "radius": 2, "normal": [1, 1, 0]})) == pytest.approx(4 * math.pi)
    sc = curve_from_json({"space": "S2", "type": "small_circle", "colatitude": 0.5})
    assert arclength(sc) == pytest.approx(2 * math.pi * math.sin(0.5))
    c1, c2 = curve_from_json({"space": "S2xS2", "factors": [{"type": "circle"}, {"type": "small_circle", "colatitude": 1.0}]})
    assert c1.space == c2.space == "S2"
    p = curve_from_json({"space": "R2", "type": "param", "const": [0, 0], "cos": [[1, 0]], "sin": [[0, 1]]})
    assert arclength(p) == pytest.approx(2 * math.pi)


@pytest.mark.parametrize(
    "doc",
    [
        {"space": "H2", "type": "circle"},
        {"space": "R2", "type": "spiral"},
        {"space": "R2", "type": "small_circle"},
        {"space": "S2xS2", "factors": [{"type": "circle"}]},
        {"space": "R3", "type": "segment", "start": [0, 0], "end": [1, 0]},
    ],
)
def test_bad_curve_json(doc):
    with pytest.raises(InputError):
        curve_from_json(doc)


def test_std_error_scales_like_inverse_sqrt():
    ses = [euclid_crofton_length(circle(1.0), n, 1.5, 20 + i).std_error for i, n in enumerate((1000, 10_000))]
    ratio = ses[0] / ses[1] / math.sqrt(10)
    assert 1 / 1.5 < ratio < 1.5
