import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normdens import InputError
from normdens.convex import CenteredEllipsoid
from normdens.mixed_volume import (
    MixedVolumeConfig,
    closed_form_stack,
    expected_abs_gaussian_det,
    hull_volume,
    mixed_volume,
    mixed_volume_closed_form,
    mixed_volume_mc,
    mixed_volume_mc_stack,
    mixed_volume_oracle,
    mixed_volume_stack,
    sphere_directions,
)

from conftest import random_psd

# E|det G| for iid N(0,1) entries: plain numpy, 10^7 samples, seed 12345 (value, std error)
FROZEN_ABS_DET = {1: (0.7982299806659222, 1.9e-4), 2: (0.9998794472500458, 3.2e-4), 3: (1.5956056549472581, 5.9e-4)}


def E(Q):
    return CenteredEllipsoid(np.asarray(Q, dtype=float))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_expected_abs_det_matches_frozen_monte_carlo(m):
    value, se = FROZEN_ABS_DET[m]
    assert abs(expected_abs_gaussian_det(m) - value) < 4 * se


def test_mc_unit_balls():
    e2 = mixed_volume_mc([E(np.eye(2))] * 2, 200_000, 1)
    assert abs(e2.value - math.pi) < 3 * e2.std_error
    e3 = mixed_volume_mc([E(np.eye(3))] * 3, 200_000, 2)
    assert abs(e3.value - 4 * math.pi / 3) < 3 * e3.std_error
    assert e2.method == "gaussian_mc" and e2.samples == 200_000


def test_mc_orthogonal_segments():
    e = mixed_volume_mc([E(np.diag([1.0, 0.0])), E(np.diag([0.0, 1.0]))], 400_000, 3)
    assert e.value == pytest.approx(2.0, rel=0.01)


def test_oracle_examples():
    seg = mixed_volume_oracle([E([[1.0]])], 20)
    assert seg.value == pytest.approx(2.0) and seg.std_error == 0.0
    ball = mixed_volume_oracle([E(np.eye(2))] * 2, 720)
    assert ball.value == pytest.approx(math.pi, rel=0.005)
    rect = mixed_volume_oracle([E(np.diag([4.0, 0.0])), E(np.diag([0.0, 1.0]))], 720)
    assert rect.value == pytest.approx(4.0, rel=1e-9)


def test_oracle_in_three_dimensions():
    v = mixed_volume_oracle([E(np.eye(3))] * 3, 2000).value
    assert v == pytest.approx(4 * math.pi / 3, rel=0.01)
    v = mixed_volume_oracle([E(np.diag([1.0, 0, 0])), E(np.diag([0, 1.0, 0])), E(np.diag([0, 0, 1.0]))], 200).value
    # three orthogonal segments of length 2: the sum is the cube of volume 8, V = 8 / 3!
    assert v == pytest.approx(8 / 6, rel=1e-6)


def test_closed_form_matches_oracle(rng):
    for _ in range(20):
        bodies = [E(random_psd(rng, 2)), E(random_psd(rng, 2, 1))]
        exact = mixed_volume_closed_form(bodies).value
        # the oracle's polygons lose ~1e-4 on elongated bodies
        assert mixed_volume_oracle(bodies, 2000).value == pytest.approx(exact, rel=1e-3)


def test_closed_form_degenerate_cases():
    assert mixed_volume_closed_form([E(np.zeros((2, 2))), E(np.eye(2))]).value == 0.0
    # parallel segments span no area
    assert mixed_volume_closed_form([E(np.diag([1.0, 0])), E(np.diag([3.0, 0]))]).value == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InputError):
        closed_form_stack(np.zeros((1, 3, 3, 3)))


def test_hull_volume_degenerate_is_zero():
    assert hull_volume(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])) == 0.0
    assert hull_volume(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])) == pytest.approx(0.5)


def test_sphere_directions_are_unit():
    for m in (2, 3):
        U = sphere_directions(m, 100)
        np.testing.assert_allclose(np.linalg.norm(U, axis=1), 1.0)


def test_validation():
    with pytest.raises(InputError):
        mixed_volume_mc([E(np.eye(2))], 100, 0)  # one body in R^2
    with pytest.raises(InputError):
        mixed_volume_mc([E(np.eye(2)), E(np.eye(3))], 100, 0)
    with pytest.raises(InputError):
        mixed_volume_mc([E(np.eye(2))] * 2, 0, 0)
    with pytest.raises(InputError):
        MixedVolumeConfig("simplex")
    with pytest.raises(InputError):
        mixed_volume_oracle([E(np.eye(4))] * 4, 100)


def test_dispatch_and_auto():
    bodies = [E(np.eye(2))] * 2
    assert mixed_volume(bodies, MixedVolumeConfig("auto")).method == "closed_form"
    assert mixed_volume(bodies, MixedVolumeConfig("polarization_oracle")).method == "polarization_oracle"
    assert MixedVolumeConfig("auto").resolve(3) == "gaussian_mc"


def test_seeded_and_reproducible():
    bodies = [E(np.diag([2.0, 1.0])), E(np.eye(2))]
    a = mixed_volume_mc(bodies, 10_000, 42)
    b = mixed_volume_mc(bodies, 10_000, 42)
    c = mixed_volume_mc(bodies, 10_000, 43)
    assert a == b
    assert a.value != c.value


def test_stack_agrees_with_single_evaluations(rng):
    Qs = np.stack([np.stack([random_psd(rng, 2), random_psd(rng, 2)]) for _ in range(5)])
    exact = closed_form_stack(Qs)
    vals, ses = mixed_volume_mc_stack(Qs, 50_000, 9)
    assert np.all(np.abs(vals - exact) < 4 * ses + 1e-12)
    orc = mixed_volume_stack(Qs[:2], MixedVolumeConfig("polarization_oracle"))
    np.testing.assert_allclose(orc, exact[:2], rtol=1e-4)


def test_diagonal_case_is_ellipsoid_volume(rng):
    Q = random_psd(rng, 3)
    est = mixed_volume_mc([E(Q)] * 3, 200_000, 5)
    assert abs(est.value - 4 / 3 * math.pi * math.sqrt(np.linalg.det(Q))) < 3 * est.std_error


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.2, 5.0))
def test_oracle_symmetry_and_linearity(seed, lam):
    rng = np.random.default_rng(seed)
    Q1, Q2 = random_psd(rng, 2), random_psd(rng, 2)
    v = mixed_volume_oracle([E(Q1), E(Q2)], 360).value
    assert mixed_volume_oracle([E(Q2), E(Q1)], 360).value == pytest.approx(v, rel=1e-9, abs=1e-12)
    assert mixed_volume_oracle([E(lam**2 * Q1), E(Q2)], 360).value == pytest.approx(lam * v, rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_oracle_monotone(seed):
    rng = np.random.default_rng(seed)
    Q1, Q2, D = random_psd(rng, 2), random_psd(rng, 2), random_psd(rng, 2, 1)
    small = mixed_volume_oracle([E(Q1), E(Q2)], 360).value
    big = mixed_volume_oracle([E(Q1 + D), E(Q2)], 360).value
    assert big >= small - 1e-9 * big
