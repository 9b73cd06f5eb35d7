import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normdens import InputError
from normdens.convex import CenteredEllipsoid, Frame
from normdens.density import (
    d1,
    d_m,
    d_m_stack,
    embedded_factor_ball,
    flatten_components,
    product_d1,
    vol1_factor,
)
from normdens.mixed_volume import MixedVolumeConfig

from conftest import random_psd

EXACT = MixedVolumeConfig("closed_form")


def E(Q):
    return CenteredEllipsoid(np.asarray(Q, dtype=float))


def test_d1_examples():
    assert d1(E(np.eye(2)), [1, 0]).value == 2.0
    assert d1(E([[1.0]]), [1.0]).value == 2.0
    assert d1(E(np.diag([3.0, 2.0])), [0, 0]).value == 0.0


def test_d_m_examples():
    e1 = d_m([E(np.eye(2))], Frame([[1, 0]]), EXACT)
    assert e1.value == pytest.approx(2.0) and e1.order == 1
    segs = [E(np.diag([1.0, 0.0])), E(np.diag([0.0, 1.0]))]
    assert d_m(segs, Frame.standard(2), EXACT).value == pytest.approx(2.0)
    assert d_m([E(np.eye(2))] * 2, Frame.standard(2), EXACT).value == pytest.approx(math.pi)


def test_product_d1_examples():
    segs = [E(np.diag([1.0, 0.0])), E(np.diag([0.0, 1.0]))]
    assert product_d1(segs, Frame.standard(2), EXACT).value == pytest.approx(4.0)
    assert product_d1([E(np.eye(2))] * 2, Frame.standard(2), EXACT).value == pytest.approx(2 * math.pi)
    p3 = product_d1([E(np.eye(3))] * 3, Frame.standard(3), MixedVolumeConfig(trials=400_000, seed=4))
    assert abs(p3.value - 8 * math.pi) < 3 * p3.std_error


def test_vol1_factor_examples():
    xi = [(3, 4), (0, 0)]
    assert vol1_factor(0, xi).value == 5.0
    assert vol1_factor(1, xi).value == 0.0
    with pytest.raises(InputError):
        vol1_factor(2, xi)
    with pytest.raises(InputError):
        vol1_factor(-1, xi)


def test_vol1_factor_is_half_d1_of_embedded_ball(rng):
    dims = [2, 3, 1]
    for _ in range(20):
        comps = [rng.standard_normal(d) for d in dims]
        flat = flatten_components(comps)
        for i in range(len(dims)):
            B = embedded_factor_ball(dims, i)
            assert 2 * vol1_factor(i, comps).value == pytest.approx(d1(B, flat).value, rel=1e-12)


def test_degenerate_frames_give_exact_zero():
    bodies = [E(np.eye(3))] * 2
    v = np.array([1.0, 2.0, -1.0])
    for cfg in (EXACT, MixedVolumeConfig(trials=1000)):
        assert d_m(bodies, Frame([v, -3 * v]), cfg).value == 0.0
        assert d_m(bodies, Frame([v, [0, 0, 0]]), cfg).value == 0.0


def test_shape_errors():
    with pytest.raises(InputError):
        d_m([E(np.eye(2))], Frame.standard(2))
    with pytest.raises(InputError):
        d_m([E(np.eye(3))] * 2, Frame.standard(2))
    with pytest.raises(InputError):
        d1(E(np.eye(2)), [1, 0, 0])
    with pytest.raises(InputError):
        d_m_stack(np.zeros((4, 2, 3, 3)), None)


def test_direct_summand_multiplicativity(rng):
    for _ in range(20):
        Q1, Q2 = random_psd(rng, 2), random_psd(rng, 3)
        A1 = np.zeros((5, 5))
        A1[:2, :2] = Q1
        A2 = np.zeros((5, 5))
        A2[2:, 2:] = Q2
        x1 = np.r_[rng.standard_normal(2), np.zeros(3)]
        x2 = np.r_[np.zeros(2), rng.standard_normal(3)]
        got = product_d1([E(A1), E(A2)], Frame([x1, x2]), EXACT).value
        want = d1(E(A1), x1).value * d1(E(A2), x2).value
        assert got == pytest.approx(want, rel=1e-10)


def test_stack_matches_pointwise(rng):
    P = 6
    Qs = np.stack([np.stack([random_psd(rng, 4), random_psd(rng, 4, 2)]) for _ in range(P)])
    frames = rng.standard_normal((P, 2, 4))
    frames[0, 1] = 2 * frames[0, 0]
    out = d_m_stack(Qs, frames, EXACT)
    assert out[0] == 0.0
    for p in range(1, P):
        ref = d_m([E(q) for q in Qs[p]], Frame(frames[p]), EXACT).value
        assert out[p] == pytest.approx(ref, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-4, 4, allow_nan=False).filter(lambda t: abs(t) > 1e-3))
def test_frame_homogeneity_and_symmetry(seed, t):
    rng = np.random.default_rng(seed)
    bodies = [E(random_psd(rng, 3)), E(random_psd(rng, 3))]
    F = rng.standard_normal((2, 3))
    base = d_m(bodies, Frame(F), EXACT).value
    G = F.copy()
    G[1] *= t
    assert d_m(bodies, Frame(G), EXACT).value == pytest.approx(abs(t) * base, rel=1e-9)
    assert d_m(bodies[::-1], Frame(F), EXACT).value == pytest.approx(base, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(-3, 3))
def test_unimodular_change_of_frame(seed, k):
    rng = np.random.default_rng(seed)
    bodies = [E(random_psd(rng, 3)), E(random_psd(rng, 3))]
    F = rng.standard_normal((2, 3))
    U = np.array([[1.0, float(k)], [0.0, 1.0]]) @ np.array([[0.0, 1.0], [-1.0, 0.0]])
    a = d_m(bodies, Frame(F), EXACT).value
    b = d_m(bodies, Frame(U @ F), EXACT).value
    assert b == pytest.approx(a, rel=1e-8)
