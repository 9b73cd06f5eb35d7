import json
import math

import numpy as np
import pytest

from normdens import InputError
from normdens.finsler import (
    ChartDomain,
    FunctionSpace,
    check_gradients,
    circle_space,
    clifford_space,
    decoupled_torus_spaces,
    finsler_ellipsoid,
    finsler_matrices,
    load_spaces,
    mixed_symplectic_volume,
    monomial,
    orthonormalize,
    poly_space,
    symplectic_volume,
    theta,
    trig_space,
)
from normdens.mixed_volume import MixedVolumeConfig

EXACT = MixedVolumeConfig("closed_form")


def constant_space(dim=1, c=2.0):
    dom = ChartDomain.torus(dim)
    return FunctionSpace(dom, [monomial([0] * dim, 1 / c)])


def test_theta_examples():
    V = circle_space()
    np.testing.assert_allclose(theta(V, [0.0]), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(theta(V, [math.pi / 2]), [0.0, 1.0], atol=1e-15)
    X = np.linspace(0, 2 * math.pi, 200)[:, None]
    np.testing.assert_allclose(np.linalg.norm(V.values(X), axis=1), 1.0)


def test_theta_reduces_periodically():
    V = circle_space()
    np.testing.assert_allclose(theta(V, [2 * math.pi + 0.3]), theta(V, [0.3]), atol=1e-14)


def test_finsler_ellipsoid_examples():
    V = circle_space()
    for x in (0.0, 1.0, 4.0):
        assert finsler_ellipsoid(V, [x]).Q[0, 0] == pytest.approx(1.0)
    lifted = decoupled_torus_spaces()[0]
    np.testing.assert_allclose(finsler_ellipsoid(lifted, [0.7, 2.0]).Q, np.diag([1.0, 0.0]), atol=1e-15)
    assert finsler_ellipsoid(constant_space(), [0.3]).Q[0, 0] == 0.0


def test_symplectic_volume_examples():
    assert symplectic_volume(circle_space(), 64) == pytest.approx(4 * math.pi, rel=1e-12)
    assert symplectic_volume(constant_space(), 64) == 0.0
    assert symplectic_volume(circle_space(3.0), 64) == pytest.approx(3 * 4 * math.pi, rel=1e-12)


def test_mixed_symplectic_volume_examples():
    V = circle_space()
    assert mixed_symplectic_volume([V], 64, EXACT) == pytest.approx(symplectic_volume(V, 64))
    assert mixed_symplectic_volume(decoupled_torus_spaces(), 32, EXACT) == pytest.approx(8 * math.pi**2, rel=1e-12)
    W = clifford_space()
    assert mixed_symplectic_volume([W, W], 32, EXACT) == pytest.approx(symplectic_volume(W, 32), rel=1e-10)


def test_mixed_symplectic_volume_with_mc_kernel():
    v = mixed_symplectic_volume(decoupled_torus_spaces(), 16, MixedVolumeConfig(trials=20_000, seed=2))
    assert v == pytest.approx(8 * math.pi**2, rel=0.01)


def test_translation_invariance_of_trig_spaces(rng):
    W = trig_space(ChartDomain.torus(2), [((1, 2), "cos"), ((1, 2), "sin"), ((0, 1), "cos"), ((0, 1), "sin")])
    X = rng.uniform(0, 2 * math.pi, (30, 2))
    Q = finsler_matrices(W, X)
    np.testing.assert_allclose(Q, np.broadcast_to(Q[0], Q.shape), atol=1e-12)
    s = rng.uniform(0, 2 * math.pi, 2)
    assert symplectic_volume(W.shifted(s), 32) == pytest.approx(symplectic_volume(W, 32), rel=1e-12)


def test_scaling_multiplies_by_lambda_to_the_n():
    W = clifford_space()
    assert symplectic_volume(W.scaled(1.3), 32) == pytest.approx(1.3**2 * symplectic_volume(W, 32), rel=1e-12)


def test_quadrature_convergence_on_box():
    dom = ChartDomain.box([[-1, 1], [0, 2]])
    V = orthonormalize(poly_space(dom, [[1, 0], [0, 1], [2, 1]]), 24)
    a, b = symplectic_volume(V, 24), symplectic_volume(V, 48)
    assert abs(a - b) < 1e-3 * abs(b)


def test_orthonormalize_gives_identity_gram():
    dom = ChartDomain.box([[-1, 1]])
    V = orthonormalize(poly_space(dom, [[0], [1], [2]]), 32)
    pts, w = dom.quadrature(32)
    F = V.values(pts)
    np.testing.assert_allclose(F.T @ (w[:, None] * F), np.eye(3), atol=1e-12)
    with pytest.raises(InputError):
        orthonormalize(poly_space(dom, [[1], [1]]), 32)


def test_gradients_match_finite_differences(rng):
    W = trig_space(ChartDomain.torus(2), [((2, 1), "cos"), ((1, -3), "sin")])
    assert check_gradients(W, rng.uniform(0, 6, (20, 2))) < 1e-6
    P = poly_space(ChartDomain.box([[-1, 1], [-1, 1]]), [[2, 1], [0, 3]])
    assert check_gradients(P, rng.uniform(-1, 1, (20, 2))) < 1e-6


def test_quadrature_rules():
    dom = ChartDomain.torus(1)
    pts, w = dom.quadrature(16)
    assert w.sum() == pytest.approx(2 * math.pi)
    assert np.sum(w * np.cos(pts[:, 0]) ** 2) == pytest.approx(math.pi)
    box = ChartDomain.box([[0, 2]])
    pts, w = box.quadrature(8)
    assert np.sum(w * pts[:, 0] ** 5) == pytest.approx(2**6 / 6)
    with pytest.raises(InputError):
        dom.quadrature(2)


def test_domain_validation():
    with pytest.raises(InputError):
        ChartDomain.box([[1, 0]])
    with pytest.raises(InputError):
        ChartDomain.box([[-1, 1]]).reduce(np.array([[2.0]]))
    with pytest.raises(InputError):
        mixed_symplectic_volume([circle_space(), circle_space()], 16)


def test_json_round_trip_of_domain():
    for dom in (ChartDomain.torus(2, [1.0, 3.0]), ChartDomain.box([[-1, 1], [0, 5]])):
        back = ChartDomain.from_json(json.loads(json.dumps(dom.to_json())))
        assert back.to_json() == dom.to_json()


def test_load_spaces_from_json(tmp_path):
    doc = {
        "domain": {"kind": "torus", "dim": 2, "periods": [2 * math.pi, 2 * math.pi]},
        "spaces": [
            {"type": "trig", "modes": [[[1, 0], "cos"], [[1, 0], "sin"]]},
            {"type": "trig", "modes": [[[0, 1], "cos"], [[0, 1], "sin"]]},
        ],
    }
    path = tmp_path / "spaces.json"
    path.write_text(json.dumps(doc))
    for src in (doc, json.dumps(doc), str(path)):
        dom, spaces = load_spaces(src)
        assert dom.dim == 2 and [s.d for s in spaces] == [2, 2]
        assert mixed_symplectic_volume(spaces, 16, EXACT) == pytest.approx(8 * math.pi**2)


@pytest.mark.parametrize(
    "doc",
    [
        {"spaces": []},
        {"domain": {"kind": "sphere", "dim": 2}, "spaces": []},
        {"domain": {"kind": "torus", "dim": 1}, "spaces": [{"type": "trig", "modes": []}]},
        {"domain": {"kind": "torus", "dim": 1}, "spaces": [{"type": "wavelet"}]},
        "not json and not a file",
    ],
)
def test_load_spaces_rejects_bad_documents(doc):
    with pytest.raises(InputError):
        load_spaces(doc)
