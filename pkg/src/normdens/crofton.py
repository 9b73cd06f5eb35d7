"""Crofton-type Monte Carlo estimators: random hyperplanes in R^d, random great circles on S^2.

Hyperplanes ``{x : <u, x> = a}`` are drawn with ``u`` uniform on the sphere and
``a`` uniform on ``[-R, R]``; each draw carries the weight ``2R / c_d`` with
``c_d = E|<u, e>| = Gamma(d/2) / (sqrt(pi) Gamma((d+1)/2))``, which turns
the sampling law into the motion-invariant measure normalised so that the
hyperplanes meeting a unit segment have total mass 1.  With this measure the
mean weighted intersection count of a curve is its length.

On the sphere, poles are drawn from the probability measure on S^2 and the
length estimate is ``pi * E[#(curve & great circle)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._common import Estimate, InputError, count_mc, uniform_sphere
from .density import d_m_stack, embedded_factor_ball
from .finsler import ChartDomain, integrate
from .mixed_volume import MixedVolumeConfig
from .roots import SING_TOL, AffineEquation, solve_family

CROFTON_RESOLUTION = 2048
SPACES = ("R2", "R3", "S2")


def hyperplane_constant(d: int) -> float:
    """``c_d``, the mean of ``|<u, e>|`` for ``u`` uniform on S^{d-1}."""
    if d < 1:
        raise InputError("dimension must be >= 1")
    return math.exp(math.lgamma(d / 2) - math.lgamma((d + 1) / 2)) / math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class HyperplaneSample:
    u: np.ndarray
    a: float
    weight: float

    def __post_init__(self):
        if abs(np.linalg.norm(self.u) - 1.0) > 1e-12:
            raise InputError("hyperplane normal must be a unit vector")
        if self.weight <= 0:
            raise InputError("weight must be positive")


def hyperplane_weight(d: int, R: float) -> float:
    return 2.0 * R / hyperplane_constant(d)


def sample_hyperplanes(d: int, R: float, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray, float]:
    """``size`` hyperplanes as ``(normals (size, d), offsets (size,), weight)``."""
    if d < 1 or R <= 0:
        raise InputError("need d >= 1 and R > 0")
    u = uniform_sphere(rng, size, d)
    a = rng.uniform(-R, R, size)
    return u, a, hyperplane_weight(d, R)


def sample_hyperplane(d: int, R: float, rng: np.random.Generator) -> HyperplaneSample:
    u, a, w = sample_hyperplanes(d, R, rng, 1)
    return HyperplaneSample(u[0], float(a[0]), w)


# --- curves ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurveModel:
    """Parameterised curve ``t in [0, 1] -> point``; ``closed`` curves are 1-periodic."""

    point: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    space: str
    closed: bool
    label: str = "curve"

    def __post_init__(self):
        if self.space not in SPACES:
            raise InputError(f"curve space must be one of {SPACES}, got {self.space!r}")

    @property
    def ambient_dim(self) -> int:
        return 2 if self.space == "R2" else 3

    @property
    def domain(self) -> ChartDomain:
        return ChartDomain.torus(1, [1.0]) if self.closed else ChartDomain.box([[0.0, 1.0]])

    def phi(self, T: np.ndarray) -> np.ndarray:
        return self.point(np.asarray(T)[:, 0])

    def dphi(self, T: np.ndarray) -> np.ndarray:
        return self.derivative(np.asarray(T)[:, 0])[:, :, None]

    def rotated(self, rot: np.ndarray) -> "CurveModel":
        rot = np.asarray(rot, dtype=float)
        return CurveModel(
            lambda t: self.point(t) @ rot.T,
            lambda t: self.derivative(t) @ rot.T,
            self.space,
            self.closed,
            self.label + "(rotated)",
        )

    def max_norm(self, samples: int = 4097) -> float:
        t = np.linspace(0.0, 1.0, samples)
        return float(np.linalg.norm(self.point(t), axis=1).max())


def segment(start, end) -> CurveModel:
    p0 = np.asarray(start, dtype=float)
    p1 = np.asarray(end, dtype=float)
    if p0.shape != p1.shape or p0.shape[0] not in (2, 3):
        raise InputError("segment endpoints must both lie in R^2 or R^3")
    v = p1 - p0
    return CurveModel(
        lambda t: p0 + np.multiply.outer(t, v),
        lambda t: np.broadcast_to(v, (len(t), len(v))).copy(),
        "R2" if len(v) == 2 else "R3",
        False,
        "segment",
    )


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = normal / np.linalg.norm(normal)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def circle(radius: float = 1.0, center=None, space: str = "R2", normal=None) -> CurveModel:
    """Circle of the given radius; in R^3 it lies in the plane orthogonal to ``normal``."""
    if radius < 0:
        raise InputError("radius must be nonnegative")
    if space == "R2":
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    elif space == "R3":
        e1, e2 = _plane_basis(np.asarray(normal if normal is not None else (0.0, 0.0, 1.0), dtype=float))
    else:
        raise InputError("circle lives in R2 or R3")
    c = np.zeros(len(e1)) if center is None else np.asarray(center, dtype=float)
    w = 2 * np.pi

    def point(t):
        return c + radius * (np.multiply.outer(np.cos(w * t), e1) + np.multiply.outer(np.sin(w * t), e2))

    def derivative(t):
        return radius * w * (np.multiply.outer(-np.sin(w * t), e1) + np.multiply.outer(np.cos(w * t), e2))

    return CurveModel(point, derivative, space, True, "circle")


def small_circle(colatitude: float, axis=(0.0, 0.0, 1.0)) -> CurveModel:
    """Circle on S^2 at angular distance ``colatitude`` from ``axis``; length ``2 pi sin(colatitude)``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    e1, e2 = _plane_basis(axis)
    s, c = math.sin(colatitude), math.cos(colatitude)
    w = 2 * np.pi

    def point(t):
        return c * axis + s * (np.multiply.outer(np.cos(w * t), e1) + np.multiply.outer(np.sin(w * t), e2))

    def derivative(t):
        return s * w * (np.multiply.outer(-np.sin(w * t), e1) + np.multiply.outer(np.cos(w * t), e2))

    return CurveModel(point, derivative, "S2", True, f"small_circle({colatitude:g})")


def great_circle(axis=(0.0, 0.0, 1.0)) -> CurveModel:
    return small_circle(math.pi / 2, axis)


def trig_curve(const, cos=(), sin=(), space: str = "R2") -> CurveModel:
    """``x(t) = const + sum_k cos[k] cos(2 pi (k+1) t) + sin[k] sin(2 pi (k+1) t)``.

    On ``S2`` the curve is pushed radially onto the sphere.
    """
    const = np.asarray(const, dtype=float)
    D = const.shape[0]
    C = np.asarray(cos, dtype=float).reshape(-1, D)
    S = np.asarray(sin, dtype=float).reshape(-1, D)
    K = max(len(C), len(S))
    C = np.vstack([C, np.zeros((K - len(C), D))])
    S = np.vstack([S, np.zeros((K - len(S), D))])
    freq = 2 * np.pi * np.arange(1, K + 1)

    def raw(t):
        arg = np.multiply.outer(t, freq)
        return const + np.cos(arg) @ C + np.sin(arg) @ S

    def draw(t):
        arg = np.multiply.outer(t, freq)
        return (-np.sin(arg) * freq) @ C + (np.cos(arg) * freq) @ S

    if space != "S2":
        return CurveModel(raw, draw, space, True, "param")

    def point(t):
        p = raw(t)
        return p / np.linalg.norm(p, axis=1, keepdims=True)

    def derivative(t):
        p, dp = raw(t), draw(t)
        r = np.linalg.norm(p, axis=1, keepdims=True)
        radial = np.sum(p * dp, axis=1, keepdims=True) / r**2
        return (dp - radial * p) / r

    return CurveModel(point, derivative, "S2", True, "param")


def spherical_ellipse(a: float = 1.0, b: float = 0.5, height: float = 1.0) -> CurveModel:
    """Radial projection of the ellipse ``(a cos, b sin, height)`` onto S^2."""
    return trig_curve([0.0, 0.0, height], cos=[[a, 0.0, 0.0]], sin=[[0.0, b, 0.0]], space="S2")


def arclength(curve: CurveModel, nodes: int = 4096) -> float:
    """Length by quadrature of ``|curve'(t)|`` (trapezoid if closed, Gauss-Legendre if open)."""
    t, w = curve.domain.quadrature([nodes])
    speed = np.linalg.norm(curve.derivative(t[:, 0]), axis=1)
    return integrate(speed, w)


# --- estimators --------------------------------------------------------------


def _count_intersections(curve: CurveModel, normals: np.ndarray, offsets: np.ndarray, resolution: int):
    eq = AffineEquation(curve.phi, curve.dphi, normals, offsets)
    out = solve_family(curve.domain, [eq], [resolution])
    return out.counts.astype(float), out.transversal(SING_TOL)


def euclid_crofton_length(
    curve: CurveModel, trials: int, R: float, seed: int, resolution: int = CROFTON_RESOLUTION
) -> Estimate:
    """Weighted mean number of intersections with random hyperplanes; estimates arclength."""
    if curve.space not in ("R2", "R3"):
        raise InputError("Euclidean Crofton needs a curve in R2 or R3")
    if trials < 1:
        raise InputError("trials must be >= 1")
    if R <= 0 or R < curve.max_norm():
        raise InputError(f"R = {R} does not enclose the curve (max |c(t)| = {curve.max_norm():.6g})")
    d = curve.ambient_dim
    weight = hyperplane_weight(d, R)

    def draw(rng, size):
        u, a, _ = sample_hyperplanes(d, R, rng, size)
        return u, a

    est = count_mc(seed, trials, draw, lambda b: _count_intersections(curve, b[0], b[1], resolution))
    return Estimate(weight * est.value, weight * est.std_error, est.samples, est.redraws)


def sphere_crofton_length(curve: CurveModel, trials: int, seed: int, resolution: int = CROFTON_RESOLUTION) -> Estimate:
    """``pi`` times the mean number of intersections with uniformly random great circles."""
    if curve.space != "S2":
        raise InputError("spherical Crofton needs a curve on S2")
    if trials < 1:
        raise InputError("trials must be >= 1")

    def draw(rng, size):
        return uniform_sphere(rng, size, 3)

    est = count_mc(
        seed, trials, draw, lambda g: _count_intersections(curve, g, np.zeros(len(g)), resolution)
    )
    return Estimate(math.pi * est.value, math.pi * est.std_error, est.samples, est.redraws)


@dataclass(frozen=True)
class ProductCroftonReport:
    mc_estimate: float
    mc_std_error: float
    density_integral: float
    trials: int
    redraws: int

    @property
    def relative_gap(self) -> float:
        ref = max(abs(self.density_integral), 1e-300)
        return abs(self.mc_estimate - self.density_integral) / ref

    def agrees(self, n_se: float = 3.0, rel: float = 0.01) -> bool:
        tol = n_se * self.mc_std_error + rel * abs(self.density_integral)
        return abs(self.mc_estimate - self.density_integral) <= tol + 1e-12


def product_density_integral(
    c1: CurveModel, c2: CurveModel, grid: int = 128, config: MixedVolumeConfig | None = None
) -> float:
    """``(1/pi^2) * int_M vol_{1,1} . vol_{1,2}`` over ``M = C1 x C2`` on S^2 x S^2.

    The product of the two factor 1-densities is evaluated through the ring
    product: ``vol_{1,i} = d_1(B_i) / 2`` with ``B_i`` the unit ball of factor
    ``i`` embedded in R^6, so the integrand is ``(1/4) * 2! * d_2(B_1, B_2)``
    on the tangent frame ``{(c1'(s), 0), (0, c2'(t))}``.
    """
    if c1.space != "S2" or c2.space != "S2":
        raise InputError("product check needs two curves on S2")
    config = config or MixedVolumeConfig(method="closed_form")
    dom = ChartDomain.torus(2, [1.0, 1.0]) if (c1.closed and c2.closed) else ChartDomain.box([[0, 1], [0, 1]])
    pts, w = dom.quadrature([grid, grid])
    v1 = c1.derivative(pts[:, 0])
    v2 = c2.derivative(pts[:, 1])
    P = len(pts)
    frames = np.zeros((P, 2, 6))
    frames[:, 0, :3] = v1
    frames[:, 1, 3:] = v2
    B = np.stack([embedded_factor_ball([3, 3], 0).Q, embedded_factor_ball([3, 3], 1).Q])
    Qs = np.broadcast_to(B, (P, 2, 6, 6))
    prod = 0.25 * math.factorial(2) * d_m_stack(Qs, frames, config)
    return integrate(prod, w) / math.pi**2


def product_crofton_check(
    c1: CurveModel,
    c2: CurveModel,
    trials: int,
    seed: int,
    grid: int = 128,
    resolution: int = CROFTON_RESOLUTION,
    config: MixedVolumeConfig | None = None,
) -> ProductCroftonReport:
    """Mean of ``#(C1 & Y_g1) * #(C2 & Y_g2)`` over independent poles vs the density integral."""
    if c1.space != "S2" or c2.space != "S2":
        raise InputError("product check needs two curves on S2")

    def draw(rng, size):
        return uniform_sphere(rng, size, 3), uniform_sphere(rng, size, 3)

    def evaluate(batch):
        g1, g2 = batch
        n1, ok1 = _count_intersections(c1, g1, np.zeros(len(g1)), resolution)
        n2, ok2 = _count_intersections(c2, g2, np.zeros(len(g2)), resolution)
        return n1 * n2, ok1 & ok2

    est = count_mc(seed, trials, draw, evaluate)
    dens = product_density_integral(c1, c2, grid, config)
    return ProductCroftonReport(est.value, est.std_error, dens, est.samples, est.redraws)


# --- JSON --------------------------------------------------------------------


def curve_from_json(doc: dict) -> CurveModel | tuple[CurveModel, CurveModel]:
    """Build a curve (or a pair for ``S2xS2``) from its JSON description."""
    space = doc.get("space", "R2")
    kind = doc.get("type")
    if space == "S2xS2":
        factors = doc.get("factors")
        if not factors or len(factors) != 2:
            raise InputError("S2xS2 needs two 'factors'")
        c1, c2 = (curve_from_json({"space": "S2", **f}) for f in factors)
        return c1, c2
    if space not in SPACES:
        raise InputError(f"unknown curve space {space!r}")
    if kind == "segment":
        dim = 2 if space == "R2" else 3
        start = doc.get("start", [0.0] * dim)
        end = doc.get("end", [1.0] + [0.0] * (dim - 1))
        c = segment(start, end)
        if c.space != space:
            raise InputError("segment endpoints do not match the declared space")
        return c
    if kind == "circle":
        if space == "S2":
            return great_circle(doc.get("axis", (0.0, 0.0, 1.0)))
        return circle(float(doc.get("radius", 1.0)), doc.get("center"), space, doc.get("normal"))
    if kind == "small_circle":
        if space != "S2":
            raise InputError("small_circle lives on S2")
        return small_circle(float(doc.get("colatitude", math.pi / 2)), doc.get("axis", (0.0, 0.0, 1.0)))
    if kind == "param":
        dim = 2 if space == "R2" else 3
        return trig_curve(doc.get("const", [0.0] * dim), doc.get("cos", ()), doc.get("sin", ()), space)
    raise InputError(f"unknown curve type {kind!r}")


def rotation_matrix(axis: Sequence[float], angle: float) -> np.ndarray:
    """Rotation by ``angle`` about ``axis`` in R^3; a 2-vector ``axis`` gives the planar rotation."""
    axis = np.asarray(axis, dtype=float)
    if axis.shape[0] == 2 or axis.size == 0:
        c, s = math.cos(angle), math.sin(angle)
        return np.array([[c, -s], [s, c]])
    k = axis / np.linalg.norm(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K
