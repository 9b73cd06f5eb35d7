"""Mixed volumes of centered ellipsoids.

Three routes are provided:

``gaussian_mc``
    For ellipsoids ``E_i = A_i(B)`` in R^m (``A_i`` symmetric PSD),
    ``V(E_1, ..., E_m) = kappa_m * E|det(A_1 g_1, ..., A_m g_m)| / E|det(g_1, ..., g_m)|``
    with independent standard Gaussian vectors ``g_i``.  The denominator is
    the product of chi means ``prod_{k=1..m} sqrt(2) Gamma((k+1)/2) / Gamma(k/2)``
    (the absolute determinant of a Gaussian matrix is a product of independent
    chi variables with 1..m degrees of freedom).
``polarization_oracle``
    Inclusion-exclusion over Minkowski sums, each volume taken as the convex
    hull of sampled boundary points.  Slow, m <= 3, independent of the above.
``closed_form``
    m = 1: the length ``2 sqrt(q)``.  m = 2: integrating the Gaussian formula
    exactly gives half the perimeter of the ellipse ``A_2 J A_1 (B)`` with
    ``J`` the quarter-turn, an elliptic integral of the second kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.special import ellipe

from ._common import InputError, block_rng, blocks, map_blocks
from .convex import PSD_TOL, CenteredEllipsoid, SupportSum, batched_psd_sqrt, unit_ball_volume

METHODS = ("gaussian_mc", "polarization_oracle", "closed_form")

# spawn-key tag for per-node streams of the stacked estimator
_STACK_KEY = 0x57AC
_STACK_CHUNK = 64


@dataclass(frozen=True)
class MixedVolumeEstimate:
    value: float
    std_error: float
    samples: int
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class MixedVolumeConfig:
    """How densities and field integrals evaluate mixed volumes.

    ``method`` is one of ``gaussian_mc``, ``polarization_oracle``,
    ``closed_form`` or ``auto`` (closed form for m <= 2, Gaussian MC above).
    """

    method: str = "gaussian_mc"
    trials: int = 100_000
    seed: int = 0
    directions: int = 720

    def __post_init__(self):
        if self.method not in METHODS + ("auto",):
            raise InputError(f"unknown mixed-volume method {self.method!r}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")

    def resolve(self, m: int) -> str:
        if self.method == "auto":
            return "closed_form" if m <= 2 else "gaussian_mc"
        return self.method


def expected_abs_gaussian_det(m: int) -> float:
    """``E|det G|`` for an ``m x m`` matrix of iid standard normals."""
    if m < 1:
        raise InputError("m must be >= 1")
    out = 1.0
    for k in range(1, m + 1):
        out *= math.sqrt(2.0) * math.exp(math.lgamma((k + 1) / 2) - math.lgamma(k / 2))
    return out


def _check_bodies(bodies: Sequence[CenteredEllipsoid]) -> int:
    bodies = list(bodies)
    m = len(bodies)
    if m < 1:
        raise InputError("need at least one body")
    for b in bodies:
        if not isinstance(b, CenteredEllipsoid):
            raise InputError(f"expected CenteredEllipsoid, got {type(b).__name__}")
        if b.dim != m:
            raise InputError(f"mixed volume of {m} bodies needs dimension {m}, got {b.dim}")
    return m


def _abs_det_columns(cols: np.ndarray) -> np.ndarray:
    """``|det|`` of matrices given as ``cols[..., i, :]`` = i-th column."""
    m = cols.shape[-1]
    if m == 1:
        return np.abs(cols[..., 0, 0])
    if m == 2:
        a, b = cols[..., 0, :], cols[..., 1, :]
        return np.abs(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    if m == 3:
        a, b, c = cols[..., 0, :], cols[..., 1, :], cols[..., 2, :]
        return np.abs(
            a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
            - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
            + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
        )
    return np.abs(np.linalg.det(np.swapaxes(cols, -1, -2)))


def mixed_volume_mc(bodies: Sequence[CenteredEllipsoid], trials: int, seed: int) -> MixedVolumeEstimate:
    """Gaussian-determinant Monte Carlo estimate of ``V(E_1, ..., E_m)``.

    Draws come in blocks of fixed size from streams keyed by ``(seed, block)``,
    so the output is a function of ``(bodies, trials, seed)`` only.
    """
    m = _check_bodies(bodies)
    if trials < 1:
        raise InputError("trials must be >= 1")
    roots = np.stack([b.sqrt for b in bodies])  # (m, m, m)

    def run(block):
        b, _, size = block
        rng = block_rng(seed, b)
        g = rng.standard_normal((size, m, m))
        # column i is A_i g_i
        cols = np.empty_like(g)
        for i in range(m):
            cols[:, i, :] = g[:, i, :] @ roots[i].T
        d = _abs_det_columns(cols)
        return float(d.sum()), float((d * d).sum())

    parts = map_blocks(run, blocks(trials))
    s = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s / trials
    var = max(s2 / trials - mean * mean, 0.0)
    scale = unit_ball_volume(m) / expected_abs_gaussian_det(m)
    se = math.sqrt(var / (trials - 1)) if trials > 1 else 0.0
    return MixedVolumeEstimate(scale * mean, scale * se, trials, "gaussian_mc")


def sphere_directions(m: int, count: int) -> np.ndarray:
    """Quasi-uniform unit vectors: ``+-1`` (m=1), equal angles (m=2), Fibonacci lattice (m=3)."""
    if m == 1:
        return np.array([[1.0], [-1.0]])
    if m == 2:
        t = 2 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    if m == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise InputError(f"no direction set for m = {m}")


def hull_volume(points: np.ndarray) -> float:
    """Volume of the convex hull; 0 when the points do not span full dimension."""
    points = np.asarray(points, dtype=float)
    m = points.shape[1]
    if m == 1:
        return float(points.max() - points.min())
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
        return 0.0
    try:
        return float(ConvexHull(points).volume)
    except QhullError:
        return 0.0


def mixed_volume_oracle(bodies: Sequence[CenteredEllipsoid], directions: int) -> MixedVolumeEstimate:
    """Polarization-formula mixed volume with inscribed-hull volumes (m <= 3)."""
    m = _check_bodies(bodies)
    if m > 3:
        raise InputError("polarization oracle supports m <= 3 only")
    if directions < 20 * m:
        raise InputError(f"need at least {20 * m} directions, got {directions}")
    U = sphere_directions(m, directions)
    total = 0.0
    for k in range(1, m + 1):
        sign = (-1) ** (m - k)
        for S in combinations(range(m), k):
            pts = SupportSum([bodies[i] for i in S]).boundary_points(U, PSD_TOL)
            total += sign * hull_volume(pts)
    value = max(total / math.factorial(m), 0.0)
    return MixedVolumeEstimate(value, 0.0, len(U), "polarization_oracle")


def closed_form_stack(Qs: np.ndarray) -> np.ndarray:
    """Exact mixed volumes for stacks of body sets, ``Qs`` of shape ``(P, m, m, m)``, m <= 2.

    ``Qs[p, i]`` is the matrix of body ``i`` at node ``p``.
    """
    Qs = np.asarray(Qs, dtype=float)
    m = Qs.shape[-1]
    if m == 1:
        return 2.0 * np.sqrt(np.clip(Qs[:, 0, 0, 0], 0.0, None))
    if m != 2:
        raise InputError("closed form is available for m <= 2 only")
    A = batched_psd_sqrt(Qs)
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    M = A[:, 1] @ J @ A[:, 0]
    s = np.linalg.svd(M, compute_uv=False)
    s1, s2 = s[:, 0], s[:, 1]
    out = np.zeros(len(M))
    pos = s1 > 0
    out[pos] = 2.0 * s1[pos] * ellipe(1.0 - (s2[pos] / s1[pos]) ** 2)
    return out


def mixed_volume_closed_form(bodies: Sequence[CenteredEllipsoid]) -> MixedVolumeEstimate:
    _check_bodies(bodies)
    Qs = np.stack([b.Q for b in bodies])[None]
    return MixedVolumeEstimate(float(closed_form_stack(Qs)[0]), 0.0, 0, "closed_form")


def mixed_volume_mc_stack(Qs: np.ndarray, trials: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian MC mixed volumes for many body sets, independent streams per node chunk.

    Returns ``(values, std_errors)`` of shape ``(P,)``.
    """
    Qs = np.asarray(Qs, dtype=float)
    P, m = Qs.shape[0], Qs.shape[-1]
    A = batched_psd_sqrt(Qs)
    scale = unit_ball_volume(m) / expected_abs_gaussian_det(m)
    starts = list(range(0, P, _STACK_CHUNK))

    def run(start):
        chunk = A[start : start + _STACK_CHUNK]
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(_STACK_KEY, start)))
        acc = np.zeros(len(chunk))
        acc2 = np.zeros(len(chunk))
        for _, _, size in blocks(trials, max(1, 2**18 // max(len(chunk), 1))):
            g = rng.standard_normal((len(chunk), size, m, m))
            cols = np.einsum("pijk,pnik->pnij", chunk, g)
            d = _abs_det_columns(cols)
            acc += d.sum(axis=1)
            acc2 += (d * d).sum(axis=1)
        return acc, acc2

    parts = map_blocks(run, starts)
    s = np.concatenate([p[0] for p in parts])
    s2 = np.concatenate([p[1] for p in parts])
    mean = s / trials
    var = np.clip(s2 / trials - mean * mean, 0.0, None)
    se = np.sqrt(var / max(trials - 1, 1))
    return scale * mean, scale * se


def mixed_volume(bodies: Sequence[CenteredEllipsoid], config: MixedVolumeConfig | None = None) -> MixedVolumeEstimate:
    """Dispatch on ``config.method``."""
    config = config or MixedVolumeConfig()
    m = _check_bodies(bodies)
    method = config.resolve(m)
    if method == "gaussian_mc":
        return mixed_volume_mc(bodies, config.trials, config.seed)
    if method == "polarization_oracle":
        return mixed_volume_oracle(bodies, max(config.directions, 20 * m))
    return mixed_volume_closed_form(bodies)


def mixed_volume_stack(Qs: np.ndarray, config: MixedVolumeConfig | None = None) -> np.ndarray:
    """Mixed volumes for a stack ``(P, m, m, m)`` of body sets under ``config``."""
    config = config or MixedVolumeConfig()
    Qs = np.asarray(Qs, dtype=float)
    m = Qs.shape[-1]
    method = config.resolve(m)
    if method == "closed_form":
        return closed_form_stack(Qs)
    if method == "gaussian_mc":
        return mixed_volume_mc_stack(Qs, config.trials, config.seed)[0]
    out = np.empty(len(Qs))
    for p, node in enumerate(Qs):
        out[p] = mixed_volume_oracle([CenteredEllipsoid(q) for q in node], max(config.directions, 20 * m)).value
    return out
