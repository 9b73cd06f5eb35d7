"""Mixed densities ``d_m(A_1, ..., A_m)`` of centered ellipsoids and their products.

``d_m(A_1, ..., A_m)`` evaluated on a frame ``xi_1, ..., xi_m`` is the mixed
volume of the bodies projected onto ``span(xi)``, measured in frame
coordinates.  Products of first-order densities are computed through the
product rule ``d_1(A_1) * ... * d_1(A_m) = m! d_m(A_1, ..., A_m)``, which is
the only multiplication the package needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._common import InputError, as_vector
from .convex import RANK_TOL, CenteredEllipsoid, Frame, project, support
from .mixed_volume import MixedVolumeConfig, mixed_volume, mixed_volume_stack


@dataclass(frozen=True)
class DensityValue:
    value: float
    order: int
    std_error: float = 0.0

    def __float__(self) -> float:
        return self.value


def d1(A: CenteredEllipsoid, xi) -> DensityValue:
    """``h(xi) - h(-xi)``; twice the support for a centered body."""
    xi = as_vector(xi, A.dim, "xi")
    return DensityValue(support(A, xi) + support(A, -xi), 1)


def d_m(
    bodies: Sequence[CenteredEllipsoid],
    frame: Frame,
    config: MixedVolumeConfig | None = None,
    rank_tol: float = RANK_TOL,
) -> DensityValue:
    """Mixed volume of the bodies projected to ``span(frame)``, in frame coordinates.

    A linearly dependent frame gives exactly 0.
    """
    bodies = list(bodies)
    m = frame.size
    if len(bodies) != m:
        raise InputError(f"{len(bodies)} bodies for a frame of {m} vectors")
    for b in bodies:
        if b.dim != frame.ambient_dim:
            raise InputError(f"body in R^{b.dim}, frame in R^{frame.ambient_dim}")
    if frame.is_degenerate(rank_tol):
        return DensityValue(0.0, m)
    est = mixed_volume([project(b, frame) for b in bodies], config)
    return DensityValue(est.value, m, est.std_error)


def product_d1(
    bodies: Sequence[CenteredEllipsoid],
    frame: Frame,
    config: MixedVolumeConfig | None = None,
) -> DensityValue:
    """The ring product ``d_1(A_1) * ... * d_1(A_m)`` on ``frame``, i.e. ``m! d_m``."""
    dv = d_m(bodies, frame, config)
    k = math.factorial(dv.order)
    return DensityValue(k * dv.value, dv.order, k * dv.std_error)


def d_m_stack(
    Qs: np.ndarray,
    frames: np.ndarray | None = None,
    config: MixedVolumeConfig | None = None,
    rank_tol: float = RANK_TOL,
) -> np.ndarray:
    """Vectorised :func:`d_m` over many points.

    Parameters
    ----------
    Qs : ndarray, shape (P, m, dim, dim)
        Matrices of the ``m`` bodies at each of ``P`` points.
    frames : ndarray, shape (P, m, dim), optional
        Frame vectors (rows) at each point; the standard frame when omitted
        (then ``dim`` must equal ``m``).
    """
    Qs = np.asarray(Qs, dtype=float)
    P, m, dim = Qs.shape[0], Qs.shape[1], Qs.shape[-1]
    if frames is None:
        if dim != m:
            raise InputError("standard frame needs dim == number of bodies")
        return mixed_volume_stack(Qs, config)
    frames = np.asarray(frames, dtype=float)
    if frames.shape != (P, m, dim):
        raise InputError(f"frames have shape {frames.shape}, expected {(P, m, dim)}")
    M = np.einsum("pad,pidc,pbc->piab", frames, Qs, frames)
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    s = np.linalg.svd(frames, compute_uv=False)
    degenerate = (s[:, 0] == 0.0) | (s[:, -1] < rank_tol * s[:, 0])
    out = np.zeros(P)
    keep = ~degenerate
    if keep.any():
        out[keep] = mixed_volume_stack(M[keep], config)
    return out


def _split(components: Sequence, factor_index: int) -> np.ndarray:
    if not 0 <= factor_index < len(components):
        raise InputError(f"factor index {factor_index} out of range for {len(components)} factors")
    return as_vector(components[factor_index], name="component")


def vol1_factor(factor_index: int, components: Sequence) -> DensityValue:
    """Euclidean length of the ``factor_index``-th component of a product tangent vector.

    ``components`` lists the per-factor pieces of the vector, e.g.
    ``[(3, 4), (0, 0)]`` for a vector of ``R^2 x R^2``.  Indices are 0-based.
    """
    comp = _split(components, factor_index)
    return DensityValue(float(np.linalg.norm(comp)), 1)


def embedded_factor_ball(factor_dims: Sequence[int], factor_index: int) -> CenteredEllipsoid:
    """Unit ball of one factor's (co)tangent space, as a degenerate ellipsoid of the whole space."""
    factor_dims = [int(d) for d in factor_dims]
    if not 0 <= factor_index < len(factor_dims):
        raise InputError(f"factor index {factor_index} out of range")
    total = sum(factor_dims)
    Q = np.zeros((total, total))
    start = sum(factor_dims[:factor_index])
    stop = start + factor_dims[factor_index]
    Q[start:stop, start:stop] = np.eye(factor_dims[factor_index])
    return CenteredEllipsoid(Q)


def flatten_components(components: Sequence) -> np.ndarray:
    return np.concatenate([as_vector(c, name="component") for c in components])
