"""Centered (possibly degenerate) ellipsoids, frames, support functions and projections.

An ellipsoid is stored by the PSD matrix ``Q`` of its squared support function,
``h(xi) = sqrt(xi^T Q xi)``.  The body itself is ``{J^T u : |u| <= 1}`` for any
``J`` with ``J^T J = Q``; rank-deficient ``Q`` (segments, discs in 3-space,
points) is allowed everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import gamma, pi
from typing import Sequence

import numpy as np

from ._common import InputError, as_vector

SYM_TOL = 1e-10
PSD_TOL = 1e-9
RANK_TOL = 1e-8


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m."""
    return pi ** (m / 2) / gamma(m / 2 + 1)


def clamp_psd(Q: np.ndarray, psd_tol: float = PSD_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a symmetric matrix, clamping small negative eigenvalues to 0.

    Returns ``(w, V)`` with ``Q ~ V diag(w) V^T`` and ``w >= 0``.
    Raises :class:`InputError` when an eigenvalue is negative beyond
    ``psd_tol`` relative to the largest one.
    """
    w, V = np.linalg.eigh(Q)
    scale = max(float(np.max(np.abs(w))) if w.size else 0.0, 0.0)
    floor = -psd_tol * scale
    if w.size and w.min() < floor - 1e-300:
        raise InputError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    return np.clip(w, 0.0, None), V


def psd_sqrt(Q: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Symmetric PSD square root via clamped eigendecomposition."""
    w, V = clamp_psd(Q, psd_tol)
    return (V * np.sqrt(w)) @ V.T


def batched_psd_sqrt(Qs: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
    """:func:`psd_sqrt` over a stack ``(..., m, m)``; negative eigenvalues are clamped silently."""
    w, V = np.linalg.eigh(Qs)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2)


class CenteredEllipsoid:
    """Centrally symmetric ellipsoid ``{J^T u : |u| <= 1}`` with ``J^T J = Q``.

    Parameters
    ----------
    Q : array_like, shape (dim, dim)
        Symmetric positive semidefinite matrix.  Asymmetry beyond ``SYM_TOL``
        (relative) or negative eigenvalues beyond ``PSD_TOL`` (relative to the
        largest eigenvalue) raise :class:`InputError`; smaller defects are
        repaired.
    """

    def __init__(self, Q):
        Q = np.array(Q, dtype=float)
        if Q.ndim == 0:
            Q = Q.reshape(1, 1)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] < 1:
            raise InputError(f"Q must be a non-empty square matrix, got shape {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise InputError("Q has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(Q))))
        if np.max(np.abs(Q - Q.T)) > SYM_TOL * scale:
            raise InputError("Q is not symmetric")
        Q = 0.5 * (Q + Q.T)
        w, V = clamp_psd(Q)
        Q = (V * w) @ V.T
        Q.setflags(write=False)
        self._Q = Q
        self._eig = (w, V)

    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> "CenteredEllipsoid":
        return cls(radius**2 * np.eye(dim))

    @classmethod
    def from_factor(cls, J) -> "CenteredEllipsoid":
        """Image of the unit ball under ``J^T``, i.e. ``Q = J^T J``."""
        J = np.atleast_2d(np.asarray(J, dtype=float))
        return cls(J.T @ J)

    @property
    def Q(self) -> np.ndarray:
        return self._Q

    @property
    def dim(self) -> int:
        return self._Q.shape[0]

    @cached_property
    def sqrt(self) -> np.ndarray:
        """Symmetric PSD square root ``A`` with ``A @ A = Q``; the body is ``A(B)``."""
        w, V = self._eig
        return (V * np.sqrt(w)) @ V.T

    @property
    def rank(self) -> int:
        w = self._eig[0]
        return int(np.count_nonzero(w > PSD_TOL * max(float(w.max()), 0.0)))

    def support(self, xi) -> float:
        return support(self, xi)

    def volume(self) -> float:
        """``dim``-dimensional volume, ``kappa_dim * sqrt(det Q)``."""
        return unit_ball_volume(self.dim) * float(np.sqrt(np.prod(self._eig[0])))

    def scaled(self, lam: float) -> "CenteredEllipsoid":
        """The body ``lam * E``."""
        return CenteredEllipsoid(lam * lam * self._Q)

    def __repr__(self) -> str:
        return f"CenteredEllipsoid(Q={self._Q.tolist()!r})"


@dataclass(frozen=True, eq=False)
class Frame:
    """Ordered list of ``m`` tangent vectors in ``R^ambient_dim``."""

    vectors: np.ndarray = field()

    def __init__(self, vectors: Sequence[Sequence[float]] | np.ndarray):
        arr = np.array(vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InputError(f"frame must be a list of vectors, got shape {arr.shape}")
        if arr.shape[0] > arr.shape[1]:
            raise InputError(f"frame has {arr.shape[0]} vectors in dimension {arr.shape[1]}")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def standard(cls, dim: int) -> "Frame":
        return cls(np.eye(dim))

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """``ambient_dim x m`` matrix whose columns are the frame vectors."""
        return self.vectors.T

    def is_degenerate(self, rank_tol: float = RANK_TOL) -> bool:
        s = np.linalg.svd(self.vectors, compute_uv=False)
        return bool(s[0] == 0.0 or s[-1] < rank_tol * s[0])


def support(E: CenteredEllipsoid, xi) -> float:
    """Support function ``h(xi) = sqrt(xi^T Q xi)``."""
    xi = as_vector(xi, E.dim, "xi")
    return float(np.sqrt(max(xi @ E.Q @ xi, 0.0)))


def project(E: CenteredEllipsoid, B: Frame) -> CenteredEllipsoid:
    """Projection of ``E`` onto ``span(B)`` written in frame coordinates: ``M = B^T Q B``.

    The projected body's support at ``c`` equals ``support(E, B c)``.
    """
    if B.ambient_dim != E.dim:
        raise InputError(f"frame lives in R^{B.ambient_dim}, body in R^{E.dim}")
    M = B.vectors @ E.Q @ B.vectors.T
    return CenteredEllipsoid(0.5 * (M + M.T))


class SupportSum:
    """Support function of a Minkowski sum of centered ellipsoids.

    The sum of ellipsoids is not an ellipsoid, so only ``h`` and the boundary
    map are exposed.
    """

    def __init__(self, bodies: Sequence[CenteredEllipsoid]):
        bodies = list(bodies)
        if not bodies:
            raise InputError("empty Minkowski sum")
        dims = {b.dim for b in bodies}
        if len(dims) != 1:
            raise InputError(f"bodies have different dimensions {sorted(dims)}")
        self.bodies = tuple(bodies)
        self.dim = dims.pop()

    def __call__(self, xi) -> float:
        xi = as_vector(xi, self.dim, "xi")
        return float(sum(support(b, xi) for b in self.bodies))

    def boundary_points(self, directions: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
        """Support points ``x(u) = sum_i Q_i u / sqrt(u^T Q_i u)`` for unit rows ``u``.

        Summands whose support at ``u`` is below tolerance contribute 0
        (the face of a degenerate body is then the whole body; any point of
        it would do, and 0 keeps the map even).
        """
        U = np.atleast_2d(np.asarray(directions, dtype=float))
        out = np.zeros_like(U)
        for b in self.bodies:
            QU = U @ b.Q
            q = np.einsum("ij,ij->i", QU, U)
            scale = max(float(np.max(np.abs(b.Q))), 1e-300)
            ok = q > psd_tol * scale
            out[ok] += QU[ok] / np.sqrt(q[ok])[:, None]
        return out


def minkowski_sum(E1: CenteredEllipsoid, E2: CenteredEllipsoid) -> SupportSum:
    """Support-function evaluator of ``E1 + E2``."""
    return SupportSum([E1, E2])
