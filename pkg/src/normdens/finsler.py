"""Function spaces on flat charts and the Finsler ellipsoid fields they induce.

A space ``V`` with orthonormal basis ``f_1, ..., f_d`` on an ``n``-dimensional
chart gives the evaluation map ``theta(x) = (f_1(x), ..., f_d(x))`` and at every
point the ellipsoid ``E(x) = {J(x)^T u : |u| <= 1}`` in the cotangent space,
where ``J(x)`` is the ``d x n`` matrix of basis gradients.  Its support
function on tangent vectors is ``h(xi) = |J(x) xi|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._common import InputError
from .convex import CenteredEllipsoid, unit_ball_volume
from .density import d_m_stack
from .mixed_volume import MixedVolumeConfig


@dataclass(frozen=True, eq=False)
class ChartDomain:
    """A flat torus ``prod R / period_j Z`` or a box ``prod [lo_j, hi_j]``."""

    kind: str
    dim: int
    periods: tuple[float, ...] = ()
    bounds: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("torus", "box"):
            raise InputError(f"domain kind must be 'torus' or 'box', got {self.kind!r}")
        if self.dim < 1:
            raise InputError("domain dimension must be >= 1")
        if self.kind == "torus":
            periods = tuple(float(p) for p in (self.periods or (2 * math.pi,) * self.dim))
            if len(periods) != self.dim or any(p <= 0 for p in periods):
                raise InputError(f"bad torus periods {periods}")
            object.__setattr__(self, "periods", periods)
            object.__setattr__(self, "bounds", tuple((0.0, p) for p in periods))
        else:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(bounds) != self.dim or any(lo >= hi for lo, hi in bounds):
                raise InputError(f"bad box bounds {bounds}")
            object.__setattr__(self, "bounds", bounds)

    @classmethod
    def torus(cls, dim: int, periods: Sequence[float] | None = None) -> "ChartDomain":
        return cls("torus", dim, tuple(periods or ()))

    @classmethod
    def box(cls, bounds: Sequence[Sequence[float]]) -> "ChartDomain":
        return cls("box", len(bounds), (), tuple(tuple(b) for b in bounds))

    @property
    def periodic(self) -> bool:
        return self.kind == "torus"

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def reduce(self, X) -> np.ndarray:
        """Reduce torus points mod the periods; reject points outside a box."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise InputError(f"point has dimension {X.shape[-1]}, domain has {self.dim}")
        if self.periodic:
            return np.mod(X, np.array(self.periods))
        tol = 1e-12 * np.maximum(1.0, np.abs(self.upper - self.lower))
        if np.any(X < self.lower - tol) or np.any(X > self.upper + tol):
            raise InputError("point outside the box domain")
        return X

    def quadrature(self, grid: Sequence[int] | int) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product nodes and weights: trapezoid on torus axes, Gauss-Legendre on box axes."""
        grid = _grid(grid, self.dim)
        axes, weights = [], []
        for j, N in enumerate(grid):
            lo, hi = self.bounds[j]
            if self.periodic:
                axes.append(lo + (hi - lo) * np.arange(N) / N)
                weights.append(np.full(N, (hi - lo) / N))
            else:
                t, w = leggauss(N)
                axes.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
                weights.append(0.5 * (hi - lo) * w)
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        w = weights[0]
        for extra in weights[1:]:
            w = np.multiply.outer(w, extra)
        return pts, w.reshape(-1)

    def to_json(self) -> dict:
        if self.periodic:
            return {"kind": "torus", "dim": self.dim, "periods": list(self.periods)}
        return {"kind": "box", "dim": self.dim, "bounds": [list(b) for b in self.bounds]}

    @classmethod
    def from_json(cls, doc: dict) -> "ChartDomain":
        try:
            kind = doc["kind"]
            dim = int(doc["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad domain description: {exc}") from None
        if kind == "torus":
            return cls.torus(dim, doc.get("periods"))
        if kind == "box":
            bounds = doc.get("bounds")
            if bounds is None or len(bounds) != dim:
                raise InputError("box domain needs one [lo, hi] pair per coordinate")
            return cls.box(bounds)
        raise InputError(f"unknown domain kind {kind!r}")


def _grid(grid, dim: int) -> list[int]:
    if np.isscalar(grid):
        grid = [int(grid)] * dim
    grid = [int(g) for g in grid]
    if len(grid) != dim:
        raise InputError(f"grid has {len(grid)} axes, domain has {dim}")
    if any(g < 4 for g in grid):
        raise InputError("quadrature needs at least 4 nodes per axis")
    return grid


@dataclass(frozen=True, eq=False)
class BasisFunction:
    """A smooth function with its gradient; both act on point arrays of shape ``(P, n)``."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    label: str = ""


def trig_mode(k: Sequence[int], kind: str, domain: ChartDomain, scale: float = 1.0) -> BasisFunction:
    """``scale * cos(w . x)`` or ``scale * sin(w . x)`` with ``w_j = 2 pi k_j / period_j``."""
    if not domain.periodic:
        raise InputError("trigonometric modes need a torus domain")
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.shape[0] != domain.dim:
        raise InputError(f"mode vector {k.tolist()} does not match domain dimension {domain.dim}")
    if kind not in ("cos", "sin"):
        raise InputError(f"mode kind must be 'cos' or 'sin', got {kind!r}")
    w = 2 * np.pi * k / np.array(domain.periods)

    if kind == "cos":
        def value(X):
            return scale * np.cos(X @ w)

        def gradient(X):
            return -scale * np.sin(X @ w)[:, None] * w
    else:
        def value(X):
            return scale * np.sin(X @ w)

        def gradient(X):
            return scale * np.cos(X @ w)[:, None] * w

    return BasisFunction(value, gradient, f"{scale:g}*{kind}({k.astype(int).tolist()}.x)")


def monomial(exponents: Sequence[int], scale: float = 1.0) -> BasisFunction:
    e = np.asarray(exponents, dtype=int).reshape(-1)
    if np.any(e < 0):
        raise InputError("monomial exponents must be nonnegative")

    def value(X):
        return scale * np.prod(X ** e, axis=1)

    def gradient(X):
        out = np.empty_like(X)
        for j in range(len(e)):
            if e[j] == 0:
                out[:, j] = 0.0
                continue
            ej = e.copy()
            ej[j] -= 1
            out[:, j] = scale * e[j] * np.prod(X ** ej, axis=1)
        return out

    return BasisFunction(value, gradient, f"{scale:g}*x^{e.tolist()}")


class FunctionSpace:
    """Finite family of smooth functions, declared orthonormal.

    Coordinates in the stored basis are the inner-product coordinates, so
    ``theta(x)`` and the Finsler ellipsoid are read off directly.  A mixing
    matrix ``C`` (rows = new basis in terms of raw functions) lets callers
    orthonormalize a raw family without re-deriving gradients.
    """

    def __init__(self, domain: ChartDomain, basis: Sequence[BasisFunction], mixing: np.ndarray | None = None):
        basis = list(basis)
        if not basis:
            raise InputError("a function space needs at least one basis function")
        self.domain = domain
        self.basis = tuple(basis)
        if mixing is not None:
            mixing = np.asarray(mixing, dtype=float)
            if mixing.ndim != 2 or mixing.shape[1] != len(basis):
                raise InputError("mixing matrix must have one column per raw basis function")
        self.mixing = mixing

    @property
    def n(self) -> int:
        return self.domain.dim

    @property
    def d(self) -> int:
        return len(self.basis) if self.mixing is None else self.mixing.shape[0]

    def values(self, X) -> np.ndarray:
        """Basis values, shape ``(P, d)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        raw = np.stack([f.value(X) for f in self.basis], axis=-1)
        return raw if self.mixing is None else raw @ self.mixing.T

    def gradients(self, X) -> np.ndarray:
        """Basis gradients, shape ``(P, d, n)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        raw = np.stack([f.gradient(X) for f in self.basis], axis=1)
        return raw if self.mixing is None else np.einsum("ij,pjn->pin", self.mixing, raw)

    def scaled(self, lam: float) -> "FunctionSpace":
        mix = np.eye(len(self.basis)) if self.mixing is None else self.mixing
        return FunctionSpace(self.domain, self.basis, lam * mix)

    def shifted(self, s) -> "FunctionSpace":
        """The space ``{x -> f(x + s)}`` with the transported basis."""
        s = np.asarray(s, dtype=float).reshape(-1)
        if s.shape[0] != self.n:
            raise InputError("shift has wrong dimension")
        basis = [
            BasisFunction(
                (lambda X, f=f: f.value(X + s)),
                (lambda X, f=f: f.gradient(X + s)),
                f.label + "(shifted)",
            )
            for f in self.basis
        ]
        return FunctionSpace(self.domain, basis, self.mixing)


def theta(space: FunctionSpace, x) -> np.ndarray:
    """Evaluation functional at ``x`` in basis coordinates, ``(f_1(x), ..., f_d(x))``."""
    x = space.domain.reduce(np.asarray(x, dtype=float).reshape(1, -1))
    return space.values(x)[0]


def finsler_matrices(space: FunctionSpace, X) -> np.ndarray:
    """``Q(x) = J(x)^T J(x)`` at each row of ``X``; shape ``(P, n, n)``."""
    J = space.gradients(np.atleast_2d(X))
    Q = np.einsum("pdi,pdj->pij", J, J)
    return 0.5 * (Q + np.swapaxes(Q, -1, -2))


def finsler_ellipsoid(space: FunctionSpace, x) -> CenteredEllipsoid:
    """Ellipsoid ``E(x)`` of the pulled-back unit ball, as a body in the cotangent space at ``x``."""
    x = space.domain.reduce(np.asarray(x, dtype=float).reshape(1, -1))
    return CenteredEllipsoid(finsler_matrices(space, x)[0])


def integrate(values: np.ndarray, weights: np.ndarray) -> float:
    """Weighted sum with compensated summation (order-independent for a fixed grid)."""
    return math.fsum((np.asarray(values) * weights).tolist())


def symplectic_volume(space: FunctionSpace, grid) -> float:
    """``int_X vol_n(E(x)) dx`` with ``vol_n(E) = kappa_n sqrt(det Q)``."""
    pts, w = space.domain.quadrature(grid)
    Q = finsler_matrices(space, pts)
    vol = unit_ball_volume(space.n) * np.sqrt(np.clip(np.linalg.det(Q), 0.0, None))
    return integrate(vol, w)


def _common_domain(spaces: Sequence[FunctionSpace]) -> ChartDomain:
    spaces = list(spaces)
    if not spaces:
        raise InputError("no spaces given")
    dom = spaces[0].domain
    for s in spaces[1:]:
        if s.domain is not dom and s.domain.to_json() != dom.to_json():
            raise InputError("spaces live on different domains")
    if len(spaces) != dom.dim:
        raise InputError(f"{len(spaces)} spaces on a {dom.dim}-dimensional domain")
    return dom


def field_stack(spaces: Sequence[FunctionSpace], pts: np.ndarray) -> np.ndarray:
    """Finsler matrices of all spaces at all points, shape ``(P, n, n, n)``."""
    return np.stack([finsler_matrices(s, pts) for s in spaces], axis=1)


def mixed_symplectic_volume(
    spaces: Sequence[FunctionSpace], grid, config: MixedVolumeConfig | None = None
) -> float:
    """``int_X d_n(E_1(x), ..., E_n(x))(standard frame) dx``."""
    dom = _common_domain(spaces)
    pts, w = dom.quadrature(grid)
    vals = d_m_stack(field_stack(spaces, pts), None, config)
    return integrate(vals, w)


def orthonormalize(space: FunctionSpace, grid) -> FunctionSpace:
    """Gram-Schmidt of the basis in ``L^2`` of the chart (quadrature inner product)."""
    pts, w = space.domain.quadrature(grid)
    F = space.values(pts)
    G = F.T @ (w[:, None] * F)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise InputError("basis is linearly dependent on the sample grid") from None
    C = np.linalg.solve(L, np.eye(len(G)))
    base = np.eye(len(space.basis)) if space.mixing is None else space.mixing
    return FunctionSpace(space.domain, space.basis, C @ base)


def check_gradients(space: FunctionSpace, X, h: float = 1e-6) -> float:
    """Largest relative mismatch between gradients and central differences at ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    G = space.gradients(X)
    worst = 0.0
    for j in range(space.n):
        e = np.zeros(space.n)
        e[j] = h
        fd = (space.values(X + e) - space.values(X - e)) / (2 * h)
        scale = np.maximum(1.0, np.abs(G[:, :, j]))
        worst = max(worst, float(np.max(np.abs(fd - G[:, :, j]) / scale)))
    return worst


# --- built-in spaces ---------------------------------------------------------


def trig_space(domain: ChartDomain, modes: Sequence[tuple[Sequence[int], str]], scale: float = 1.0) -> FunctionSpace:
    """Span of ``cos``/``sin`` modes; e.g. ``[((1,), "cos"), ((1,), "sin")]`` on T^1."""
    return FunctionSpace(domain, [trig_mode(k, kind, domain, scale) for k, kind in modes])


def poly_space(domain: ChartDomain, exponents: Sequence[Sequence[int]], scale: float = 1.0) -> FunctionSpace:
    return FunctionSpace(domain, [monomial(e, scale) for e in exponents])


def circle_space(scale: float = 1.0) -> FunctionSpace:
    """``span{cos x, sin x}`` on T^1."""
    return trig_space(ChartDomain.torus(1), [((1,), "cos"), ((1,), "sin")], scale)


def decoupled_torus_spaces() -> list[FunctionSpace]:
    """``span{cos x1, sin x1}`` and ``span{cos x2, sin x2}`` on T^2."""
    dom = ChartDomain.torus(2)
    return [
        trig_space(dom, [((1, 0), "cos"), ((1, 0), "sin")]),
        trig_space(dom, [((0, 1), "cos"), ((0, 1), "sin")]),
    ]


def clifford_space(domain: ChartDomain | None = None) -> FunctionSpace:
    """``span{cos x1, sin x1, cos x2, sin x2}`` on T^2."""
    dom = domain or ChartDomain.torus(2)
    return trig_space(dom, [((1, 0), "cos"), ((1, 0), "sin"), ((0, 1), "cos"), ((0, 1), "sin")])


# --- JSON --------------------------------------------------------------------


def space_from_json(doc: dict, domain: ChartDomain) -> FunctionSpace:
    kind = doc.get("type")
    scale = float(doc.get("scale", 1.0))
    if kind == "trig":
        modes = doc.get("modes")
        if not modes:
            raise InputError("trig space needs a non-empty 'modes' list")
        try:
            pairs = [(m[0] if isinstance(m[0], list) else [m[0]], m[1]) for m in modes]
        except (IndexError, TypeError):
            raise InputError("each trig mode must be [k vector, 'cos'|'sin']") from None
        space = trig_space(domain, pairs, scale)
    elif kind == "poly":
        exps = doc.get("exponents")
        if not exps:
            raise InputError("poly space needs a non-empty 'exponents' list")
        space = poly_space(domain, [e if isinstance(e, list) else [e] for e in exps], scale)
    else:
        raise InputError(f"unknown space type {kind!r}")
    if doc.get("orthonormalize"):
        space = orthonormalize(space, doc.get("orthonormalize_grid", 64))
    return space


def load_spaces(doc: dict | str) -> tuple[ChartDomain, list[FunctionSpace]]:
    """Parse ``{"domain": {...}, "spaces": [...]}`` (a dict, a JSON string or a file path)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError:
            try:
                with open(doc) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read space definition: {exc}") from None
    if not isinstance(doc, dict) or "domain" not in doc or "spaces" not in doc:
        raise InputError("space definition needs 'domain' and 'spaces'")
    domain = ChartDomain.from_json(doc["domain"])
    spaces = [space_from_json(s, domain) for s in doc["spaces"]]
    return domain, spaces
