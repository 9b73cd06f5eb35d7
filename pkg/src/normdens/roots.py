"""Counting and locating solutions of ``f_1 - a_1 = ... = f_n - a_n = 0`` for n in {1, 2}.

The workhorse is :func:`solve_family`, which handles a whole batch of systems
sharing the same basis functions,

    equation i of member k:  coeffs_i[k] . phi_i(x) - offsets_i[k] = 0,

so Monte Carlo drivers can count roots for thousands of random systems per
vectorised pass.  :func:`count_roots` wraps a single :class:`ScalarSystem`.

n = 1: sign changes on a uniform grid, bisection to 1e-12, Newton polish.
Cells where the derivative changes sign without a sign change of the function
are refined by locating the interior extremum (pairs of close roots).

n = 2: each grid cell is tested with corner values widened by a Lipschitz
margin; surviving cells run a step-limited Newton iteration from the centre.
Cells whose run diverges are split in four and retried once.  Converged roots
from all cells are pooled and deduplicated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._common import InputError
from .finsler import ChartDomain

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-7
SING_TOL = 1e-8
BISECT_TOL = 1e-12
RESIDUAL_TOL = 1e-9
MIN_RESOLUTION = 64

_LIPSCHITZ_SAFETY = 1.5
_NEWTON_ITERS = 40
_CHUNK_1D = 1024
_CHUNK_2D = 256


@dataclass(frozen=True, eq=False)
class AffineEquation:
    """``coeffs[k] . phi(x) - offsets[k]`` for members ``k``; ``phi`` returns ``(P, d)``."""

    phi: Callable[[np.ndarray], np.ndarray]
    dphi: Callable[[np.ndarray], np.ndarray]  # (P, d, n)
    coeffs: np.ndarray  # (K, d)
    offsets: np.ndarray  # (K,)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        a = np.asarray(self.offsets, dtype=float).reshape(-1)
        if c.shape[0] != a.shape[0]:
            raise InputError("coeffs and offsets disagree on the number of members")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "offsets", a)

    @property
    def members(self) -> int:
        return self.coeffs.shape[0]

    def at(self, X: np.ndarray, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(M,)`` and gradients ``(M, n)`` of members ``k`` at points ``X`` (row-paired)."""
        c = self.coeffs[k]
        v = np.einsum("md,md->m", self.phi(X), c) - self.offsets[k]
        g = np.einsum("mdn,md->mn", self.dphi(X), c)
        return v, g


@dataclass
class FamilyRoots:
    """Per-member results of :func:`solve_family`."""

    counts: np.ndarray  # (K,) int
    min_singular: np.ndarray  # (K,) smallest Jacobian singular value over the member's roots (inf if none)
    members: np.ndarray  # (R,) member index of each root
    points: np.ndarray  # (R, n)
    singular: np.ndarray  # (R,)
    warnings: int = 0

    def transversal(self, sing_tol: float = SING_TOL) -> np.ndarray:
        return self.min_singular >= sing_tol


@dataclass
class RootSet:
    points: np.ndarray
    count: int
    flags: np.ndarray  # smallest Jacobian singular value per root
    warnings: int = 0
    nontransversal: list[int] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class ScalarSystem:
    """``n`` equations ``x -> (f_i(x) - a_i, grad f_i(x))`` on an ``n``-dimensional chart.

    Each entry of ``equations`` is a callable taking points ``(P, n)`` and
    returning ``(values (P,), gradients (P, n))``.
    """

    domain: ChartDomain
    equations: tuple

    def __init__(self, domain: ChartDomain, equations: Sequence[Callable]):
        equations = tuple(equations)
        if len(equations) != domain.dim:
            raise InputError(f"{len(equations)} equations on a {domain.dim}-dimensional domain")
        if domain.dim not in (1, 2):
            raise InputError("only n = 1 and n = 2 are supported")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "equations", equations)

    def as_family(self) -> list[AffineEquation]:
        eqs = []
        for eq in self.equations:
            eqs.append(
                AffineEquation(
                    (lambda X, eq=eq: eq(X)[0][:, None]),
                    (lambda X, eq=eq: eq(X)[1][:, None, :]),
                    np.ones((1, 1)),
                    np.zeros(1),
                )
            )
        return eqs


def _resolution(resolution, n: int) -> list[int]:
    if np.isscalar(resolution):
        resolution = [int(resolution)] * n
    resolution = [int(r) for r in resolution]
    if len(resolution) != n:
        raise InputError("resolution must give one cell count per axis")
    return resolution


def count_roots(sys: ScalarSystem, resolution=256, sing_tol: float = SING_TOL) -> RootSet:
    """Locate all roots of ``sys``; roots are sorted lexicographically."""
    res = _resolution(resolution, sys.domain.dim)
    if min(res) < MIN_RESOLUTION:
        raise InputError(f"resolution must be at least {MIN_RESOLUTION} cells per axis")
    out = solve_family(sys.domain, sys.as_family(), res)
    pts = out.points
    sv = out.singular
    order = np.lexsort(pts.T[::-1]) if len(pts) else np.arange(0)
    pts, sv = pts[order], sv[order]
    bad = [int(i) for i in np.flatnonzero(sv < sing_tol)]
    return RootSet(pts, len(pts), sv, out.warnings, bad)


def solve_family(
    domain: ChartDomain,
    equations: Sequence[AffineEquation],
    resolution,
) -> FamilyRoots:
    """Find the roots of every member of a batched affine system."""
    equations = list(equations)
    n = domain.dim
    if len(equations) != n:
        raise InputError(f"{len(equations)} equations for a {n}-dimensional domain")
    K = equations[0].members
    if any(e.members != K for e in equations):
        raise InputError("equations disagree on the number of members")
    res = _resolution(resolution, n)
    if n == 1:
        return _solve_1d(domain, equations[0], res[0])
    if n == 2:
        return _solve_2d(domain, equations, res)
    raise InputError("only n = 1 and n = 2 are supported")


# --- n = 1 -------------------------------------------------------------------


def _bisect(eq: AffineEquation, k: np.ndarray, lo: np.ndarray, hi: np.ndarray, flo: np.ndarray, deriv: bool):
    """Vectorised bisection of the value (or derivative) on brackets ``[lo, hi]``."""
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    while True:
        width = hi - lo
        if not np.any(width > BISECT_TOL):
            break
        mid = 0.5 * (lo + hi)
        v, g = eq.at(mid[:, None], k)
        fm = g[:, 0] if deriv else v
        left = np.signbit(fm) == np.signbit(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _polish_1d(eq: AffineEquation, k: np.ndarray, t: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    for _ in range(3):
        v, g = eq.at(t[:, None], k)
        d = g[:, 0]
        step = np.where(d != 0, v / np.where(d == 0, 1.0, d), 0.0)
        cand = t - step
        t = np.where((cand >= lo - BISECT_TOL) & (cand <= hi + BISECT_TOL), cand, t)
    v, g = eq.at(t[:, None], k)
    return t, np.abs(g[:, 0])


def _solve_1d(domain: ChartDomain, eq: AffineEquation, N: int) -> FamilyRoots:
    lo_d, hi_d = domain.bounds[0]
    nodes = lo_d + (hi_d - lo_d) * np.arange(N + 1) / N
    h = (hi_d - lo_d) / N
    Phi = eq.phi(nodes[:, None])  # (N+1, d)
    dPhi = eq.dphi(nodes[:, None])[:, :, 0]
    K = eq.members
    mem_l, lo_l, hi_l, flo_l = [], [], [], []
    ext_k, ext_lo, ext_hi, ext_dlo = [], [], [], []
    for start in range(0, K, _CHUNK_1D):
        ks = np.arange(start, min(K, start + _CHUNK_1D))
        F = Phi @ eq.coeffs[ks].T - eq.offsets[ks]  # (N+1, k)
        s = F >= 0
        change = s[:-1] != s[1:]
        j, c = np.nonzero(change)
        mem_l.append(ks[c])
        lo_l.append(nodes[j])
        hi_l.append(nodes[j + 1])
        flo_l.append(F[j, c])
        # interior extremum that may dip across zero without a sign change at the nodes
        D = dPhi @ eq.coeffs[ks].T
        ds = D >= 0
        dchange = ds[:-1] != ds[1:]
        dchange &= ~change
        j, c = np.nonzero(dchange)
        reach = np.maximum(np.abs(D[j, c]), np.abs(D[j + 1, c])) * h * _LIPSCHITZ_SAFETY
        near = np.minimum(np.abs(F[j, c]), np.abs(F[j + 1, c])) <= reach
        j, c = j[near], c[near]
        ext_k.append(ks[c])
        ext_lo.append(nodes[j])
        ext_hi.append(nodes[j + 1])
        ext_dlo.append(D[j, c])
    k = np.concatenate(mem_l).astype(int)
    lo = np.concatenate(lo_l)
    hi = np.concatenate(hi_l)
    flo = np.concatenate(flo_l)

    ek = np.concatenate(ext_k).astype(int)
    if ek.size:
        elo, ehi, edlo = np.concatenate(ext_lo), np.concatenate(ext_hi), np.concatenate(ext_dlo)
        tc = _bisect(eq, ek, elo, ehi, edlo, deriv=True)
        fc, _ = eq.at(tc[:, None], ek)
        fl, _ = eq.at(elo[:, None], ek)
        crosses = np.signbit(fc) != np.signbit(fl)
        if crosses.any():
            ek, elo, ehi, tc, fl, fc = ek[crosses], elo[crosses], ehi[crosses], tc[crosses], fl[crosses], fc[crosses]
            k = np.concatenate([k, ek, ek])
            lo = np.concatenate([lo, elo, tc])
            hi = np.concatenate([hi, tc, ehi])
            flo = np.concatenate([flo, fl, fc])

    if k.size:
        t = _bisect(eq, k, lo, hi, flo, deriv=False)
        t, sv = _polish_1d(eq, k, t, lo, hi)
    else:
        t = np.zeros(0)
        sv = np.zeros(0)
    order = np.lexsort((t, k))
    k, t, sv = k[order], t[order], sv[order]
    if domain.periodic and k.size:
        t = np.mod(t - lo_d, hi_d - lo_d) + lo_d
    k, t, sv = _dedup_sorted_1d(k, t, sv, domain)
    return _collect(K, k, t[:, None], sv, 0)


def _dedup_sorted_1d(k, t, sv, domain):
    if k.size < 2:
        return k, t, sv
    order = np.lexsort((t, k))
    k, t, sv = k[order], t[order], sv[order]
    keep = np.ones(len(k), dtype=bool)
    keep[1:] = ~((k[1:] == k[:-1]) & (np.abs(t[1:] - t[:-1]) < DEDUP_TOL))
    if domain.periodic:
        # first and last root of a member may coincide across the seam
        period = domain.bounds[0][1] - domain.bounds[0][0]
        starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
        ends = np.r_[starts[1:], len(k)] - 1
        seam = (ends > starts) & (np.abs(t[starts] + period - t[ends]) < DEDUP_TOL)
        keep[ends[seam]] = False
    return k[keep], t[keep], sv[keep]


def _collect(K: int, k: np.ndarray, pts: np.ndarray, sv: np.ndarray, warnings: int) -> FamilyRoots:
    counts = np.bincount(k, minlength=K).astype(int)
    min_sv = np.full(K, np.inf)
    if k.size:
        np.minimum.at(min_sv, k, sv)
    return FamilyRoots(counts, min_sv, k, pts, sv, warnings)


# --- n = 2 -------------------------------------------------------------------


def _newton_2d(eqs, k, x0, lo, hi, step_cap):
    """Step-limited Newton; returns (point, converged mask, smallest singular value)."""
    x = x0.copy()
    active = np.ones(len(x), dtype=bool)
    converged = np.zeros(len(x), dtype=bool)
    for _ in range(_NEWTON_ITERS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        ki = k[idx]
        v1, g1 = eqs[0].at(xi, ki)
        v2, g2 = eqs[1].at(xi, ki)
        det = g1[:, 0] * g2[:, 1] - g1[:, 1] * g2[:, 0]
        bad = np.abs(det) < 1e-300
        safe = np.where(bad, 1.0, det)
        dx0 = (v1 * g2[:, 1] - v2 * g1[:, 1]) / safe
        dx1 = (g1[:, 0] * v2 - g2[:, 0] * v1) / safe
        step = np.column_stack([dx0, dx1])
        norm = np.hypot(dx0, dx1)
        cap = np.where(norm > step_cap, step_cap / np.where(norm == 0, 1.0, norm), 1.0)
        xi = xi - step * cap[:, None]
        x[idx] = xi
        res = np.maximum(np.abs(v1), np.abs(v2))
        done = (norm < 1e-13 * (1.0 + np.abs(xi).max(axis=1))) | ((res < 1e-14) & (norm < 1e-10))
        # wandered far from the starting cell: give up
        far = np.any(xi < lo[idx] - 2 * step_cap, axis=1) | np.any(xi > hi[idx] + 2 * step_cap, axis=1)
        converged[idx[done & ~bad]] = True
        active[idx[done | bad | far]] = False
    v1, g1 = eqs[0].at(x, k)
    v2, g2 = eqs[1].at(x, k)
    ok = converged & (np.abs(v1) <= RESIDUAL_TOL) & (np.abs(v2) <= RESIDUAL_TOL)
    Jm = np.stack([g1, g2], axis=1)
    sv = np.linalg.svd(Jm, compute_uv=False)[:, -1] if len(Jm) else np.zeros(0)
    return x, ok, sv


def _canonical(domain: ChartDomain, x: np.ndarray) -> np.ndarray:
    if domain.periodic:
        lo = domain.lower
        return np.mod(x - lo, domain.upper - lo) + lo
    return x


def _solve_2d(domain: ChartDomain, eqs: Sequence[AffineEquation], res) -> FamilyRoots:
    N1, N2 = res
    lo_d, hi_d = domain.lower, domain.upper
    h = (hi_d - lo_d) / np.array([N1, N2])
    ax1 = lo_d[0] + h[0] * np.arange(N1 + 1)
    ax2 = lo_d[1] + h[1] * np.arange(N2 + 1)
    nodes = np.stack(np.meshgrid(ax1, ax2, indexing="ij"), axis=-1).reshape(-1, 2)
    half_diag = 0.5 * float(np.hypot(*h))
    K = eqs[0].members
    B = next(b for b in (8, 4, 2, 1) if N1 % b == 0 and N2 % b == 0)
    M1, M2 = N1 // B, N2 // B
    Phis, lips = [], []
    for e in eqs:
        Phis.append(e.phi(nodes).reshape(N1 + 1, N2 + 1, -1))
        # |grad(c . phi)| <= |c| * sigma_max(Dphi): a member-independent Lipschitz bound per cell
        smax = np.linalg.norm(e.dphi(nodes), ord=2, axis=(1, 2)).reshape(N1 + 1, N2 + 1)
        lips.append(np.maximum(np.maximum(smax[:-1, :-1], smax[1:, :-1]), np.maximum(smax[:-1, 1:], smax[1:, 1:])))
    coarse_lips = [lip.reshape(M1, B, M2, B).max(axis=(1, 3)) for lip in lips]
    cnorms = [np.linalg.norm(e.coeffs, axis=1) for e in eqs]
    patch = np.arange(B + 1)

    def screen(F, lip, cn, hd):
        lo_c = np.minimum(np.minimum(F[..., :-1, :-1, :], F[..., 1:, :-1, :]), np.minimum(F[..., :-1, 1:, :], F[..., 1:, 1:, :]))
        hi_c = np.maximum(np.maximum(F[..., :-1, :-1, :], F[..., 1:, :-1, :]), np.maximum(F[..., :-1, 1:, :], F[..., 1:, 1:, :]))
        margin = (_LIPSCHITZ_SAFETY * hd) * lip * cn
        return (lo_c <= margin) & (hi_c >= -margin)

    cand_k, cand_c = [], []
    for start in range(0, K, _CHUNK_2D):
        ks = np.arange(start, min(K, start + _CHUNK_2D))
        mask = None
        for e, Phi, clip, cn in zip(eqs, Phis, coarse_lips, cnorms):
            F = Phi[::B, ::B] @ e.coeffs[ks].T - e.offsets[ks]  # (M1+1, M2+1, k)
            ok = screen(F, clip[:, :, None], cn[ks], B * half_diag)
            mask = ok if mask is None else mask & ok
        I1, I2, c = np.nonzero(mask)
        if I1.size == 0:
            continue
        kk = ks[c]
        rows = (I1 * B)[:, None] + patch  # (C, B+1)
        cols = (I2 * B)[:, None] + patch
        fine = None
        for e, Phi, lip, cn in zip(eqs, Phis, lips, cnorms):
            sub = Phi[rows[:, :, None], cols[:, None, :]]  # (C, B+1, B+1, d)
            F = np.einsum("cabd,cd->cab", sub, e.coeffs[kk]) - e.offsets[kk][:, None, None]
            sub_lip = lip[rows[:, :-1, None], cols[:, None, :-1]]  # (C, B, B)
            ok = screen(F[..., None], sub_lip[..., None], cn[kk][:, None, None, None], half_diag)[..., 0]
            fine = ok if fine is None else fine & ok
        ci, a1, a2 = np.nonzero(fine)
        cand_k.append(kk[ci])
        cand_c.append(np.column_stack([I1[ci] * B + a1, I2[ci] * B + a2]))
    k = np.concatenate(cand_k).astype(int) if cand_k else np.zeros(0, dtype=int)
    cells = np.concatenate(cand_c).reshape(-1, 2) if cand_c else np.zeros((0, 2), dtype=int)

    found_k, found_x, found_sv = [], [], []
    warnings = 0
    if k.size:
        lo = lo_d + cells * h
        x, ok, sv = _newton_2d(eqs, k, lo + 0.5 * h, lo, lo + h, 2 * half_diag)
        found_k.append(k[ok])
        found_x.append(x[ok])
        found_sv.append(sv[ok])

        # second chance for diverged runs: split the cell in four
        rk, rc = k[~ok], cells[~ok]
        if rk.size:
            offs = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
            k4 = np.repeat(rk, 4)
            c4 = np.repeat(rc, 4, axis=0)
            lo4 = lo_d + c4 * h
            x0 = lo4 + np.tile(offs, (len(rk), 1)) * h
            x, ok4, sv4 = _newton_2d(eqs, k4, x0, lo4, lo4 + h, half_diag)
            found_k.append(k4[ok4])
            found_x.append(x[ok4])
            found_sv.append(sv4[ok4])
            resolved = ok4.reshape(-1, 4).any(axis=1)
            warnings = int(np.count_nonzero(~resolved & _strong_evidence(domain, eqs, rk, rc, h)))
    if found_k:
        k = np.concatenate(found_k)
        x = _canonical(domain, np.concatenate(found_x))
        sv = np.concatenate(found_sv)
        inside = np.all((x >= lo_d) & (x <= hi_d), axis=1)
        k, x, sv = k[inside], x[inside], sv[inside]
        # exact repeats of one root collapse on a coarse key; near-key-boundary pairs go to _dedup_2d
        key = np.floor((x - lo_d) / (10 * DEDUP_TOL)).astype(np.int64)
        _, first = np.unique(np.column_stack([k, key]), axis=0, return_index=True)
        first = np.sort(first)
        k, x, sv = _dedup_2d(k[first], x[first], sv[first], domain)
    else:
        k, x, sv = np.zeros(0, dtype=int), np.zeros((0, 2)), np.zeros(0)
    if warnings:
        log.debug("%d inconclusive cells after subdivision", warnings)
    return _collect(K, k, x, sv, warnings)


def _strong_evidence(domain, eqs, k, cells, h) -> np.ndarray:
    """Both equations change sign over the cell corners."""
    lo = domain.lower + cells * h
    out = np.ones(len(k), dtype=bool)
    for e in eqs:
        vals = np.stack([e.at(lo + np.array(o) * h, k)[0] for o in ((0, 0), (1, 0), (0, 1), (1, 1))])
        out &= (vals.min(axis=0) < 0) & (vals.max(axis=0) > 0)
    return out


def _dedup_2d(k, x, sv, domain):
    """Drop roots of the same member closer than ``DEDUP_TOL`` (torus metric where periodic)."""
    if k.size < 2:
        return k, x, sv
    order = np.lexsort((x[:, 1], x[:, 0], k))
    k, x, sv = k[order], x[order], sv[order]
    keep = np.ones(len(k), dtype=bool)
    period = domain.upper - domain.lower
    same = k[1:] == k[:-1]
    close = same & (np.abs(x[1:, 0] - x[:-1, 0]) < DEDUP_TOL)
    suspects = set(k[1:][close].tolist())
    if domain.periodic:
        # the seam: a member's first and last roots along x0 may be neighbours
        starts = np.flatnonzero(np.r_[True, ~same])
        ends = np.r_[starts[1:], len(k)] - 1
        wrap = (ends > starts) & (x[starts, 0] + period[0] - x[ends, 0] < DEDUP_TOL)
        suspects.update(k[starts[wrap]].tolist())
    for member in sorted(suspects):
        idx = np.flatnonzero(k == member)
        for pos, i in enumerate(idx[1:], start=1):
            prev = idx[:pos][keep[idx[:pos]]]
            d = np.abs(x[prev] - x[i])
            if domain.periodic:
                d = np.minimum(d, period - d)
            if np.any(np.max(d, axis=1) < DEDUP_TOL):
                keep[i] = False
    return k[keep], x[keep], sv[keep]
