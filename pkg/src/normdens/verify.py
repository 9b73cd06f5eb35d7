"""Acceptance criteria and property checks, runnable as a suite.

Two profiles share the same tolerance rules and differ only in trial counts
and grid sizes: ``full`` uses the stated counts, ``quick`` runs in about a
minute.  Every check is seeded from a single base seed, so a run is
reproducible as a whole.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._common import get_max_workers, set_max_workers
from .bkk import BkkExperiment, average_zeros_mc, run_experiment
from .convex import CenteredEllipsoid, Frame, project, support, unit_ball_volume
from .crofton import (
    circle,
    euclid_crofton_length,
    great_circle,
    product_crofton_check,
    rotation_matrix,
    segment,
    small_circle,
    sphere_crofton_length,
)
from .density import d1, d_m, embedded_factor_ball, product_d1
from .finsler import (
    ChartDomain,
    check_gradients,
    circle_space,
    clifford_space,
    decoupled_torus_spaces,
    finsler_matrices,
    mixed_symplectic_volume,
    symplectic_volume,
    trig_space,
)
from .mixed_volume import MixedVolumeConfig, mixed_volume, mixed_volume_mc, mixed_volume_oracle
from .roots import RESIDUAL_TOL, SING_TOL, AffineEquation, solve_family

DEFAULT_SEED = 20240601

PROFILES = {
    "full": dict(
        mv_trials=1_000_000, mv_pair_trials=100_000, pd_cases=50, pd_trials=400_000,
        crofton_trials=100_000, product_trials=100_000, product_grid=128,
        bkk1_trials=100_000, bkk2_trials=30_000, bkk_grid=64, bkk_density_trials=4000,
        se_trials=(1000, 10_000, 100_000), root_draws=200,
    ),
    "quick": dict(
        mv_trials=100_000, mv_pair_trials=20_000, pd_cases=10, pd_trials=200_000,
        crofton_trials=10_000, product_trials=10_000, product_grid=64,
        bkk1_trials=10_000, bkk2_trials=2048, bkk_grid=32, bkk_density_trials=1000,
        se_trials=(1000, 10_000), root_draws=40,
    ),
}

# wall-clock budgets per criterion, seconds
BUDGETS = {1: 30.0, 2: 10.0, 3: 60.0, 4: 60.0, 5: 90.0, 6: 60.0, 7: 300.0, 8: 600.0}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    runtime_s: float = 0.0
    budget_s: float | None = None
    value: float = float("nan")
    std_error: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        budget = f" (budget {self.budget_s:g}s)" if self.budget_s else ""
        return f"[{status}] {self.name}: {self.detail} [{self.runtime_s:.1f}s{budget}]"


def within(value: float, target: float, se: float = 0.0, n_se: float = 3.0, rel: float = 0.0, abs_tol: float = 1e-12) -> bool:
    return abs(value - target) <= n_se * se + rel * abs(target) + abs_tol


def random_psd(rng: np.random.Generator, m: int, rank: int | None = None) -> np.ndarray:
    A = rng.standard_normal((m, rank or m))
    return A @ A.T


def _ellipsoids(Qs):
    return [CenteredEllipsoid(q) for q in Qs]


# --- acceptance criteria -------------------------------------------------------


def criterion_mixed_volume(p: dict, seed: int) -> tuple[bool, str, float, float]:
    notes, ok = [], True
    B2, B3 = CenteredEllipsoid.ball(2), CenteredEllipsoid.ball(3)
    e = mixed_volume_mc([B2, B2], p["mv_trials"], seed)
    ok &= (good := within(e.value, math.pi, e.std_error))
    notes.append(f"V(B,B)={e.value:.6g}+-{e.std_error:.2g}{'' if good else ' !'}")
    e3 = mixed_volume_mc([B3, B3, B3], p["mv_trials"], seed + 1)
    ok &= (good := within(e3.value, 4 * math.pi / 3, e3.std_error))
    notes.append(f"V(B,B,B)={e3.value:.6g}+-{e3.std_error:.2g}{'' if good else ' !'}")
    seg = _ellipsoids([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    es = mixed_volume_mc(seg, p["mv_trials"], seed + 2)
    ok &= (good := within(es.value, 2.0, rel=0.005))
    notes.append(f"segments={es.value:.6g}{'' if good else ' !'}")
    rng = np.random.default_rng(seed + 3)
    bad = 0
    for i in range(20):
        bodies = _ellipsoids([random_psd(rng, 2), random_psd(rng, 2)])
        mc = mixed_volume_mc(bodies, p["mv_pair_trials"], seed + 100 + i)
        orc = mixed_volume_oracle(bodies, 720)
        bad += not within(mc.value, orc.value, mc.std_error, rel=0.01)
    ok &= bad == 0
    notes.append(f"random pairs {20 - bad}/20")
    return ok, "; ".join(notes), e.value, e.std_error


def criterion_product_rule(p: dict, seed: int) -> tuple[bool, str, float, float]:
    rng = np.random.default_rng(seed)
    cfg_seed = seed
    worst, bad = 0.0, 0
    for case in range(p["pd_cases"]):
        m = int(rng.integers(2, 4))
        dims = [int(x) for x in rng.integers(1, 4, size=m)]
        total = sum(dims)
        bodies, vecs, expected = [], [], 1.0
        start = 0
        for i, di in enumerate(dims):
            Q = np.zeros((total, total))
            Q[start : start + di, start : start + di] = random_psd(rng, di)
            xi = np.zeros(total)
            xi[start : start + di] = rng.standard_normal(di)
            A = CenteredEllipsoid(Q)
            bodies.append(A)
            vecs.append(xi)
            expected *= d1(A, xi).value
            start += di
        cfg = MixedVolumeConfig("gaussian_mc", trials=p["pd_trials"], seed=cfg_seed + case)
        got = product_d1(bodies, Frame(vecs), cfg).value
        gap = abs(got - expected) / expected
        worst = max(worst, gap)
        bad += gap > 0.01
    return bad == 0, f"{p['pd_cases'] - bad}/{p['pd_cases']} cases within 1%, worst gap {worst:.3%}", worst, 0.0


def criterion_euclid_crofton(p: dict, seed: int) -> tuple[bool, str, float, float]:
    n = p["crofton_trials"]
    s = euclid_crofton_length(segment([0, 0], [1, 0]), n, 2.0, seed)
    c = euclid_crofton_length(circle(1.0), n, 1.5, seed + 1)
    c2 = euclid_crofton_length(circle(1.0), n, 3.0, seed + 2)
    ok_s = within(s.value, 1.0, s.std_error)
    ok_c = within(c.value, 2 * math.pi, c.std_error)
    ok_r = within(c.value, c2.value, math.hypot(c.std_error, c2.std_error))
    detail = (
        f"segment={s.value:.6g}+-{s.std_error:.2g}; circle={c.value:.6g}+-{c.std_error:.2g}; "
        f"R=3 circle={c2.value:.6g}+-{c2.std_error:.2g}"
    )
    return ok_s and ok_c and ok_r, detail, c.value, c.std_error


def criterion_sphere_crofton(p: dict, seed: int) -> tuple[bool, str, float, float]:
    n = p["crofton_trials"]
    g = sphere_crofton_length(great_circle(), n, seed)
    sc = sphere_crofton_length(small_circle(math.pi / 6), n, seed + 1)
    ok = within(g.value, 2 * math.pi, abs_tol=1e-9) and within(sc.value, math.pi, sc.std_error)
    detail = f"great={g.value:.12g} (redraws {g.redraws}); small(pi/6)={sc.value:.6g}+-{sc.std_error:.2g}"
    return ok, detail, sc.value, sc.std_error


def criterion_product_crofton(p: dict, seed: int) -> tuple[bool, str, float, float]:
    n, grid = p["product_trials"], p["product_grid"]
    gg = product_crofton_check(great_circle(), great_circle((1.0, 0.0, 0.0)), n, seed, grid)
    gs = product_crofton_check(great_circle(), small_circle(math.pi / 6), n, seed + 1, grid)
    ok = (
        within(gg.mc_estimate, 4.0, gg.mc_std_error, abs_tol=1e-9)
        and within(gg.density_integral, 4.0, rel=0.01)
        and within(gs.mc_estimate, 2.0, gs.mc_std_error)
        and within(gs.density_integral, 2.0, rel=0.01)
        and gg.agrees()
        and gs.agrees()
    )
    detail = (
        f"great x great mc={gg.mc_estimate:.6g} density={gg.density_integral:.6g}; "
        f"great x small mc={gs.mc_estimate:.6g}+-{gs.mc_std_error:.2g} density={gs.density_integral:.6g}"
    )
    return ok, detail, gs.mc_estimate, gs.mc_std_error


def _bkk(spaces, p, trials, seed):
    cfg = MixedVolumeConfig("gaussian_mc", trials=p["bkk_density_trials"], seed=seed)
    return run_experiment(BkkExperiment(spaces, trials, seed, grid=p["bkk_grid"], density_config=cfg))


def _bkk_detail(r) -> str:
    return (
        f"mc={r.mc_average:.6g}+-{r.mc_std_error:.2g} density={r.density_average:.6g} "
        f"mixedvol={r.mixed_volume_average:.6g}"
    )


def criterion_bkk_circle(p: dict, seed: int) -> tuple[bool, str, float, float]:
    r = _bkk([circle_space()], p, p["bkk1_trials"], seed)
    t = 2 * math.pi
    ok = (
        within(r.mc_average, t, r.mc_std_error)
        and within(r.density_average, t, rel=1e-3)
        and within(r.mixed_volume_average, t, rel=1e-3)
    )
    return ok, _bkk_detail(r), r.mc_average, r.mc_std_error


def criterion_bkk_decoupled(p: dict, seed: int) -> tuple[bool, str, float, float]:
    r = _bkk(decoupled_torus_spaces(), p, p["bkk2_trials"], seed)
    t = 4 * math.pi**2
    ok = (
        within(r.mc_average, t, r.mc_std_error)
        and within(r.density_average, t, rel=0.01)
        and within(r.mixed_volume_average, t, rel=0.01)
    )
    return ok, _bkk_detail(r), r.mc_average, r.mc_std_error


def criterion_bkk_coupled(p: dict, seed: int) -> tuple[bool, str, float, float]:
    V = clifford_space()
    r = _bkk([V, V], p, p["bkk2_trials"], seed)
    se = r.mc_std_error
    ok = (
        within(r.mc_average, r.density_average, se, rel=0.02)
        and within(r.mc_average, r.mixed_volume_average, se, rel=0.02)
        and within(r.density_average, r.mixed_volume_average, rel=0.02)
    )
    return ok, _bkk_detail(r), r.mc_average, se


# --- property checks -----------------------------------------------------------

PropertyFn = Callable[[dict, int], tuple[bool, str]]


def prop_support_homogeneity(p, seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        E = CenteredEllipsoid(random_psd(rng, 3, int(rng.integers(1, 4))))
        xi, t = rng.standard_normal(3), float(rng.normal(scale=3.0))
        worst = max(worst, abs(support(E, t * xi) - abs(t) * support(E, xi)))
    return worst < 1e-10, f"max deviation {worst:.2g}"


def prop_support_subadditive(p, seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        E = CenteredEllipsoid(random_psd(rng, 3))
        xi, eta = rng.standard_normal(3), rng.standard_normal(3)
        if support(E, xi + eta) > support(E, xi) + support(E, eta) + 1e-12:
            return False, "violated"
    return True, "100 triples"


def prop_projection(p, seed):
    rng = np.random.default_rng(seed)
    worst_idem, worst_eig = 0.0, 0.0
    for _ in range(30):
        E = CenteredEllipsoid(random_psd(rng, 4, int(rng.integers(1, 5))))
        F = Frame(rng.standard_normal((2, 4)))
        P = project(E, F)
        PP = project(P, Frame.standard(2))
        worst_idem = max(worst_idem, float(np.abs(PP.Q - P.Q).max()))
        M = F.matrix.T @ E.Q @ F.matrix
        worst_eig = min(worst_eig, float(np.linalg.eigvalsh(M).min() / max(1.0, np.abs(M).max())))
    return worst_idem < 1e-12 and worst_eig >= -1e-9, f"idempotence {worst_idem:.2g}, min eigenvalue {worst_eig:.2g}"


def prop_mv_symmetry(p, seed):
    rng = np.random.default_rng(seed)
    bodies = _ellipsoids([random_psd(rng, 2) for _ in range(2)])
    a = mixed_volume_oracle(bodies, 720).value
    b = mixed_volume_oracle(bodies[::-1], 720).value
    m1 = mixed_volume_mc(bodies, p["mv_pair_trials"], seed)
    m2 = mixed_volume_mc(bodies[::-1], p["mv_pair_trials"], seed + 1)
    ok = abs(a - b) <= 1e-9 * a and within(m1.value, m2.value, math.hypot(m1.std_error, m2.std_error))
    return ok, f"oracle {a:.8g}/{b:.8g}, mc {m1.value:.6g}/{m2.value:.6g}"


def prop_mv_scaling(p, seed):
    rng = np.random.default_rng(seed)
    Q1, Q2 = random_psd(rng, 2), random_psd(rng, 2)
    lam = 1.7
    base = mixed_volume_oracle(_ellipsoids([Q1, Q2]), 720).value
    scaled = mixed_volume_oracle(_ellipsoids([lam**2 * Q1, Q2]), 720).value
    m0 = mixed_volume_mc(_ellipsoids([Q1, Q2]), 20_000, seed)
    m1 = mixed_volume_mc(_ellipsoids([lam**2 * Q1, Q2]), 20_000, seed)
    ok = abs(scaled - lam * base) <= 1e-9 * scaled and abs(m1.value - lam * m0.value) <= 1e-9 * m1.value
    return ok, f"oracle ratio {scaled / base:.10g}, mc ratio {m1.value / m0.value:.10g}"


def prop_mv_monotone(p, seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        Q1, Q2, D = random_psd(rng, 2), random_psd(rng, 2), random_psd(rng, 2, 1)
        small = mixed_volume_oracle(_ellipsoids([Q1, Q2]), 720).value
        big = mixed_volume_oracle(_ellipsoids([Q1 + D, Q2]), 720).value
        if big < small - 1e-9 * big:
            return False, f"{big} < {small}"
    return True, "10 enlargements"


def prop_mv_diagonal(p, seed):
    rng = np.random.default_rng(seed)
    bad = []
    for m in (2, 3):
        Q = random_psd(rng, m)
        est = mixed_volume_mc([CenteredEllipsoid(Q)] * m, p["mv_pair_trials"], seed + m)
        exact = unit_ball_volume(m) * math.sqrt(np.linalg.det(Q))
        if not within(est.value, exact, est.std_error):
            bad.append(m)
    return not bad, "ok" if not bad else f"failed for m={bad}"


def prop_density_homogeneity(p, seed):
    rng = np.random.default_rng(seed)
    bodies = _ellipsoids([random_psd(rng, 3) for _ in range(2)])
    F = rng.standard_normal((2, 3))
    t = -2.5
    cfg = MixedVolumeConfig("closed_form")
    a = d_m(bodies, Frame(F), cfg).value
    G = F.copy()
    G[0] *= t
    b = d_m(bodies, Frame(G), cfg).value
    return abs(b - abs(t) * a) <= 1e-9 * b, f"ratio {b / a:.10g}"


def prop_density_degenerate(p, seed):
    rng = np.random.default_rng(seed)
    bodies = _ellipsoids([random_psd(rng, 3) for _ in range(2)])
    v = rng.standard_normal(3)
    vals = [
        d_m(bodies, Frame([v, 2 * v]), cfg).value
        for cfg in (MixedVolumeConfig("closed_form"), MixedVolumeConfig("gaussian_mc", trials=1000))
    ]
    return all(x == 0.0 for x in vals), f"values {vals}"


def prop_density_symmetry(p, seed):
    rng = np.random.default_rng(seed)
    bodies = _ellipsoids([random_psd(rng, 3) for _ in range(2)])
    F = Frame(rng.standard_normal((2, 3)))
    cfg = MixedVolumeConfig("closed_form")
    a, b = d_m(bodies, F, cfg).value, d_m(bodies[::-1], F, cfg).value
    return abs(a - b) <= 1e-9 * a, f"{a:.10g} vs {b:.10g}"


def prop_density_basis_invariance(p, seed):
    rng = np.random.default_rng(seed)
    bodies = _ellipsoids([random_psd(rng, 3) for _ in range(2)])
    F = rng.standard_normal((2, 3))
    U = np.array([[2.0, 1.0], [3.0, 2.0]])  # det 1
    cfg = MixedVolumeConfig("closed_form")
    a, b = d_m(bodies, Frame(F), cfg).value, d_m(bodies, Frame(U @ F), cfg).value
    return abs(a - b) <= 1e-8 * a, f"{a:.10g} vs {b:.10g}"


def prop_direct_summand(p, seed):
    # ring product of factor-supported bodies on a split frame is the product of d_1 values
    B1, B2 = embedded_factor_ball([2, 2], 0), embedded_factor_ball([2, 2], 1)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(2), rng.standard_normal(2)
    F = Frame([np.r_[u, 0, 0], np.r_[0, 0, v]])
    got = product_d1([B1, B2], F, MixedVolumeConfig("closed_form")).value
    want = 4 * np.linalg.norm(u) * np.linalg.norm(v)
    return abs(got - want) <= 1e-9 * want, f"{got:.10g} vs {want:.10g}"


def prop_finsler_translation(p, seed):
    V = clifford_space()
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 2 * np.pi, (50, 2))
    Q = finsler_matrices(V, X)
    const = float(np.abs(Q - Q[0]).max())
    s = rng.uniform(0, 2 * np.pi, 2)
    a = symplectic_volume(V, 32)
    b = symplectic_volume(V.shifted(s), 32)
    return const < 1e-12 and abs(a - b) <= 1e-10 * a, f"Q spread {const:.2g}, volumes {a:.10g}/{b:.10g}"


def prop_finsler_scaling(p, seed):
    V = clifford_space()
    a = symplectic_volume(V, 32)
    b = symplectic_volume(V.scaled(1.5), 32)
    return abs(b - 1.5**2 * a) <= 1e-10 * b, f"ratio {b / a:.10g}"


def prop_finsler_quadrature(p, seed):
    dom = ChartDomain.torus(2)
    V = trig_space(dom, [((1, 0), "cos"), ((1, 0), "sin"), ((1, 1), "cos"), ((1, 1), "sin")])
    gaps = []
    for fn in (lambda g: symplectic_volume(V, g), lambda g: mixed_symplectic_volume([V, clifford_space(dom)], g, MixedVolumeConfig("closed_form"))):
        a, b = fn(16), fn(32)
        gaps.append(abs(a - b) / abs(b))
    return max(gaps) < 1e-3, f"relative changes {[f'{g:.2g}' for g in gaps]}"


def prop_finsler_gradients(p, seed):
    rng = np.random.default_rng(seed)
    dom = ChartDomain.torus(2)
    V = trig_space(dom, [((2, 1), "cos"), ((1, -3), "sin"), ((0, 1), "cos")])
    err = check_gradients(V, rng.uniform(0, 2 * np.pi, (40, 2)))
    return err < 1e-6, f"max relative error {err:.2g}"


def prop_finsler_equal_spaces(p, seed):
    V = clifford_space()
    a = mixed_symplectic_volume([V, V], 32, MixedVolumeConfig("closed_form"))
    b = symplectic_volume(V, 32)
    return abs(a - b) <= 1e-9 * b, f"{a:.10g} vs {b:.10g}"


def prop_finsler_lift(p, seed):
    V = decoupled_torus_spaces()[0]
    Q = finsler_matrices(V, np.random.default_rng(seed).uniform(0, 2 * np.pi, (20, 2)))
    dev = float(np.abs(Q - np.diag([1.0, 0.0])).max())
    return dev < 1e-12, f"deviation {dev:.2g}"


def _random_trig_family(rng, size, V):
    eqs = []
    for _ in range(2):
        u = rng.standard_normal((size, V.d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        eqs.append(AffineEquation(V.values, V.gradients, u, rng.uniform(-1.2, 1.2, size)))
    return eqs


def prop_roots_translation(p, seed):
    rng = np.random.default_rng(seed)
    V = clifford_space()
    s = rng.uniform(0, 2 * np.pi, 2)
    Vs = V.shifted(s)
    eqs = _random_trig_family(rng, p["root_draws"], V)
    shifted = [AffineEquation(Vs.values, Vs.gradients, e.coeffs, e.offsets) for e in eqs]
    a = solve_family(V.domain, eqs, 128)
    b = solve_family(V.domain, shifted, 128)
    ok = a.transversal(10 * SING_TOL) & b.transversal(10 * SING_TOL)
    same = bool(np.array_equal(a.counts[ok], b.counts[ok]))
    # roots of the shifted system are the originals moved by -s
    moved = np.mod(b.points + s, 2 * np.pi)
    match = True
    for k in np.flatnonzero(ok)[:20]:
        pa = a.points[a.members == k]
        pb = moved[b.members == k]
        d = np.abs(pa[:, None, :] - pb[None, :, :])
        d = np.minimum(d, 2 * np.pi - d).max(axis=2)
        match &= bool(d.size == 0 or d.min(axis=1).max() < 1e-7)
    return same and match, f"{int(ok.sum())} transversal draws, counts equal {same}, roots match {match}"


def prop_roots_resolution(p, seed):
    rng = np.random.default_rng(seed)
    V = clifford_space()
    eqs = _random_trig_family(rng, p["root_draws"], V)
    a = solve_family(V.domain, eqs, 64)
    b = solve_family(V.domain, eqs, 128)
    ok = a.transversal(10 * SING_TOL) & b.transversal(10 * SING_TOL)
    diff = int(np.count_nonzero(a.counts[ok] != b.counts[ok]))
    return diff == 0, f"{diff} of {int(ok.sum())} counts changed"


def prop_roots_residual(p, seed):
    rng = np.random.default_rng(seed)
    V = clifford_space()
    eqs = _random_trig_family(rng, p["root_draws"], V)
    r = solve_family(V.domain, eqs, 128)
    worst = max(float(np.abs(e.at(r.points, r.members)[0]).max(initial=0.0)) for e in eqs)
    return worst <= RESIDUAL_TOL, f"max residual {worst:.2g}"


def prop_crofton_rotation(p, seed):
    n = p["crofton_trials"]
    R = rotation_matrix([1.0, 2.0, 0.5], 0.7)
    curve = small_circle(math.pi / 5)
    a = sphere_crofton_length(curve, n, seed)
    b = sphere_crofton_length(curve.rotated(R), n, seed + 1)
    c = euclid_crofton_length(circle(1.0, space="R3"), n, 1.5, seed + 2)
    d = euclid_crofton_length(circle(1.0, space="R3").rotated(R), n, 1.5, seed + 3)
    ok = within(a.value, b.value, math.hypot(a.std_error, b.std_error)) and within(
        c.value, d.value, math.hypot(c.std_error, d.std_error)
    )
    return ok, f"sphere {a.value:.5g}/{b.value:.5g}, R3 {c.value:.5g}/{d.value:.5g}"


def prop_crofton_se_scaling(p, seed):
    counts = p["se_trials"]
    ses = [euclid_crofton_length(circle(1.0), n, 1.5, seed + i).std_error for i, n in enumerate(counts)]
    ratios = [ses[i] / ses[i + 1] / math.sqrt(counts[i + 1] / counts[i]) for i in range(len(ses) - 1)]
    return all(1 / 1.5 <= r <= 1.5 for r in ratios), f"normalised ratios {[f'{r:.3g}' for r in ratios]}"


def prop_bkk_scale(p, seed):
    n = p["bkk1_trials"] // 4
    a = run_experiment(BkkExperiment([circle_space()], n, seed))
    b = run_experiment(BkkExperiment([circle_space(2.0)], n, seed))
    ratios = [b.mc_average / a.mc_average, b.density_average / a.density_average, b.mixed_volume_average / a.mixed_volume_average]
    ok = all(abs(r - 2.0) < 1e-6 for r in ratios)
    return ok, f"ratios {[f'{r:.8g}' for r in ratios]}"


def prop_bkk_range(p, seed):
    n = p["bkk1_trials"] // 4
    exp = BkkExperiment([circle_space()], n, seed)
    a = average_zeros_mc(exp)
    b = average_zeros_mc(BkkExperiment([circle_space()], n, seed + 1, ranges=[2 * r for r in exp.ranges]))
    return within(a.value, b.value, math.hypot(a.std_error, b.std_error)), f"{a.value:.5g} vs {b.value:.5g}"


def prop_seed_determinism(p, seed):
    before = get_max_workers()
    try:
        out = []
        for workers in (1, 3):
            set_max_workers(workers)
            mv = mixed_volume_mc([CenteredEllipsoid.ball(2)] * 2, 3 * 4096 + 17, seed)
            cr = euclid_crofton_length(circle(1.0), 2 * 4096 + 5, 1.5, seed)
            bk = average_zeros_mc(BkkExperiment([circle_space()], 2 * 4096 + 3, seed))
            out.append((mv.value, mv.std_error, cr.value, cr.std_error, bk.value, bk.std_error))
        again = mixed_volume(
            [CenteredEllipsoid.ball(2)] * 2, MixedVolumeConfig("gaussian_mc", trials=3 * 4096 + 17, seed=seed)
        )
    finally:
        set_max_workers(before)
    ok = out[0] == out[1] and again.value == out[0][0]
    return ok, "identical across worker counts" if ok else f"mismatch {out}"


PROPERTIES: dict[str, PropertyFn] = {
    "support homogeneity": prop_support_homogeneity,
    "support subadditivity": prop_support_subadditive,
    "projection idempotence and PSD": prop_projection,
    "mixed volume symmetry": prop_mv_symmetry,
    "mixed volume scaling": prop_mv_scaling,
    "mixed volume monotonicity": prop_mv_monotone,
    "mixed volume diagonal case": prop_mv_diagonal,
    "density frame homogeneity": prop_density_homogeneity,
    "density degeneracy to zero": prop_density_degenerate,
    "density symmetry": prop_density_symmetry,
    "density basis invariance": prop_density_basis_invariance,
    "direct-summand multiplicativity": prop_direct_summand,
    "Finsler translation invariance": prop_finsler_translation,
    "symplectic volume scaling": prop_finsler_scaling,
    "quadrature convergence": prop_finsler_quadrature,
    "gradient consistency": prop_finsler_gradients,
    "equal-space mixed volume": prop_finsler_equal_spaces,
    "lifted space ellipsoid": prop_finsler_lift,
    "root translation equivariance": prop_roots_translation,
    "root resolution stability": prop_roots_resolution,
    "root residuals": prop_roots_residual,
    "Crofton rotation invariance": prop_crofton_rotation,
    "Crofton std error scaling": prop_crofton_se_scaling,
    "BKK scale covariance": prop_bkk_scale,
    "BKK range invariance": prop_bkk_range,
    "seed determinism": prop_seed_determinism,
}


def run_properties(p: dict, seed: int) -> list[CheckResult]:
    out = []
    for i, (name, fn) in enumerate(PROPERTIES.items()):
        t0 = time.perf_counter()
        ok, detail = fn(p, seed + 1000 * i)
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out


def criterion_properties(p: dict, seed: int) -> tuple[bool, str, float, float]:
    res = run_properties(p, seed)
    failed = [r.name for r in res if not r.passed]
    detail = f"{len(res) - len(failed)}/{len(res)} properties hold"
    if failed:
        detail += "; failed: " + ", ".join(failed)
    return not failed, detail, float(len(res) - len(failed)), 0.0


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("mixed-volume kernel", criterion_mixed_volume),
    2: ("product rule on factor-supported bodies", criterion_product_rule),
    3: ("Euclidean Crofton", criterion_euclid_crofton),
    4: ("sphere Crofton", criterion_sphere_crofton),
    5: ("product Crofton", criterion_product_crofton),
    6: ("BKK n=1 circle", criterion_bkk_circle),
    7: ("BKK n=2 decoupled", criterion_bkk_decoupled),
    8: ("BKK n=2 coupled", criterion_bkk_coupled),
    9: ("property suites", criterion_properties),
}


def run_criterion(number: int, profile: str = "full", seed: int = DEFAULT_SEED) -> CheckResult:
    name, fn = CRITERIA[number]
    p = PROFILES[profile]
    t0 = time.perf_counter()
    ok, detail, value, se = fn(p, seed + 7919 * number)
    dt = time.perf_counter() - t0
    budget = BUDGETS.get(number)
    if budget is not None and dt > budget:
        ok = False
        detail += f"; over budget ({dt:.1f}s > {budget:g}s)"
    return CheckResult(f"criterion {number} ({name})", bool(ok), detail, dt, budget, value, se)


def run_verify(profile: str = "quick", seed: int = DEFAULT_SEED, only=None, echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    out = []
    for number in only or sorted(CRITERIA):
        res = run_criterion(number, profile, seed)
        if echo:
            echo(res.line())
        out.append(res)
    return out
