"""Average number of solutions of ``f_1 - a_1 = ... = f_n - a_n = 0`` computed three ways.

Each ``f_i - a_i`` is a random affine hyperplane in the dual of ``V_i``, drawn
from the invariant measure of :mod:`normdens.crofton`, independently over
``i``.  The three routes are

* ``mc``: weighted mean of root counts over random hyperplane tuples;
* ``density``: ``2^-n int_X D_1(E_1) ... D_1(E_n)``, the ring product being
  evaluated as ``n! d_n`` with a Gaussian Monte Carlo mixed-volume kernel;
* ``mixedvol``: ``n!/2^n`` times the mixed symplectic volume of the Finsler
  ellipsoids, by default with the closed-form mixed-volume kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._common import Estimate, InputError, count_mc, uniform_sphere
from .crofton import hyperplane_weight
from .finsler import FunctionSpace, _common_domain, field_stack, integrate, mixed_symplectic_volume
from .density import d_m_stack
from .mixed_volume import MixedVolumeConfig
from .roots import MIN_RESOLUTION, SING_TOL, AffineEquation, solve_family

DEFAULT_MARGIN = 0.01


@dataclass
class BkkExperiment:
    spaces: Sequence[FunctionSpace]
    trials: int
    seed: int
    grid: int | Sequence[int] = 64
    resolution: int | Sequence[int] = 128
    ranges: Sequence[float] | None = None
    margin: float = DEFAULT_MARGIN
    density_config: MixedVolumeConfig | None = None
    mixedvol_config: MixedVolumeConfig | None = None

    def __post_init__(self):
        self.spaces = list(self.spaces)
        self.domain = _common_domain(self.spaces)
        if self.domain.dim not in (1, 2):
            raise InputError("experiments support n = 1 and n = 2 only")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.margin < DEFAULT_MARGIN:
            raise InputError(f"range margin must be >= {DEFAULT_MARGIN}")
        res = [self.resolution] * self.n if np.isscalar(self.resolution) else list(self.resolution)
        if min(res) < MIN_RESOLUTION:
            raise InputError(f"root resolution must be >= {MIN_RESOLUTION}")
        if self.ranges is None:
            self.ranges = offset_ranges(self.spaces, self.margin)
        else:
            self.ranges = [float(r) for r in self.ranges]
            if len(self.ranges) != self.n or any(r <= 0 for r in self.ranges):
                raise InputError("need one positive offset range per space")
        if self.density_config is None:
            self.density_config = MixedVolumeConfig("gaussian_mc", trials=4000, seed=self.seed)
        if self.mixedvol_config is None:
            self.mixedvol_config = MixedVolumeConfig("auto", seed=self.seed)

    @property
    def n(self) -> int:
        return self.domain.dim


def offset_ranges(spaces: Sequence[FunctionSpace], margin: float = DEFAULT_MARGIN, nodes: int | None = None) -> list[float]:
    """``(1 + margin) * max |theta_i(x)|`` over a dense grid, one per space."""
    dom = spaces[0].domain
    nodes = nodes or (2048 if dom.dim == 1 else 256)
    pts, _ = dom.quadrature([nodes] * dom.dim)
    out = []
    for s in spaces:
        sup = float(np.linalg.norm(s.values(pts), axis=1).max())
        out.append((1.0 + margin) * sup if sup > 0 else 1.0)
    return out


@dataclass
class BkkReport:
    mc_average: float
    mc_std_error: float
    density_average: float
    mixed_volume_average: float
    trials: int
    redraws: int
    seed: int
    ranges: list[float] = field(default_factory=list)

    @property
    def gaps(self) -> dict[str, float]:
        """Pairwise relative gaps (relative to the larger magnitude of each pair)."""
        vals = {"mc": self.mc_average, "density": self.density_average, "mixedvol": self.mixed_volume_average}
        out = {}
        for a, b in (("mc", "density"), ("mc", "mixedvol"), ("density", "mixedvol")):
            ref = max(abs(vals[a]), abs(vals[b]))
            out[f"{a}/{b}"] = abs(vals[a] - vals[b]) / ref if ref > 0 else 0.0
        return out

    def to_dict(self) -> dict:
        return {
            "mc_average": self.mc_average,
            "mc_std_error": self.mc_std_error,
            "density_average": self.density_average,
            "mixed_volume_average": self.mixed_volume_average,
            "gaps": self.gaps,
            "trials": self.trials,
            "redraws": self.redraws,
            "seed": self.seed,
            "ranges": list(self.ranges),
        }


def average_zeros_mc(exp: BkkExperiment) -> Estimate:
    """Weighted mean root count over independent random hyperplanes ``(u_i, a_i)``."""
    dims = [s.d for s in exp.spaces]
    weight = math.prod(hyperplane_weight(d, R) for d, R in zip(dims, exp.ranges))

    def draw(rng, size):
        out = []
        for d, R in zip(dims, exp.ranges):
            u = uniform_sphere(rng, size, d)
            a = rng.uniform(-R, R, size)
            out.append((u, a))
        return out

    def evaluate(batch):
        eqs = [AffineEquation(s.values, s.gradients, u, a) for s, (u, a) in zip(exp.spaces, batch)]
        res = solve_family(exp.domain, eqs, exp.resolution)
        return res.counts.astype(float), res.transversal(SING_TOL)

    est = count_mc(exp.seed, exp.trials, draw, evaluate)
    return Estimate(weight * est.value, weight * est.std_error, est.samples, est.redraws)


def product_d1_field(exp: BkkExperiment, pts: np.ndarray) -> np.ndarray:
    """``D_1(E_1) ... D_1(E_n)`` on the standard frame at each point."""
    Qs = field_stack(exp.spaces, pts)
    if exp.n == 1:
        # a single factor: the product is d_1 itself, 2 h(e_1)
        return 2.0 * np.sqrt(np.clip(Qs[:, 0, 0, 0], 0.0, None))
    return math.factorial(exp.n) * d_m_stack(Qs, None, exp.density_config)


def average_zeros_density(exp: BkkExperiment) -> float:
    pts, w = exp.domain.quadrature(exp.grid)
    return integrate(product_d1_field(exp, pts), w) / 2**exp.n


def average_zeros_mixedvol(exp: BkkExperiment) -> float:
    msv = mixed_symplectic_volume(exp.spaces, exp.grid, exp.mixedvol_config)
    return math.factorial(exp.n) / 2**exp.n * msv


def run_experiment(exp: BkkExperiment) -> BkkReport:
    """All three averages from one seed."""
    mc = average_zeros_mc(exp)
    return BkkReport(
        mc.value,
        mc.std_error,
        average_zeros_density(exp),
        average_zeros_mixedvol(exp),
        exp.trials,
        mc.redraws,
        exp.seed,
        list(exp.ranges),
    )
