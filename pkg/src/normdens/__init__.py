"""Mixed-volume densities of ellipsoids, Crofton-type estimators and average root counts of random systems."""

from ._common import Estimate, InputError, set_max_workers
from .bkk import BkkExperiment, BkkReport, average_zeros_density, average_zeros_mc, average_zeros_mixedvol, run_experiment
from .convex import CenteredEllipsoid, Frame, minkowski_sum, project, support
from .crofton import (
    CurveModel,
    HyperplaneSample,
    ProductCroftonReport,
    curve_from_json,
    euclid_crofton_length,
    product_crofton_check,
    sample_hyperplane,
    sphere_crofton_length,
)
from .density import DensityValue, d1, d_m, product_d1, vol1_factor
from .finsler import (
    ChartDomain,
    FunctionSpace,
    finsler_ellipsoid,
    load_spaces,
    mixed_symplectic_volume,
    symplectic_volume,
    theta,
)
from .mixed_volume import MixedVolumeConfig, MixedVolumeEstimate, mixed_volume, mixed_volume_mc, mixed_volume_oracle
from .report import ExperimentReport
from .roots import RootSet, ScalarSystem, count_roots

__version__ = "0.1.0"

__all__ = [
    "BkkExperiment",
    "BkkReport",
    "CenteredEllipsoid",
    "ChartDomain",
    "CurveModel",
    "DensityValue",
    "Estimate",
    "ExperimentReport",
    "Frame",
    "FunctionSpace",
    "HyperplaneSample",
    "InputError",
    "MixedVolumeConfig",
    "MixedVolumeEstimate",
    "ProductCroftonReport",
    "RootSet",
    "ScalarSystem",
    "average_zeros_density",
    "average_zeros_mc",
    "average_zeros_mixedvol",
    "count_roots",
    "curve_from_json",
    "d1",
    "d_m",
    "euclid_crofton_length",
    "finsler_ellipsoid",
    "load_spaces",
    "minkowski_sum",
    "mixed_symplectic_volume",
    "mixed_volume",
    "mixed_volume_mc",
    "mixed_volume_oracle",
    "product_crofton_check",
    "product_d1",
    "project",
    "run_experiment",
    "sample_hyperplane",
    "set_max_workers",
    "sphere_crofton_length",
    "support",
    "symplectic_volume",
    "theta",
    "vol1_factor",
]
