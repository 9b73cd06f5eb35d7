import math

import pytest

from normdens import InputError
from normdens.bkk import (
    BkkExperiment,
    average_zeros_density,
    average_zeros_mc,
    average_zeros_mixedvol,
    offset_ranges,
    run_experiment,
)
from normdens.finsler import ChartDomain, FunctionSpace, circle_space, clifford_space, decoupled_torus_spaces, monomial
from normdens.mixed_volume import MixedVolumeConfig


def test_offset_ranges_have_margin():
    assert offset_ranges([circle_space()]) == pytest.approx([1.01])
    assert offset_ranges([clifford_space()] * 2, 0.05) == pytest.approx([1.05 * math.sqrt(2)] * 2, rel=1e-6)


def test_circle_space_three_ways():
    exp = BkkExperiment([circle_space()], 20_000, 3)
    mc = average_zeros_mc(exp)
    assert abs(mc.value - 2 * math.pi) < 3 * mc.std_error
    assert average_zeros_density(exp) == pytest.approx(2 * math.pi, rel=1e-12)
    assert average_zeros_mixedvol(exp) == pytest.approx(2 * math.pi, rel=1e-12)


def test_constant_space_has_no_zeros():
    dom = ChartDomain.torus(1)
    const = FunctionSpace(dom, [monomial([0], 1 / math.sqrt(2 * math.pi))])
    exp = BkkExperiment([const], 2000, 4)
    assert average_zeros_mc(exp).value == 0.0
    assert average_zeros_density(exp) == 0.0
    assert average_zeros_mixedvol(exp) == 0.0


def test_decoupled_torus_density_and_mixedvol():
    exp = BkkExperiment(decoupled_torus_spaces(), 1, 5, grid=16, density_config=MixedVolumeConfig(trials=20_000, seed=5))
    assert average_zeros_density(exp) == pytest.approx(4 * math.pi**2, rel=0.01)
    assert average_zeros_mixedvol(exp) == pytest.approx(4 * math.pi**2, rel=1e-12)


def test_decoupled_torus_mc_small_run():
    exp = BkkExperiment(decoupled_torus_spaces(), 2048, 6)
    mc = average_zeros_mc(exp)
    assert abs(mc.value - 4 * math.pi**2) < 3 * mc.std_error


def test_report_fields_and_gaps():
    r = run_experiment(BkkExperiment([circle_space()], 4000, 7))
    d = r.to_dict()
    assert set(d) >= {"mc_average", "mc_std_error", "density_average", "mixed_volume_average", "gaps", "redraws", "seed"}
    assert set(r.gaps) == {"mc/density", "mc/mixedvol", "density/mixedvol"}
    assert r.gaps["density/mixedvol"] < 1e-12
    assert min(r.mc_average, r.density_average, r.mixed_volume_average) >= 0


def test_scale_covariance():
    a = run_experiment(BkkExperiment([circle_space()], 3000, 8))
    b = run_experiment(BkkExperiment([circle_space(3.0)], 3000, 8))
    assert b.mc_average == pytest.approx(3 * a.mc_average, rel=1e-9)
    assert b.density_average == pytest.approx(3 * a.density_average, rel=1e-9)
    assert b.mixed_volume_average == pytest.approx(3 * a.mixed_volume_average, rel=1e-9)


def test_range_invariance():
    exp = BkkExperiment([circle_space()], 20_000, 9)
    a = average_zeros_mc(exp)
    b = average_zeros_mc(BkkExperiment([circle_space()], 20_000, 10, ranges=[2 * r for r in exp.ranges]))
    assert abs(a.value - b.value) < 3 * math.hypot(a.std_error, b.std_error)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(trials=0),
        dict(margin=0.001),
        dict(resolution=32),
        dict(ranges=[-1.0]),
        dict(ranges=[1.0, 2.0]),
    ],
)
def test_experiment_validation(kwargs):
    base = dict(spaces=[circle_space()], trials=10, seed=0)
    base.update(kwargs)
    with pytest.raises(InputError):
        BkkExperiment(**base)


def test_spaces_must_match_dimension():
    with pytest.raises(InputError):
        BkkExperiment([clifford_space()], 10, 0)
