"""Laplace inversion of complex-valued signals.

Every reference here is a closed-form transform pair, so the checks are
independent of both numerical backends.
"""

import numpy as np
import pytest

from bandedge.errors import OscillationDetectedError
from bandedge.numerics import InversionSettings, TimeGrid, invert_laplace

METHODS = ["series-acceleration", "deformed-contour"]


@pytest.fixture(scope="module")
def grid() -> TimeGrid:
    return TimeGrid(dt=10.0 / 2000, count=2001)


def _away_from_origin(grid: TimeGrid) -> np.ndarray:
    return grid.times >= 0.05


def test_default_method_simple_pole_relative_accuracy(grid):
    # e^{-t} spans five decades on [0, 10]; relative accuracy must hold
    # down the tail, not just near t = 0
    f = invert_laplace(lambda s: 1.0 / (s + 1.0), grid, InversionSettings())
    ref = np.exp(-grid.times)
    m = _away_from_origin(grid)
    assert np.max(np.abs(f - ref)[m] / ref[m]) < 1e-6


def test_default_method_complex_pole(grid):
    f = invert_laplace(lambda s: 1.0 / (s + 1.0 - 2.0j), grid,
                       InversionSettings())
    ref = np.exp(-(1.0 - 2.0j) * grid.times)
    m = _away_from_origin(grid)
    assert np.max(np.abs(f - ref)[m] / np.abs(ref)[m]) < 1e-6


def test_default_method_oscillatory_signal(grid):
    f = invert_laplace(lambda s: 1.0 / (s * s + 1.0), grid,
                       InversionSettings())
    ref = np.sin(grid.times)
    m = _away_from_origin(grid)
    assert np.max(np.abs(f - ref)[m]) < 1e-6


def test_default_method_sqrt_branch_point_at_origin(grid):
    f = invert_laplace(lambda s: 1.0 / np.sqrt(s), grid, InversionSettings())
    t = grid.times
    m = _away_from_origin(grid)
    ref = 1.0 / np.sqrt(np.pi * t[m])
    assert np.max(np.abs(f[m] - ref) / ref) < 1e-6


@pytest.mark.parametrize("method", METHODS)
def test_both_methods_agree_with_exact_decay(method, grid):
    st = InversionSettings(method=method)
    f = invert_laplace(lambda s: 1.0 / (s + 1.0), grid, st)
    assert np.max(np.abs(f - np.exp(-grid.times))) < 1e-6


def test_initial_value_recovered_at_t_zero():
    grid = TimeGrid(dt=0.01, count=11)
    phase = np.exp(-1j * np.pi / 4)
    f = invert_laplace(lambda s: 1.0 / (s + phase / np.sqrt(s)), grid,
                       InversionSettings())
    assert abs(f[0] - 1.0) < 1e-6


def test_contour_method_signals_imaginary_axis_branch_points(grid):
    # 1/sqrt(s^2+1) has branch points at +-i; the deformed contour wraps
    # into the cut at large t and the node-doubling check must fire
    # rather than return garbage
    st = InversionSettings(method="deformed-contour")
    with pytest.raises(OscillationDetectedError):
        invert_laplace(lambda s: 1.0 / np.sqrt(s * s + 1.0), grid, st)


def test_series_method_handles_imaginary_axis_branch_points(grid):
    # same transform; the reference is J_0(t)
    from scipy.special import j0
    f = invert_laplace(lambda s: 1.0 / np.sqrt(s * s + 1.0), grid,
                       InversionSettings(method="series-acceleration"))
    assert np.max(np.abs(f - j0(grid.times))) < 1e-6


def test_settings_validation():
    with pytest.raises(ValueError):
        InversionSettings(contour_shift=0.0)
    with pytest.raises(ValueError):
        InversionSettings(node_count=8)
    with pytest.raises(ValueError):
        InversionSettings(method="stationary-phase")


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(dt=0.0, count=100)
    with pytest.raises(ValueError):
        TimeGrid(dt=0.1, count=1)


def test_grid_properties():
    g = TimeGrid(dt=0.25, count=5)
    assert g.t0 == 0.0
    assert g.t_max == 1.0
    assert np.array_equal(g.times, [0.0, 0.25, 0.5, 0.75, 1.0])


def test_scalar_and_array_evaluators_give_identical_results(grid):
    scalar = invert_laplace(lambda s: 1.0 / (s + 2.0), grid,
                            InversionSettings())
    array = invert_laplace(
        lambda s: 1.0 / (np.asarray(s) + 2.0), grid, InversionSettings())
    assert np.array_equal(scalar, array)
