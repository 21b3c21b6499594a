"""Product-integration Volterra solver and its cross-method agreement
with Laplace inversion on the memory-kernel family both are built for.
"""

import numpy as np
import pytest

from bandedge.errors import StepSizeTooCoarseError
from bandedge.numerics import (InversionSettings, TimeGrid, invert_laplace,
                               solve_volterra)


def _constant_kernel_exact(lam: complex, k0: complex,
                           t: np.ndarray) -> np.ndarray:
    """Closed form of b' = -lam b - k0 int_0^t b, via b'' + lam b' + k0 b = 0."""
    disc = np.sqrt(lam * lam - 4.0 * k0 + 0j)
    rp, rm = (-lam + disc) / 2.0, (-lam - disc) / 2.0
    cp = (-lam - rm) / (rp - rm)
    cm = (rp + lam) / (rp - rm)
    return cp * np.exp(rp * t) + cm * np.exp(rm * t)


def test_zero_kernel_reduces_to_pure_exponential():
    grid = TimeGrid(dt=0.0025, count=2001)
    b = solve_volterra(0.8 + 0.0j, lambda tau: 0.0 * tau, grid)
    assert np.max(np.abs(b - np.exp(-0.8 * grid.times))) < 1e-6


def test_constant_kernel_matches_second_order_ode():
    lam, k0 = 0.3 + 0.1j, 0.5 - 0.2j
    grid = TimeGrid(dt=0.0025, count=2001)
    b = solve_volterra(lam, lambda tau: k0 * np.ones_like(tau + 0j), grid)
    assert np.max(np.abs(b - _constant_kernel_exact(lam, k0, grid.times))) < 1e-6


def test_halving_dt_reduces_constant_kernel_error_at_least_3_5x():
    lam, k0 = 0.3 + 0.1j, 0.5 - 0.2j
    errs = []
    for dt in (0.01, 0.005, 0.0025):
        g = TimeGrid(dt=dt, count=int(round(5.0 / dt)) + 1)
        b = solve_volterra(lam, lambda tau: k0 * np.ones_like(tau + 0j), g,
                           check_step=False)
        errs.append(np.max(np.abs(b - _constant_kernel_exact(lam, k0, g.times))))
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_initial_amplitude_is_exact():
    grid = TimeGrid(dt=0.01, count=3)
    b = solve_volterra(0.2, lambda tau: 1.0 / np.sqrt(np.pi * tau), grid,
                       check_step=False)
    assert b[0] == 1.0 + 0.0j


def test_too_coarse_step_is_signalled():
    # a strong singular kernel on a crude grid cannot pass the dt vs dt/2
    # comparison
    grid = TimeGrid(dt=0.5, count=21)
    with pytest.raises(StepSizeTooCoarseError):
        solve_volterra(0.0, lambda tau: 40.0 / np.sqrt(np.pi * tau), grid)


@pytest.mark.parametrize("delta,gamma", [
    (0.0, 0.0),
    (0.2, 0.1),
    (0.4, 0.1),
    (0.8, 0.1),
])
def test_cross_method_agreement_on_memory_kernel_family(delta, gamma):
    # the decisive mutual check: transform-domain inversion against the
    # independent time-domain product-integration solution, 1e-6 sup-norm
    # over the full window used by the decay studies
    phase = np.exp(-1j * np.pi / 4)

    def transform(z):
        return 1.0 / (z + gamma / 2.0 + phase / np.sqrt(z - 1j * delta))

    def kernel(tau):
        return phase * np.exp(1j * delta * tau) / np.sqrt(np.pi * tau)

    coarse = TimeGrid(dt=10.0 / 1000, count=1001)
    b_inv = invert_laplace(transform, coarse, InversionSettings())
    # singular-start amplitude converges like dt^{3/2}: resolve well past
    # the target before subsampling onto the comparison grid
    fine = TimeGrid(dt=10.0 / 64000, count=64001)
    b_vol = solve_volterra(gamma / 2.0, kernel, fine, check_step=False)
    assert np.max(np.abs(b_inv - b_vol[:: 64])) < 1e-6


def test_oscillatory_kernel_phase_convention():
    # conjugating the kernel and rate must conjugate the amplitude
    grid = TimeGrid(dt=0.005, count=801)
    k = lambda tau: np.exp(1j * np.pi / 4) * np.exp(0.3j * tau) / np.sqrt(np.pi * tau)
    kc = lambda tau: np.conj(k(tau))
    b = solve_volterra(0.05, k, grid, check_step=False)
    bc = solve_volterra(0.05, kc, grid, check_step=False)
    assert np.max(np.abs(bc - np.conj(b))) < 1e-12
