"""Linear Volterra integro-differential solver with weakly singular kernels.

Solves

    b'(t) = -linear_rate * b(t) - int_0^t K(t - t') b(t') dt',  b(0) = b0

on a uniform grid by product integration: b is piecewise linear, and the
kernel moments over each lag cell are integrated to quadrature precision.
The first lag cell is mapped through tau = u^2 so a tau^(-1/2) singularity
at tau = 0 is integrated exactly by Gauss nodes; later cells use plain
Gauss-Legendre. The time stepper is the trapezoidal rule, giving a scheme
second-order convergent in dt for both smooth and tau^(-1/2) kernels.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import StepSizeTooCoarseError
from .laplace import TimeGrid

_STEP_CHECK_TOL = 1e-4


def _kernel_vectorized(kernel) -> Callable[[np.ndarray], np.ndarray]:
    def call(tau: np.ndarray) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        try:
            out = np.asarray(kernel(tau), dtype=complex)
            if out.shape == tau.shape:
                return out
        except Exception:
            pass
        return np.array([kernel(x) for x in tau.ravel()],
                        dtype=complex).reshape(tau.shape)
    return call


def _lag_moments(K, h: float, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell moments mu0_m = int K, mu1_m = int (tau - t_m) K over
    [m*h, (m+1)*h], m = 0..n_cells-1."""
    mu0 = np.zeros(n_cells, dtype=complex)
    mu1 = np.zeros(n_cells, dtype=complex)
    # first cell: tau = u^2 regularizes an inverse-square-root endpoint
    xg, wg = leggauss(24)
    u = (xg + 1.0) * (np.sqrt(h) / 2.0)
    wu = wg * (np.sqrt(h) / 2.0)
    ku = K(u * u)
    mu0[0] = np.sum(wu * 2.0 * u * ku)
    mu1[0] = np.sum(wu * 2.0 * u ** 3 * ku)
    if n_cells > 1:
        xg, wg = leggauss(12)
        m = np.arange(1, n_cells)
        tau = m[:, None] * h + (xg[None, :] + 1.0) * (h / 2.0)
        kv = K(tau.ravel()).reshape(tau.shape)
        mu0[1:] = (kv @ wg) * (h / 2.0)
        mu1[1:] = ((kv * (tau - m[:, None] * h)) @ wg) * (h / 2.0)
    return mu0, mu1


def _solve_on(K, linear_rate: complex, h: float, count: int,
              b0: complex) -> np.ndarray:
    n_cells = count - 1
    if n_cells == 0:
        return np.array([b0], dtype=complex)
    mu0, mu1 = _lag_moments(K, h, n_cells)
    w1 = mu1 / h                 # weight of the older endpoint of each cell
    w0 = mu0 - w1                # weight of the newer endpoint
    b = np.zeros(count, dtype=complex)
    integ = np.zeros(count, dtype=complex)   # I_n, memory integral at t_n
    b[0] = b0
    lam = complex(linear_rate)
    denom = 1.0 / h + lam / 2.0 + w0[0] / 2.0
    for n in range(1, count):
        # memory term split as I_n = w0[0]*b_n + J_n with J_n known
        j_n = np.dot(w1[:n], b[n - 1:: -1] if n > 1 else b[:1])
        if n > 1:
            j_n += np.dot(w0[1: n], b[n - 1: 0: -1])
        rhs = b[n - 1] * (1.0 / h - lam / 2.0) - 0.5 * (j_n + integ[n - 1])
        b[n] = rhs / denom
        integ[n] = w0[0] * b[n] + j_n
    return b


def solve_volterra(linear_rate: complex, kernel, grid: TimeGrid,
                   b0: complex = 1.0 + 0.0j, *,
                   check_step: bool = True) -> np.ndarray:
    """Solve the memory-kernel amplitude equation on ``grid.times``.

    Parameters
    ----------
    linear_rate : complex
        Coefficient of the instantaneous decay term.
    kernel : callable
        Evaluator K(tau) for tau > 0; may behave like tau^(-1/2) near 0.
    grid : TimeGrid
    b0 : complex
        Initial amplitude.
    check_step : bool
        When True (default), re-solve at dt/2 and compare on the common
        grid; a sup-norm disagreement above 1e-4 raises
        :class:`StepSizeTooCoarseError`.

    Returns
    -------
    ndarray of complex, shape (grid.count,)
    """
    K = _kernel_vectorized(kernel)
    b = _solve_on(K, linear_rate, grid.dt, grid.count, b0)
    if check_step:
        fine = _solve_on(K, linear_rate, grid.dt / 2.0,
                         2 * grid.count - 1, b0)
        diff = float(np.max(np.abs(b - fine[:: 2])))
        if diff > _STEP_CHECK_TOL:
            raise StepSizeTooCoarseError(
                f"dt vs dt/2 disagreement {diff:.3g} > {_STEP_CHECK_TOL:g}; "
                f"reduce grid.dt")
    return b
