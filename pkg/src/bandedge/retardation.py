"""Delay-coupled pair of emitters sharing a one-dimensional guided mode.

A single initial excitation on dot 1 exchanges amplitude with dot 2 through
a channel with propagation delay ``tau_d = r / v`` and round-trip phase
``theta``.  The symmetric/antisymmetric channel amplitudes have closed-form
Laplace images with a pure-delay feedback factor; in the time domain the
solution is a finite piecewise sum in which the m-th echo switches on at
``t = m tau_d``.

The current-noise spectrum of a junction that re-arms only after the pair
has fully relaxed is obtained from the survival probability
``n(t) = |b1|^2 + |b2|^2``: its numerical Laplace transform defines an
effective relaxation kernel ``A2(s) = 1/n~(s) - s`` that enters the same
cycle algebra as the single-dot spectrum.

Delay feedback with unit-modulus coupling makes the survival decay slowly
(the characteristic roots form a ladder hugging the imaginary axis), so the
fine-grid horizon is chosen from the slowest characteristic root and capped;
configurations whose survival cannot reach the decay floor within the cap
raise ``TransformError``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, GridError, TransformError, TruncationError
from .noise import (JunctionRates, NoiseResult, _b_factor, _detect_jumps,
                    _fano_closed_zero)
from .numerics.laplace import TimeGrid

__all__ = [
    "TwoDotConfig",
    "RetardedAmplitudes",
    "LaplaceAmplitudes",
    "retarded_amplitudes_series",
    "retarded_amplitudes_laplace",
    "retarded_noise_spectrum",
]

# phase at or above which the delay description is considered valid
_REGIME_THETA = 3.0
# survival must fall below this by the end of the fine grid
_DECAY_FLOOR = 1e-8
# fine-grid horizon cap and point-count cap for the noise transform
_HORIZON_CAP = 25_000.0
_POINT_CAP = 16_000_000
# dropped series terms are below exp(-_WINDOW_LOG_TOL) in magnitude
_WINDOW_LOG_TOL = 60.0


def _positive_finite(value, name: str) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TwoDotConfig:
    """Geometry and coupling of the delay-coupled pair.

    gamma_0 is the amplitude decay constant of a single dot into the
    shared channel; populations in the decoupled limit decay at 2*gamma_0.
    theta is the propagation phase accumulated over the separation r.
    """

    gamma_0: float
    r: float
    v: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "gamma_0",
                           _positive_finite(self.gamma_0, "gamma_0"))
        object.__setattr__(self, "r", _positive_finite(self.r, "r"))
        object.__setattr__(self, "v", _positive_finite(self.v, "v"))
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise DomainError("theta must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def tau_d(self) -> float:
        """Propagation delay between the dots."""
        return self.r / self.v

    @property
    def retarded_regime(self) -> bool:
        """True when the phase is large enough for the delay picture."""
        return self.theta >= _REGIME_THETA


@dataclass(frozen=True)
class RetardedAmplitudes:
    """Amplitudes of the two dots on a uniform time grid.

    b1 carries the even echoes (initially excited dot), b2 the odd ones;
    b2 vanishes identically before one delay has elapsed.
    """

    grid: TimeGrid
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        if not isinstance(self.grid, TimeGrid):
            raise DomainError("grid must be a TimeGrid")
        b1 = np.ascontiguousarray(self.b1, dtype=complex)
        b2 = np.ascontiguousarray(self.b2, dtype=complex)
        if b1.shape != (self.grid.count,) or b2.shape != (self.grid.count,):
            raise GridError("amplitude arrays must match the grid length")
        if not (np.all(np.isfinite(b1.real)) and np.all(np.isfinite(b1.imag))
                and np.all(np.isfinite(b2.real))
                and np.all(np.isfinite(b2.imag))):
            raise DomainError("amplitudes must be finite")
        if abs(b1[0] - 1.0) > 1e-9 or abs(b2[0]) > 1e-9:
            raise DomainError("initial condition must be b1(0)=1, b2(0)=0")
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)
        if self.survival.max() > 1.0 + 1e-9:
            raise DomainError("survival probability exceeds one")

    @cached_property
    def survival(self) -> np.ndarray:
        """Total excited-state population |b1|^2 + |b2|^2."""
        return np.abs(self.b1) ** 2 + np.abs(self.b2) ** 2


class LaplaceAmplitudes(NamedTuple):
    """Closed-form Laplace images of the pair amplitudes."""

    c_plus: complex
    c_minus: complex
    b1: complex
    b2: complex


def retarded_amplitudes_series(config: TwoDotConfig, grid: TimeGrid,
                               m_max: int) -> RetardedAmplitudes:
    """Evaluate the echo series for b1 (even m) and b2 (odd m).

    The m-th echo is (1/m!) (i e^{i theta})^m [g0 (t - m tau)]^m
    e^{-g0 (t - m tau)} for t >= m tau and zero before.  Terms are evaluated
    in log space inside the window where they are non-negligible, so the
    sum is exact to machine precision on any horizon.  Echo m never touches
    t < m tau, and with m_max >= ceil(t_max / tau) the truncated series is
    the exact solution; otherwise a tail-bound check guards the result.
    """
    if not isinstance(config, TwoDotConfig):
        raise DomainError("config must be a TwoDotConfig")
    if not isinstance(grid, TimeGrid):
        raise DomainError("grid must be a TimeGrid")
    if not isinstance(m_max, (int, np.integer)) or isinstance(m_max, bool):
        raise DomainError("m_max must be an integer")
    if m_max < 0:
        raise DomainError("m_max must be non-negative")

    gamma, tau, theta = config.gamma_0, config.tau_d, config.theta
    t = grid.times
    dt, count = grid.dt, grid.count
    b1 = np.zeros(count, dtype=complex)
    b2 = np.zeros(count, dtype=complex)
    tail_peak = 0.0
    for m in range(m_max + 1):
        half_width = 11.0 * math.sqrt(m + 1.0) + 50.0
        x_lo = max(0.0, m - half_width)
        x_hi = m + half_width
        j0 = max(0, int(math.floor((m * tau + x_lo / gamma) / dt)))
        j1 = min(count, int(math.ceil((m * tau + x_hi / gamma) / dt)) + 1)
        if j0 >= count:
            break
        if j0 >= j1:
            continue
        x = gamma * (t[j0:j1] - m * tau)
        live = x > 0.0
        term = np.zeros(j1 - j0, dtype=complex)
        if m == 0:
            term[live] = np.exp(-x[live])
            # t = 0 belongs to the m = 0 echo with unit weight
            term[x == 0.0] = 1.0
        elif live.any():
            xl = x[live]
            log_mag = m * np.log(xl) - xl - gammaln(m + 1.0)
            term[live] = np.exp(log_mag + 1j * m * (theta + 0.5 * math.pi))
        if m == m_max:
            tail_peak = float(np.abs(term).max()) if term.size else 0.0
        if m % 2 == 0:
            b1[j0:j1] += term
        else:
            b2[j0:j1] += term

    scale = float((np.abs(b1) + np.abs(b2)).max())
    if tail_peak > 1e-12 * scale:
        raise TruncationError(
            f"m_max={m_max} too small: last echo still contributes "
            f"{tail_peak:.3e} against a partial sum of scale {scale:.3e}")
    return RetardedAmplitudes(grid=grid, b1=b1, b2=b2)


def retarded_amplitudes_laplace(config: TwoDotConfig,
                                s: complex) -> LaplaceAmplitudes:
    """Closed-form Laplace images C+-, b1~, b2~ at a point with Re s > 0.

    The symmetric/antisymmetric channels see the delayed feedback with
    opposite sign; their geometric expansion reproduces the echo series
    term by term.
    """
    if not isinstance(config, TwoDotConfig):
        raise DomainError("config must be a TwoDotConfig")
    sc = complex(s)
    if not (math.isfinite(sc.real) and math.isfinite(sc.imag)):
        raise DomainError("s must be finite")
    if sc.real <= 0.0:
        raise DomainError("Laplace images require Re s > 0")
    gamma, tau, theta = config.gamma_0, config.tau_d, config.theta
    # Re(-s tau) < 0, so the delay factor never overflows
    feedback = 1j * gamma * np.exp(1j * theta) * np.exp(-sc * tau)
    c_plus = 1.0 / (sc + gamma - feedback)
    c_minus = 1.0 / (sc + gamma + feedback)
    return LaplaceAmplitudes(c_plus=c_plus, c_minus=c_minus,
                             b1=0.5 * (c_plus + c_minus),
                             b2=0.5 * (c_plus - c_minus))


def _characteristic_roots(config: TwoDotConfig) -> list[complex]:
    """Roots of s + g0 -+ i g0 e^{i theta} e^{-s tau} nearest the axis.

    Newton iteration seeded on the imaginary-axis ladder (spacing 2 pi/tau)
    and at the zero-delay pole positions.  Only roots govern decay; the
    slowest one sets the fine-grid horizon.
    """
    gamma, tau, theta = config.gamma_0, config.tau_d, config.theta
    if gamma * tau > 200.0:
        # feedback arrives long after the excitation is gone
        return [complex(-gamma, 0.0)]
    roots: list[complex] = []
    y_span = 3.0 * gamma + 2.0 * math.pi / tau
    for sign in (+1.0, -1.0):
        coeff = sign * 1j * gamma * np.exp(1j * theta)
        offset = theta + sign * 0.5 * math.pi
        k_span = int(math.ceil(y_span * tau / (2.0 * math.pi))) + 1
        guesses = [1j * (offset + 2.0 * math.pi * k) / tau
                   for k in range(-k_span, k_span + 1)]
        guesses.append(-gamma * (1.0 - sign * 1j * np.exp(1j * theta)))
        for s in guesses:
            ok = False
            for _ in range(60):
                arg = -s * tau
                if arg.real > 500.0:
                    break
                delayed = coeff * np.exp(arg)
                f = s + gamma - delayed
                fp = 1.0 + tau * delayed
                if fp == 0.0:
                    break
                step = f / fp
                s = s - step
                if abs(step) <= 1e-13 * max(gamma, abs(s)):
                    ok = True
                    break
            if not ok or abs(s.imag) > y_span + gamma:
                continue
            if any(abs(s - r) < 1e-9 * gamma for r in roots):
                continue
            roots.append(complex(s))
    return roots


def _slowest_rate(config: TwoDotConfig) -> float:
    roots = _characteristic_roots(config)
    if not roots:
        return config.gamma_0
    return min(-r.real for r in roots)


def _uniform_laplace_samples(weighted: np.ndarray, dt: float,
                             omegas: np.ndarray) -> np.ndarray:
    """sum_j weighted[j] e^{-i w j dt} for every w, via one real matmul.

    The sample index is split as j = p*k + q; the inner phases over q are
    shared by all blocks, so the sum reduces to a (blocks x k) matrix times
    cos/sin phase columns followed by a short chirp combination over p.
    """
    n = weighted.size
    block = 8192
    if n <= 2 * block:
        t = dt * np.arange(n)
        return np.asarray([np.dot(weighted, np.exp(-1j * w * t))
                           for w in omegas])
    p = -(-n // block)
    padded = np.zeros(p * block)
    padded[:n] = weighted
    mat = padded.reshape(p, block)
    q_args = np.outer(omegas, dt * np.arange(block))
    phases = np.empty((block, 2 * omegas.size))
    phases[:, 0::2] = np.cos(q_args).T
    phases[:, 1::2] = np.sin(q_args).T
    partial = mat @ phases
    chirp = np.exp(-1j * np.outer(omegas, dt * block * np.arange(p)))
    out = np.empty(omegas.size, dtype=complex)
    for i in range(omegas.size):
        out[i] = np.dot(chirp[i], partial[:, 2 * i] - 1j * partial[:, 2 * i + 1])
    return out


class _SurvivalTransform:
    """Numerical Laplace transform of the survival on the imaginary axis."""

    def __init__(self, config: TwoDotConfig, omega_max: float,
                 x_min: float | None = None):
        gamma, tau = config.gamma_0, config.tau_d
        if x_min is None:
            x_min = _slowest_rate(config)
        self.x_min = x_min
        if x_min <= 0.0:
            horizon = math.inf
        else:
            decay_span = -math.log(_DECAY_FLOOR) / (2.0 * x_min)
            # a few echo intervals of margin, unless echoes never arrive
            horizon = decay_span + 3.0 * min(tau, decay_span) + 10.0 / gamma
        if horizon > _HORIZON_CAP / gamma:
            raise TransformError(
                "survival cannot decay below "
                f"{_DECAY_FLOOR:g} within a feasible fine-grid horizon "
                f"(slowest characteristic rate {x_min:.3e})")
        slow = gamma * horizon > 400.0
        tol = (1e-6 if slow else 1e-8) * 0.5 / gamma
        scale4 = (2.0 * gamma + max(omega_max, 2.0 * gamma)) ** 4
        dt_target = (180.0 * tol / (horizon * scale4)) ** 0.25
        dt_target = min(dt_target, tau / 16.0, 0.02 / gamma)
        dt_target = max(dt_target, horizon / _POINT_CAP)
        # panels must not straddle the echo switch-on points
        k_half = max(8, int(math.ceil(tau / (2.0 * dt_target))))
        dt = tau / (2.0 * k_half)
        self.config = config
        self.dt = dt
        self._k_half = k_half
        self._build(horizon)

    def _build(self, horizon: float) -> None:
        config, dt = self.config, self.dt
        gamma, tau = config.gamma_0, config.tau_d
        for attempt in range(2):
            count = 2 * int(math.ceil(horizon / (2.0 * dt))) + 1
            grid = TimeGrid(dt=dt, count=count)
            m_max = int(math.ceil(grid.t_max / tau)) + 1
            amps = retarded_amplitudes_series(config, grid, m_max)
            survival = amps.survival
            del amps
            tail_len = min(2 * self._k_half, max(count // 20, 2))
            tail_env = float(survival[-tail_len:].max())
            if tail_env <= _DECAY_FLOOR:
                break
            horizon *= 1.6
            if attempt == 1 or count > _POINT_CAP:
                raise TransformError(
                    "survival has not decayed below "
                    f"{_DECAY_FLOOR:g} by the end of the fine grid "
                    f"(t_max={grid.t_max:.1f}, tail={tail_env:.3e})")
        weights = np.full(count, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        self._weighted = weights * (dt / 3.0) * survival
        self._t_end = grid.t_max
        self._n_end = float(survival[-1])
        # exponential tail estimate from the last stretch of the grid
        j_back = count - 1 - tail_len
        self._tail_rate = 0.0
        if self._n_end > 0.0 and survival[j_back] > self._n_end:
            rate = (math.log(survival[j_back] / self._n_end)
                    / (tail_len * dt))
            if 0.0 < rate <= 10.0 * gamma:
                self._tail_rate = rate

    def __call__(self, omegas: np.ndarray) -> np.ndarray:
        omegas = np.asarray(omegas, dtype=float)
        vals = _uniform_laplace_samples(self._weighted, self.dt, omegas)
        if self._tail_rate > 0.0:
            s = 1j * omegas
            vals = vals + self._n_end * np.exp(-s * self._t_end) / (
                s + self._tail_rate)
        return vals


def retarded_noise_spectrum(config: TwoDotConfig, rates: JunctionRates,
                            omega_grid: np.ndarray) -> NoiseResult:
    """Noise spectrum of a junction whose radiative stage is the pair decay.

    The survival probability is evaluated once on a fine echo-aligned grid,
    its Laplace transform n~(i w) defines the effective kernel
    A2(i w) = 1/n~(i w) - i w, and the cycle algebra of the single-dot
    spectrum is evaluated with that kernel.  Negative frequencies mirror
    positive ones exactly; the w = 0 value is the removable limit.
    """
    if not isinstance(config, TwoDotConfig):
        raise DomainError("config must be a TwoDotConfig")
    if not isinstance(rates, JunctionRates):
        raise DomainError("rates must be a JunctionRates")
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise GridError("omega grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(grid)):
        raise GridError("omega grid must be finite")
    if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
        raise GridError("omega grid must be strictly increasing")

    gamma = config.gamma_0
    mags = np.unique(np.abs(grid))
    positive = mags[mags > 0.0]
    omega_max = float(mags[-1]) if mags.size else 0.0
    x_min = _slowest_rate(config)
    transform = _SurvivalTransform(config, omega_max, x_min)

    # slope of the kernel at the origin for the removable w = 0 limit;
    # the transform structure lives on the slowest characteristic rate
    h = 1e-2 * min(gamma, x_min) if x_min > 0.0 else 1e-2 * gamma
    probe = np.concatenate(([0.0, h, 2.0 * h], positive))
    n_vals = transform(probe)
    if np.any(np.abs(n_vals) < 1e-300):
        raise DomainError("survival transform vanished on the grid")
    kernel = 1.0 / n_vals - 1j * probe

    values = {}
    if 0.0 in mags:
        a0 = kernel[0].real
        a1 = (8.0 * kernel[1].imag - kernel[2].imag) / (6.0 * h)
        values[0.0] = _fano_closed_zero(rates, a0, a1)
    for w, a_val in zip(positive, kernel[3:]):
        values[w] = 1.0 + 2.0 * rates.Gamma_R * _b_factor(
            rates, complex(a_val), w).real
    fano = np.asarray([values[abs(w)] for w in grid])
    return NoiseResult(omega_grid=grid, fano=fano,
                       jumps=_detect_jumps(grid, fano))
