"""Golden-rule emission-rate profiles over traced mode branches.

The rate into a one-dimensional mode continuum is a sum of
weight / |d omega / d k_z| over the resonant wavevectors of every bound
branch, so the profile inherits inverse-square-root divergences at the
quadratic band edges. Absolute normalization is a free multiplier
carried by the coupling weight; the shape and the divergence locations
are the physics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .dispersion import ModeBranch, find_band_edges
from .errors import DomainError, GridError

COUPLING_MODES = ("uniform", "user_table")


@dataclass(frozen=True)
class CouplingModel:
    """Spectral weight attached to branch samples, in rate units.

    uniform applies one constant weight to every order and wavevector.
    user_table interpolates per-order (k_z, weight) tables with a
    shape-preserving cubic, which cannot overshoot the tabulated values,
    so a nonnegative table yields a nonnegative weight everywhere;
    queries beyond the tabulated span clamp to the end values.
    """

    mode: str = "uniform"
    strength: float = 1.0
    table: Mapping[int, tuple[Sequence[float], Sequence[float]]] | None = None

    def __post_init__(self):
        if self.mode not in COUPLING_MODES:
            raise DomainError(
                f"mode must be one of {COUPLING_MODES}, got {self.mode!r}")
        if self.mode == "uniform":
            if self.table is not None:
                raise DomainError("uniform coupling takes no table")
            if not (np.isfinite(self.strength) and self.strength >= 0):
                raise DomainError(
                    f"strength must be finite and nonnegative, got "
                    f"{self.strength}")
            object.__setattr__(self, "_interp", None)
            return
        if not self.table:
            raise DomainError("user_table coupling needs a non-empty table")
        interp = {}
        for n, (nodes, weights) in self.table.items():
            k = np.asarray(nodes, dtype=float)
            w = np.asarray(weights, dtype=float)
            if k.ndim != 1 or k.size < 2 or np.any(np.diff(k) <= 0):
                raise DomainError(
                    f"table nodes for n = {n} must be a strictly "
                    f"increasing 1-D sequence of length >= 2")
            if w.shape != k.shape or not np.all(np.isfinite(w)) \
                    or np.any(w < 0):
                raise DomainError(
                    f"table weights for n = {n} must be finite, "
                    f"nonnegative and match the nodes")
            interp[int(n)] = (PchipInterpolator(k, w), float(k[0]),
                              float(k[-1]))
        object.__setattr__(self, "_interp", interp)

    def weight(self, n: int, k_z):
        """Nonnegative weight at (n, k_z); k_z may be a scalar or array."""
        k = np.asarray(k_z, dtype=float)
        if self.mode == "uniform":
            out = np.full(k.shape, float(self.strength))
        else:
            entry = self._interp.get(int(n))
            if entry is None:
                raise DomainError(f"no coupling table for order n = {n}")
            spline, k_lo, k_hi = entry
            out = np.asarray(spline(np.clip(k, k_lo, k_hi)), dtype=float)
        return float(out) if np.isscalar(k_z) else out


@dataclass(frozen=True)
class SEProfile:
    """Emission-rate profile over an exciton-frequency grid.

    singular_points lists the band-edge frequencies falling inside the
    grid span (or within one boundary cell of its ends); is_singular
    flags the pair of grid points bracketing each of them. rate entries
    inside singular cells are unreliable, and may be inf, because the
    crossing sum is evaluated at finite distance from a divergence; rate
    must be nonnegative wherever finite.
    """

    omega0_grid: np.ndarray
    rate: np.ndarray
    singular_points: np.ndarray
    is_singular: np.ndarray

    def __post_init__(self):
        for name in ("omega0_grid", "rate", "singular_points",
                     "is_singular"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if self.rate.shape != self.omega0_grid.shape \
                or self.is_singular.shape != self.omega0_grid.shape:
            raise GridError("rate and singularity flags must match the grid")
        finite = np.isfinite(self.rate)
        if np.any(self.rate[finite] < 0):
            raise DomainError("rate must be nonnegative at finite points")


def _bound_run_slices(bound: np.ndarray) -> list[tuple[int, int]]:
    """Half-open index ranges of consecutive bound samples."""
    runs: list[tuple[int, int]] = []
    start = None
    for i, flag in enumerate(bound):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, int(bound.size)))
    return runs


def _nodal_slopes(k: np.ndarray, w: np.ndarray) -> np.ndarray:
    """d omega / d k_z at every sample of one run.

    Differentiates the quartic through the five nearest samples, which
    is 4th-order accurate on the interior and falls back to the same
    stencil one-sidedly at the run ends.
    """
    m = k.size
    out = np.empty(m)
    for i in range(m):
        lo = min(max(i - 2, 0), m - 5)
        out[i] = np.polyfit(k[lo:lo + 5] - k[i], w[lo:lo + 5], 4)[3]
    return out


def _hermite(t, w0, w1, m0, m1):
    """Cubic Hermite value on the unit cell; m are t-derivatives."""
    t2 = t * t
    t3 = t2 * t
    return (w0 * (2.0 * t3 - 3.0 * t2 + 1.0) + m0 * (t3 - 2.0 * t2 + t)
            + w1 * (-2.0 * t3 + 3.0 * t2) + m1 * (t3 - t2))


def _hermite_d(t, w0, w1, m0, m1):
    t2 = t * t
    return (w0 * (6.0 * t2 - 6.0 * t) + m0 * (3.0 * t2 - 4.0 * t + 1.0)
            + w1 * (-6.0 * t2 + 6.0 * t) + m1 * (3.0 * t2 - 2.0 * t))


def _run_rate(k: np.ndarray, w: np.ndarray, dw: np.ndarray,
              weight_at, grid: np.ndarray) -> np.ndarray:
    """Crossing sum of one ascending-k run evaluated on the whole grid.

    Every cell whose endpoint frequencies straddle a grid value is
    solved for the crossing on the cell's cubic Hermite model (exact for
    locally quadratic branches), and weight/|slope| is accumulated. A
    crossing with zero slope contributes inf unless its weight is zero.
    """
    below = w[:, None] < grid[None, :]
    cell_idx, g_idx = np.nonzero(below[:-1, :] != below[1:, :])
    rate = np.zeros(grid.shape)
    if cell_idx.size == 0:
        return rate
    h = k[cell_idx + 1] - k[cell_idx]
    w0, w1 = w[cell_idx], w[cell_idx + 1]
    m0, m1 = dw[cell_idx] * h, dw[cell_idx + 1] * h
    target = grid[g_idx]
    lo = np.zeros(target.shape)
    hi = np.ones(target.shape)
    f_lo = w0 - target
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        f_mid = _hermite(mid, w0, w1, m0, m1) - target
        same = (f_mid < 0.0) == (f_lo < 0.0)
        lo = np.where(same, mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    slope = _hermite_d(t, w0, w1, m0, m1) / h
    wt = np.asarray(weight_at(k[cell_idx] + t * h))
    with np.errstate(divide="ignore"):
        contrib = np.where(wt == 0.0, 0.0, wt / np.abs(slope))
    np.add.at(rate, g_idx, contrib)
    return rate


def se_rate_profile(branches: Sequence[ModeBranch], coupling: CouplingModel,
                    omega0_grid) -> SEProfile:
    """Golden-rule rate profile of an emitter scanned across the grid.

    For each grid frequency the bound samples of every branch are
    searched for resonant crossings and weight/|d omega/d k_z| is summed
    over them, with derivatives from 4th-order differences on the
    polished samples. Band edges found on the branches are reported as
    singular points and the grid cells containing them are flagged. The
    profile is additive over branches by construction: summing
    single-branch profiles reproduces the joint call exactly.

    Raises
    ------
    GridError
        Grid not strictly increasing, grid extending beyond the traced
        frequency span, or no branch with a usable bound run.
    """
    grid = np.asarray(omega0_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise GridError("omega0_grid must be strictly increasing with at "
                        "least 2 points")
    runs: list[tuple[int, np.ndarray, np.ndarray, np.ndarray]] = []
    for branch in branches:
        k_all = branch.k_z_array()
        w_all = branch.omega_array().real
        for i0, i1 in _bound_run_slices(branch.bound_mask()):
            if i1 - i0 < 5:
                continue            # too short for the derivative stencil
            k, w = k_all[i0:i1], w_all[i0:i1]
            runs.append((branch.n, k, w, _nodal_slopes(k, w)))
    if not runs:
        raise GridError("no branch contributes a bound run of >= 5 samples")
    span_lo = min(float(w.min()) for _, _, w, _ in runs)
    span_hi = max(float(w.max()) for _, _, w, _ in runs)
    if grid[0] < span_lo or grid[-1] > span_hi:
        raise GridError(
            f"grid [{grid[0]:g}, {grid[-1]:g}] extends beyond the traced "
            f"frequency span [{span_lo:g}, {span_hi:g}]")
    rate = np.zeros(grid.shape)
    for n, k, w, dw in runs:
        rate += _run_rate(k, w, dw, lambda ks, n=n: coupling.weight(n, ks),
                          grid)
    # a run's own extremum sits a fraction of a cell outside the sampled
    # span, so admit edges within one boundary cell of the grid ends
    singular: list[float] = []
    for branch in branches:
        if len(branch.samples) < 9:
            continue
        for edge in find_band_edges(branch):
            if grid[0] - (grid[1] - grid[0]) <= edge.omega_c \
                    <= grid[-1] + (grid[-1] - grid[-2]):
                singular.append(edge.omega_c)
    singular_points = np.array(sorted(singular))
    is_singular = np.zeros(grid.shape, dtype=bool)
    for s in singular_points:
        j = int(np.searchsorted(grid, s))
        is_singular[max(j - 1, 0)] = True
        is_singular[min(j, grid.size - 1)] = True
    return SEProfile(omega0_grid=grid, rate=rate,
                     singular_points=singular_points,
                     is_singular=is_singular)
