"""Current-noise spectra of a three-state junction cycle fed by a
band-edge reservoir.

The normalized spectrum S/2eI = 1 + Gamma_R [B(w) + B(-w)] is built from
a frequency-resolved population kernel A(i w) of the radiative channel.
Two kernel evaluations are offered. The default "absorptive" part keeps
the even decay-rate component only, so a detuning inside a spectral gap
gives an exactly Poissonian plateau between genuine discontinuities at
w = +-delta. The "full" evaluation retains the dispersive
(principal-value) component as well; it rounds those discontinuities
into continuous cusps and can drive the ratio negative for in-band
detunings, and is provided for comparison.

B(-w) equals conj(B(w)) for both evaluations, so spectra are computed
once per |w| and mirrored, making the w -> -w symmetry bitwise. The
denominator of B is expanded in a cancellation-free form and the w = 0
point uses the analytic removable limit.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from .dispersion import ModeBranch, find_band_edges
from .dynamics import ReservoirSpec
from .emission import CouplingModel, _bound_run_slices
from .errors import DomainError, GridError, QuadratureError

KERNEL_PARTS = ("absorptive", "full")

DOT_CYCLE = ("empty-with-hole", "exciton", "empty-ground")

_QUAD_KW = dict(limit=200, epsabs=1e-11, epsrel=1e-9)
_JUMP_FLOOR = 1e-6


@dataclass(frozen=True)
class JunctionRates:
    """Sequential-tunneling rates of the left and right junctions."""

    Gamma_L: float
    Gamma_R: float

    def __post_init__(self):
        for name in ("Gamma_L", "Gamma_R"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, "
                                  f"got {v}")


@dataclass(frozen=True)
class DotStateSpace:
    """Transport cycle of the dot: the charge state refills from the
    left, relaxes radiatively, and empties to the right, in that fixed
    order."""

    states: tuple[str, str, str] = DOT_CYCLE

    def __post_init__(self):
        if len(self.states) != 3 or len(set(self.states)) != 3:
            raise DomainError("state space is a cycle of exactly three "
                              f"distinct states, got {self.states!r}")


@dataclass(frozen=True)
class NoiseResult:
    """Normalized spectrum S/2eI on a frequency grid.

    jumps holds the detected discontinuity frequencies (cell midpoints)
    on near-uniform grids: cells whose step exceeds both a small floor
    and four times the slope-scaled expectation from neighboring cells.
    """

    omega_grid: np.ndarray
    fano: np.ndarray
    jumps: tuple[float, ...] = ()

    def __post_init__(self):
        grid = np.asarray(self.omega_grid, dtype=float)
        fano = np.asarray(self.fano, dtype=float)
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "fano", fano)
        object.__setattr__(self, "jumps", tuple(float(j) for j in self.jumps))
        if fano.shape != grid.shape:
            raise GridError(f"fano shape {fano.shape} does not match grid "
                            f"shape {grid.shape}")
        if not np.all(np.isfinite(fano)):
            raise DomainError("fano must be finite at every grid point")


@dataclass(frozen=True)
class NoiseMap:
    """Spectra stacked over a detuning grid; fano is indexed
    [delta, omega] and jumps holds one tuple per detuning row."""

    omega_grid: np.ndarray
    delta_grid: np.ndarray
    fano: np.ndarray
    jumps: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        og = np.asarray(self.omega_grid, dtype=float)
        dg = np.asarray(self.delta_grid, dtype=float)
        f = np.asarray(self.fano, dtype=float)
        object.__setattr__(self, "omega_grid", og)
        object.__setattr__(self, "delta_grid", dg)
        object.__setattr__(self, "fano", f)
        if f.shape != (dg.size, og.size):
            raise GridError(f"fano shape {f.shape} does not match "
                            f"({dg.size}, {og.size})")
        if len(self.jumps) != dg.size:
            raise GridError("one jump tuple per detuning row required")


@dataclass(frozen=True)
class BranchReservoir:
    """Reservoir self-energy integrated over a traced mode branch.

    omega0 is the emitter frequency; the weight along the branch comes
    from the coupling model and gamma is a flat background rate. Bound
    runs of at least five samples are splined; beyond a run end the
    branch is continued with its local quadratic model when the outward
    curvature is positive (an edge-type termination), otherwise the run
    is truncated there.
    """

    branch: ModeBranch
    omega0: float
    coupling: CouplingModel
    gamma: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.omega0):
            raise DomainError(f"omega0 must be finite, got {self.omega0}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise DomainError(f"gamma must be finite and nonnegative, "
                              f"got {self.gamma}")
        if not isinstance(self.coupling, CouplingModel):
            raise DomainError("coupling must be a CouplingModel")
        k = self.branch.k_z_array()
        w = self.branch.omega_array().real
        bound = self.branch.bound_mask()
        runs, tails = [], []
        for i, j in _bound_run_slices(bound):
            if j - i < 5:
                continue
            spline = CubicSpline(k[i:j], w[i:j])
            runs.append((spline, float(k[i]), float(k[j - 1])))
            for k_end, sgn in ((float(k[i]), -1.0), (float(k[j - 1]), 1.0)):
                a2 = 0.5 * float(spline(k_end, 2))
                if a2 > 0.0:
                    tails.append((k_end,
                                  float(spline(k_end)),
                                  sgn * float(spline(k_end, 1)),
                                  a2))
        if not runs:
            raise GridError("branch has no bound run of at least 5 samples")
        try:
            edges = find_band_edges(self.branch)
        except GridError:
            edges = []
        object.__setattr__(self, "_runs", tuple(runs))
        object.__setattr__(self, "_tails", tuple(tails))
        object.__setattr__(self, "_edge_ks", tuple(e.k_c for e in edges))

    def _weight(self, k_z: float) -> float:
        return float(self.coupling.weight(self.branch.n, k_z))


def _c_quadratic(spec: ReservoirSpec, z: complex) -> complex:
    return spec.gamma / 2.0 + spec.phase * spec.C / np.sqrt(z
                                                            - 1j * spec.delta)


def _quad_checked(fun, a, b, **kw):
    """Adaptive quadrature that raises instead of warning or silently
    returning an inaccurate value."""
    with warnings.catch_warnings():
        warnings.filterwarnings("error", category=IntegrationWarning)
        try:
            val, err = quad(fun, a, b, **_QUAD_KW, **kw)
        except IntegrationWarning as exc:
            raise QuadratureError(
                f"self-energy quadrature did not converge: {exc}") from exc
    if err > max(1e-8, 1e-6 * abs(val)):
        raise QuadratureError(f"self-energy quadrature error {err:.2e} "
                              f"too large for value {val}")
    return val


def _quad_complex(fun, a, b, points=None):
    return complex(
        _quad_checked(lambda x: fun(x).real, a, b, points=points),
        _quad_checked(lambda x: fun(x).imag, a, b, points=points))


def _c_numeric(res: BranchReservoir, z: complex) -> complex:
    total = complex(res.gamma / 2.0)
    nu = res.omega0 - z.imag
    for spline, k_lo, k_hi in res._runs:
        pts = [kc for kc in res._edge_ks if k_lo < kc < k_hi]
        pts += [float(r) for r in np.atleast_1d(spline.solve(nu,
                                                             extrapolate=False))
                if k_lo < r < k_hi]

        def integrand(k, s=spline):
            return res._weight(k) / (z + 1j * (float(s(k)) - res.omega0))

        total += _quad_complex(integrand, k_lo, k_hi,
                               points=sorted(set(pts)) or None)
    for k_end, w_end, m_out, a2 in res._tails:
        wt = res._weight(k_end)

        def tail(kappa, w0=w_end, m=m_out, a=a2, wt=wt):
            return wt / (z + 1j * (w0 + m * kappa + a * kappa ** 2
                                   - res.omega0))

        total += _quad_complex(tail, 0.0, np.inf)
    return total


def reservoir_selfenergy(spec, z: complex) -> complex:
    """Self-energy c(z) of the radiative channel, for Re z > 0.

    The closed-form backend evaluates gamma/2 + phase C / sqrt(z - i
    delta); the branch backend integrates weight / (z + i(omega_n(k) -
    omega0)) over its splined bound runs with integration break points
    at band edges and at resonant wavevectors, plus the quadratic-tail
    continuations.
    """
    zc = complex(z)
    if not zc.real > 0.0:
        raise DomainError("reservoir self-energy requires Re z > 0")
    if isinstance(spec, ReservoirSpec):
        return complex(_c_quadratic(spec, zc))
    if isinstance(spec, BranchReservoir):
        return _c_numeric(spec, zc)
    raise DomainError("spec must be a ReservoirSpec or a BranchReservoir")


def _crossing_sum(res: BranchReservoir, nu: float) -> float:
    """Sum of weight/|omega'| over branch crossings of frequency nu."""
    total = 0.0
    for spline, k_lo, k_hi in res._runs:
        roots = [float(r) for r in np.atleast_1d(spline.solve(
            nu, extrapolate=False)) if k_lo <= r <= k_hi]
        kept = []
        for r in sorted(roots):
            if not kept or r - kept[-1] > 1e-12 * max(1.0, abs(r)):
                kept.append(r)
        for r in kept:
            slope = float(spline(r, 1))
            if abs(slope) < 1e-14:
                return math.inf
            total += res._weight(r) / abs(slope)
    for k_end, w_end, m_out, a2 in res._tails:
        disc = m_out * m_out - 4.0 * a2 * (w_end - nu)
        if disc <= 0.0:
            continue
        root = math.sqrt(disc)
        for kappa in ((-m_out - root) / (2 * a2), (-m_out + root) / (2 * a2)):
            # kappa == 0 crossings already belong to the splined run
            if kappa > 1e-12 * max(1.0, abs(k_end)):
                slope = m_out + 2.0 * a2 * kappa
                if abs(slope) < 1e-14:
                    return math.inf
                total += res._weight(k_end) / abs(slope)
    return total


def _kernel_quadratic(spec: ReservoirSpec, w: float, part: str) -> complex:
    sgn = 1.0 if spec.kind == "minimum" else -1.0
    x = sgn * (spec.delta - w)
    y = sgn * (spec.delta + w)
    if spec.C > 0.0 and (x == 0.0 or y == 0.0):
        return complex(math.inf, 0.0)
    if part == "absorptive":
        out = spec.gamma
        if x > 0.0:
            out += spec.C / math.sqrt(x)
        if y > 0.0:
            out += spec.C / math.sqrt(y)
        return complex(out)
    z = 1j * w   # principal-branch values equal the Re z -> 0+ limits
    return complex(_c_quadratic(spec, z)
                   + np.conj(_c_quadratic(spec, -z)))


def _pv_piece(w_fun, nu_fun, dnu_fun, a, b, roots, t):
    """P int_a^b w(k) / (nu(k) - t) dk with simple interior roots,
    each handled by Cauchy-weight quadrature on its own window."""
    rs = sorted(float(r) for r in roots if a < r < b)
    kept = []
    for r in rs:
        if not kept or r - kept[-1] > 1e-12 * max(1.0, abs(r)):
            kept.append(r)
    if not kept:
        return _quad_checked(lambda k: w_fun(k) / (nu_fun(k) - t), a, b)
    total = 0.0
    bounds = [a] + [0.5 * (u + v) for u, v in zip(kept, kept[1:])] + [b]
    for r, lo, hi in zip(kept, bounds, bounds[1:]):
        d = min(r - lo, hi - r)

        def smooth(k, r=r):
            x = nu_fun(k) - t
            if x == 0.0:
                return w_fun(r) / dnu_fun(r)
            return w_fun(k) * (k - r) / x

        total += _quad_checked(smooth, r - d, r + d,
                               weight="cauchy", wvar=r)
        for sa, sb in ((lo, r - d), (r + d, hi)):
            if sb > sa:
                total += _quad_checked(
                    lambda k: w_fun(k) / (nu_fun(k) - t), sa, sb)
    return total


def _pv_total(res: BranchReservoir, t: float) -> float:
    """P int w(k) / (omega_n(k) - t) dk over runs and tails."""
    total = 0.0
    for spline, k_lo, k_hi in res._runs:
        roots = [float(r) for r in np.atleast_1d(
            spline.solve(t, extrapolate=False)) if k_lo < r < k_hi]
        total += _pv_piece(res._weight,
                           lambda k, s=spline: float(s(k)),
                           lambda k, s=spline: float(s(k, 1)),
                           k_lo, k_hi, roots, t)
    for k_end, w_end, m_out, a2 in res._tails:
        wt = res._weight(k_end)
        nu = lambda kappa: w_end + m_out * kappa + a2 * kappa ** 2
        dnu = lambda kappa: m_out + 2.0 * a2 * kappa
        disc = m_out * m_out - 4.0 * a2 * (w_end - t)
        roots = []
        if disc > 0.0:
            sq = math.sqrt(disc)
            roots = [x for x in ((-m_out - sq) / (2 * a2),
                                 (-m_out + sq) / (2 * a2))
                     if x > 1e-12 * max(1.0, abs(k_end))]
        if not roots:
            total += _quad_checked(lambda k: wt / (nu(k) - t), 0.0, np.inf)
            continue
        cut = 2.0 * max(roots) + 1.0
        total += _pv_piece(lambda k: wt, nu, dnu, 0.0, cut, roots, t)
        total += _quad_checked(lambda k: wt / (nu(k) - t), cut, np.inf)
    return total


def _kernel_numeric(res: BranchReservoir, w: float, part: str) -> complex:
    rate = _crossing_sum(res, res.omega0 - w) \
        + _crossing_sum(res, res.omega0 + w)
    if math.isinf(rate):
        return complex(math.inf, 0.0)
    a_abs = res.gamma + math.pi * rate
    if part == "absorptive":
        return complex(a_abs)
    # Im A(i w) = P(omega0 + w) - P(omega0 - w) from the half-plane
    # limit 1/(eps + i x) -> pi delta(x) - i P(1/x)
    lamb = _pv_total(res, res.omega0 + w) - _pv_total(res, res.omega0 - w)
    return complex(a_abs, lamb)


def population_kernel(spec, omega: float, *, part: str = "absorptive"
                      ) -> complex:
    """Population kernel A(i omega), the Re z -> 0+ limit of
    c(z) + conj(c(conj(z))) at z = i omega.

    part selects the evaluation: "absorptive" keeps the even
    decay-rate component (for the closed-form backend, gamma plus the
    active inverse-square-root terms; for the branch backend, pi times
    the crossing sums at omega0 -+ omega), while "full" adds the odd
    dispersive component i * Lamb(omega). At a frequency exactly on a
    divergence the kernel is reported as infinite and downstream
    consumers use the large-|A| limit.
    """
    if part not in KERNEL_PARTS:
        raise DomainError(f"part must be one of {KERNEL_PARTS}, got {part!r}")
    if not np.isfinite(omega):
        raise DomainError(f"omega must be finite, got {omega}")
    if isinstance(spec, ReservoirSpec):
        return _kernel_quadratic(spec, float(omega), part)
    if isinstance(spec, BranchReservoir):
        return _kernel_numeric(spec, float(omega), part)
    raise DomainError("spec must be a ReservoirSpec or a BranchReservoir")


def _b_factor(rates: JunctionRates, A: complex, w: float) -> complex:
    """B(w) with the denominator in the exact rearrangement
    i w (D1 - w^2) - w^2 S1, which keeps full precision at small w."""
    gl, gr = rates.Gamma_L, rates.Gamma_R
    if not np.isfinite(A):
        return gl / (1j * w * (gl + gr + 1j * w))
    d1 = A * (gl + gr) + gl * gr
    s1 = A + gl + gr
    den = 1j * w * (d1 - w * w) - w * w * s1
    scale = abs(w) * (abs(d1) + w * w) + w * w * abs(s1)
    if abs(den) <= 1e-12 * scale:
        raise DomainError(f"pole on the evaluation grid: the noise "
                          f"denominator vanishes at omega = {w}")
    return A * gl / den


def _a1_slope(spec, part: str) -> float:
    """Odd kernel slope a1 in A(i w) ~ A(0) + a1 (i w) near w = 0."""
    if part == "absorptive":
        return 0.0
    if isinstance(spec, ReservoirSpec):
        cp = -0.5 * spec.phase * spec.C \
            * (-1j * spec.delta) ** -1.5
        return 2.0 * float(cp.real)
    h = 1e-5
    im1 = population_kernel(spec, h, part="full").imag
    im2 = population_kernel(spec, 2.0 * h, part="full").imag
    return (8.0 * im1 - im2) / (6.0 * h)


def _fano_closed_zero(rates: JunctionRates, a0: float, a1: float) -> float:
    """Removable omega = 0 limit of the spectrum from the kernel value
    a0 = A(0) and the odd slope a1 in A(i w) ~ a0 + a1 (i w)."""
    gl, gr = rates.Gamma_L, rates.Gamma_R
    if math.isinf(a0):
        return 1.0 - 2.0 * gl * gr / (gl + gr) ** 2
    d1 = a0 * (gl + gr) + gl * gr
    return 1.0 + 2.0 * gr * gl * (a1 * gl * gr
                                  - a0 * (a0 + gl + gr)) / d1 ** 2


def _fano_zero(rates: JunctionRates, spec, part: str) -> float:
    a0 = population_kernel(spec, 0.0, part=part).real
    a1 = 0.0 if math.isinf(a0) else _a1_slope(spec, part)
    return _fano_closed_zero(rates, a0, a1)


def _detect_jumps(grid: np.ndarray, fano: np.ndarray) -> tuple[float, ...]:
    """Cells whose step exceeds the slope-scaled expectation from both
    neighbors; localization within one cell is only well posed on a
    near-uniform grid, so others report nothing."""
    if grid.size < 4:
        return ()
    dw = np.diff(grid)
    if dw.max() > 1.25 * dw.min():
        return ()
    step = np.abs(np.diff(fano))
    slope = step / dw
    jumps = []
    for i in range(step.size):
        neighbors = 0.0
        if i > 0:
            neighbors = slope[i - 1]
        if i + 1 < step.size:
            neighbors = max(neighbors, slope[i + 1])
        if step[i] > max(_JUMP_FLOOR, 4.0 * dw[i] * neighbors):
            jumps.append(0.5 * (grid[i] + grid[i + 1]))
    return tuple(jumps)


def noise_spectrum(rates: JunctionRates, spec, omega_grid, *,
                   part: str = "absorptive") -> NoiseResult:
    """Normalized current-noise spectrum S/2eI over a frequency grid.

    Evaluates 1 + Gamma_R [B(omega) + B(-omega)] with B from the
    population kernel; since B(-omega) = conj(B(omega)), each |omega|
    is computed once as 1 + 2 Gamma_R Re B and mirrored, so the
    omega -> -omega symmetry is bitwise on symmetric grids. omega = 0
    uses the analytic removable limit. Grid points landing exactly on
    a kernel divergence take the finite large-|A| limit, which is the
    band-side value of the discontinuity.

    Raises
    ------
    GridError
        Non-increasing or non-finite grid, or omega = 0 requested for
        a gapless closed-form reservoir (delta = 0 with C > 0).
    DomainError
        Unknown part, bad spec type, or a true pole of B on the grid.
    """
    if part not in KERNEL_PARTS:
        raise DomainError(f"part must be one of {KERNEL_PARTS}, got {part!r}")
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or not np.all(np.isfinite(grid)):
        raise GridError("omega grid must be a finite one-dimensional "
                        "sequence")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise GridError("omega grid must be strictly increasing")
    if (isinstance(spec, ReservoirSpec) and spec.delta == 0.0
            and spec.C > 0.0 and np.any(grid == 0.0)):
        raise GridError("omega = 0 is singular for a gapless reservoir; "
                        "offset the grid")
    values = {}
    for wa in np.unique(np.abs(grid)):
        if wa == 0.0:
            values[wa] = _fano_zero(rates, spec, part)
        else:
            a = population_kernel(spec, wa, part=part)
            b = _b_factor(rates, a, wa)
            values[wa] = 1.0 + 2.0 * rates.Gamma_R * b.real
    fano = np.array([values[abs(w)] for w in grid])
    return NoiseResult(grid, fano, _detect_jumps(grid, fano))


def noise_map(rates: JunctionRates, spec_family, delta_grid, omega_grid, *,
              part: str = "absorptive", max_workers: int | None = None
              ) -> NoiseMap:
    """Spectra over a detuning family, one noise_spectrum row per delta.

    spec_family is either a closed-form ReservoirSpec, whose delta
    field is replaced row by row, or a callable delta -> spec (required
    for the branch backend, where the detuning enters through omega0).
    Rows evaluate independently, in a thread pool when max_workers is
    given, and are always assembled in delta order.
    """
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1 or deltas.size < 1 or not np.all(np.isfinite(deltas)):
        raise GridError("delta grid must be a finite one-dimensional "
                        "sequence")
    if deltas.size > 1 and np.any(np.diff(deltas) <= 0):
        raise GridError("delta grid must be strictly increasing")
    if callable(spec_family):
        family = spec_family
    elif isinstance(spec_family, ReservoirSpec):
        family = lambda d: replace(spec_family, delta=d)
    else:
        raise DomainError("spec_family must be a ReservoirSpec or a "
                          "callable delta -> spec")

    def row(d: float) -> NoiseResult:
        return noise_spectrum(rates, family(float(d)), omega_grid, part=part)

    if max_workers is not None:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(row, deltas))
    else:
        results = [row(d) for d in deltas]
    fano = np.vstack([r.fano for r in results])
    return NoiseMap(results[0].omega_grid, deltas, fano,
                    tuple(r.jumps for r in results))
