"""Surface-mode dispersion of a coated metallic cylinder.

Everything is dimensionless: frequencies Omega = omega/omega_p,
wavevectors K = k_z c/omega_p, radius R = omega_p a/c. The transcendental
residual couples the interior (Drude) and exterior (constant) media
through cylinder-function logarithmic derivatives; its roots omega_n(k_z)
are traced by predictor-corrector continuation and local extrema are
refined into quadratic band-edge models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (AccuracyLossError, DomainError, GridError,
                     NoConvergenceError)
from .media import DrudeParams, OuterMedium, WireGeometry, drude_epsilon
from .numerics import (bessel_j_pair, find_root_complex, hankel1_pair,
                       scan_roots_rectangle)

LIGHT_LINE_CONVENTIONS = ("printed", "medium")

_RESIDUAL_TOL = 1e-12
_TINY = 1e-300


def _snap_to_upper(radicand: complex) -> complex:
    """Clamp a numerically-real radicand onto the +0j side of the sqrt
    cut.

    Bound modes have negative real radicands, i.e. they live exactly on
    the principal cut; stray iteration/predictor roundoff of order
    1e-13 in Im[omega] (relative ~1e-11 in the radicand) would otherwise
    flip the outer argument onto the exponentially growing Hankel sheet.
    Genuinely complex frequencies keep their sign: the weakest-damped
    mode order supported by default (n = 3, Im[omega] ~ -5e-8) sits four
    orders above the snap window.
    """
    if abs(radicand.imag) < 3e-10 * abs(radicand.real):
        return complex(radicand.real, 0.0)
    return radicand


def transverse_wavevectors(k_z: float, omega: complex, drude: DrudeParams,
                           outer: OuterMedium) -> tuple[complex, complex]:
    """Principal-branch transverse wavevectors (K_I, K_O) in omega_p/c
    units; imaginary values mean radial evanescence (evaluated on the
    decaying side of the cut, see _snap_to_upper)."""
    eps_i = drude_epsilon(drude, omega)
    w2 = complex(omega) ** 2
    k2 = float(k_z) ** 2
    return (np.sqrt(_snap_to_upper(complex(eps_i * w2 - k2))),
            np.sqrt(_snap_to_upper(complex(outer.eps_O * w2 - k2))))


def _residual_parts(n: int, k_z: float, omega: complex,
                    drude: DrudeParams, outer: OuterMedium,
                    geom: WireGeometry) -> tuple[complex, float]:
    """Raw bracket-product-minus-coupling value and its magnitude scale.

    The raw value is analytic in omega (away from cylinder-function
    poles); the scale is a positive real envelope of the dominant
    bracket/coupling magnitudes used to make tolerances scale-free.
    """
    if k_z < 0:
        raise DomainError(f"k_z must be nonnegative, got {k_z}")
    omega = complex(omega)
    k_i, k_o = transverse_wavevectors(k_z, omega, drude, outer)
    x_i = k_i * geom.R
    x_o = k_o * geom.R
    jv, jd = bessel_j_pair(n, x_i)
    hv, hd = hankel1_pair(n, x_o)
    t_i = jd / jv / x_i            # mu_I = 1
    t_o = hd / hv / x_o            # mu_O = 1
    eps_i = drude_epsilon(drude, omega)
    u_i = omega * omega * eps_i * t_i
    u_o = omega * omega * outer.eps_O * t_o
    bracket1 = t_i - t_o
    bracket2 = u_i - u_o
    if n == 0:
        coupling = 0.0 + 0.0j
        coupling_scale = 0.0
    else:
        inv_o = 1.0 / (x_o * x_o)
        inv_i = 1.0 / (x_i * x_i)
        coupling = n * n * k_z * k_z * (inv_o - inv_i) ** 2
        coupling_scale = n * n * k_z * k_z * max(abs(inv_o), abs(inv_i)) ** 2
    value = bracket1 * bracket2 - coupling
    scale = max(max(abs(t_i), abs(t_o)) * max(abs(u_i), abs(u_o)),
                coupling_scale, _TINY)
    return value, scale


def dispersion_residual(n: int, k_z: float, omega: complex,
                        drude: DrudeParams, outer: OuterMedium,
                        geom: WireGeometry, *,
                        normalized: bool = True) -> complex:
    """Transcendental mode condition: bracket product minus the
    azimuthal coupling term.

    The raw value spans many orders of magnitude across the (K, Omega)
    plane, so by default it is divided by the dominant bracket/coupling
    scale; a root means |residual| ~ 0 on a uniform footing everywhere,
    and ratio poles map to O(1) values instead of spurious zeros. The
    scale is positive real, so roots, winding numbers and sign changes
    are those of the printed equation.

    Raises
    ------
    DomainError
        omega = 0, k_z < 0, or a cylinder-function domain violation
        (e.g. the outer argument sitting exactly on the light line).
    """
    value, scale = _residual_parts(n, k_z, omega, drude, outer, geom)
    return value / scale if normalized else value


def _realized(n: int, k_z: float, root: complex, drude: DrudeParams,
              outer: OuterMedium, geom: WireGeometry, tol: float) -> complex:
    """Project a converged root onto the real axis when the projection
    still satisfies the tolerance.

    Roots of the real (bound) branch otherwise retain O(1e-13) imaginary
    iteration noise, whose sign would steer later sheet-sensitive
    evaluations; exact-real samples keep continuation predictors exactly
    on the axis."""
    if root.imag != 0.0 and abs(root.imag) < 1e-10 * abs(root.real):
        candidate = complex(root.real, 0.0)
        value, live = _residual_parts(n, k_z, candidate, drude, outer, geom)
        if abs(value) / live < tol:
            return candidate
    return root


def _polish_root(n: int, k_z: float, seed: complex, drude: DrudeParams,
                 outer: OuterMedium, geom: WireGeometry,
                 tol: float = _RESIDUAL_TOL) -> complex:
    """Newton-polish on the raw residual divided by a frozen scale.

    The live normalization envelope is only piecewise smooth (and not
    analytic), which stalls complex Newton steps; freezing it at the
    current iterate keeps the objective analytic while staying at the
    right magnitude. One re-freeze handles seeds whose scale estimate
    was off; the returned root always satisfies the live-normalized
    tolerance.
    """
    root = seed
    best, best_res = seed, math.inf
    for _ in range(2):
        _, scale = _residual_parts(n, k_z, root, drude, outer, geom)
        try:
            # aim an order below tol so accepted roots sit well inside it
            root = find_root_complex(
                lambda z: _residual_parts(n, k_z, z, drude, outer, geom)[0]
                / scale, root, tol=0.1 * tol)
        except NoConvergenceError as exc:
            root = exc.best
        except AccuracyLossError:
            break              # iterate escaped the representable domain
        value, live = _residual_parts(n, k_z, root, drude, outer, geom)
        if abs(value) / live < tol:
            return _realized(n, k_z, root, drude, outer, geom, tol)
        if abs(value) / live < best_res:
            best, best_res = root, abs(value) / live
    raise NoConvergenceError(
        f"polish did not reach normalized residual {tol:g} at "
        f"k_z = {k_z}", best=best, residual=best_res)


@dataclass(frozen=True)
class BranchContext:
    """Media and conventions a branch was traced under; kept on the
    branch so downstream consumers can re-polish the root curve at
    arbitrary k_z instead of interpolating samples."""

    drude: DrudeParams
    outer: OuterMedium
    geom: WireGeometry
    light_line: str = "printed"

    def __post_init__(self):
        if self.light_line not in LIGHT_LINE_CONVENTIONS:
            raise ValueError(
                f"light_line must be one of {LIGHT_LINE_CONVENTIONS}, "
                f"got {self.light_line!r}")

    def residual(self, n: int, k_z: float, omega: complex) -> complex:
        return dispersion_residual(n, k_z, omega, self.drude, self.outer,
                                   self.geom)

    def light_line_k(self, omega: complex) -> float:
        """k_z value of the confinement boundary at this frequency."""
        factor = 1.0 if self.light_line == "printed" \
            else math.sqrt(self.outer.eps_O)
        return factor * omega.real

    def is_bound(self, k_z: float, omega: complex) -> bool:
        return k_z > self.light_line_k(omega)


@dataclass(frozen=True)
class DispersionSample:
    """One polished root of the mode condition."""

    n: int
    k_z: float
    omega: complex
    K_I: complex
    K_O: complex
    bound: bool


@dataclass(frozen=True)
class ModeBranch:
    """Ordered root samples of a single azimuthal order.

    diagnostic is None for a branch that reached the far end of its
    k-range; otherwise it describes where and why continuation stopped
    (the samples up to that point are still valid roots).
    """

    n: int
    samples: tuple[DispersionSample, ...]
    context: BranchContext | None = None
    diagnostic: str | None = None

    def k_z_array(self) -> np.ndarray:
        return np.array([s.k_z for s in self.samples])

    def omega_array(self) -> np.ndarray:
        return np.array([s.omega for s in self.samples])

    def bound_mask(self) -> np.ndarray:
        return np.array([s.bound for s in self.samples])


@dataclass(frozen=True)
class BandEdgePoint:
    """Quadratic model omega ~ omega_c +/- A (k - k_c)^2 near a branch
    extremum; fit_window is the half-width in k_z over which the model
    was fitted and holds to the stated relative tolerance."""

    n: int
    k_c: float
    omega_c: float
    A: float
    kind: str                      # "minimum" | "maximum"
    fit_window: float

    def __post_init__(self):
        if self.kind not in ("minimum", "maximum"):
            raise ValueError(f"kind must be minimum/maximum, got {self.kind}")
        if not self.A > 0:
            raise ValueError(f"curvature A must be positive, got {self.A}")


def _make_sample(ctx: BranchContext, n: int, k_z: float,
                 omega: complex) -> DispersionSample:
    k_i, k_o = transverse_wavevectors(k_z, omega, ctx.drude, ctx.outer)
    return DispersionSample(n=n, k_z=k_z, omega=omega, K_I=k_i, K_O=k_o,
                            bound=ctx.is_bound(k_z, omega))


def seed_roots(n: int, k_z: float, omega_lo: complex, omega_hi: complex,
               drude: DrudeParams, outer: OuterMedium, geom: WireGeometry,
               *, max_depth: int = 6) -> list[complex]:
    """Argument-principle scan for mode frequencies at fixed k_z.

    Returns polished, deduplicated roots inside the rectangle
    [omega_lo, omega_hi] of the complex frequency plane, sorted by real
    part. Cells the scan cannot resolve are dropped silently; widen the
    rectangle or deepen the scan to recover more modes.

    The real-axis segment Re[omega] < k_z/sqrt(eps_O) lies on a Hankel
    sheet cut where winding counts degrade: rectangles there should sit
    strictly below the axis (confined roots on the axis itself are the
    province of seed_bound_roots).
    """
    f = lambda w: dispersion_residual(n, k_z, w, drude, outer, geom)
    roots: list[complex] = []
    for seed in scan_roots_rectangle(f, omega_lo, omega_hi,
                                     max_depth=max_depth):
        try:
            w = _polish_root(n, k_z, seed, drude, outer, geom)
        except (NoConvergenceError, DomainError):
            continue
        if not (omega_lo.real - 1e-9 <= w.real <= omega_hi.real + 1e-9
                and omega_lo.imag - 1e-9 <= w.imag <= omega_hi.imag + 1e-9):
            continue
        if any(abs(w - r) < 1e-8 for r in roots):
            continue
        roots.append(w)
    return sorted(roots, key=lambda w: w.real)


def seed_bound_roots(n: int, k_z: float, drude: DrudeParams,
                     outer: OuterMedium, geom: WireGeometry, *,
                     omega_min: float = 1e-3,
                     samples: int = 800) -> list[complex]:
    """Real-frequency roots below the outer light line at fixed k_z.

    Confined modes sit on the real axis where the outer argument is
    evanescent, which puts them on the branch cut of the rectangle scan;
    a sign-change bracket on the (real) residual finds them instead.
    Returns polished roots sorted ascending; empty when the residual has
    no sign change in (omega_min, k_z/sqrt(eps_O)).
    """
    omega_max = k_z / math.sqrt(outer.eps_O) - 1e-9
    if omega_max <= omega_min:
        return []

    def f(w: float) -> float:
        return dispersion_residual(n, k_z, complex(w), drude, outer,
                                   geom).real

    grid = np.linspace(omega_min, omega_max, samples)
    vals = np.array([f(w) for w in grid])
    roots: list[complex] = []
    for i in range(samples - 1):
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb >= 0:
            continue
        a, b = float(grid[i]), float(grid[i + 1])
        for _ in range(80):       # Newton drifts near the light line, bisect
            mid = 0.5 * (a + b)
            fm = f(mid)
            if fm == 0.0:
                break
            if (fa < 0) == (fm < 0):
                a, fa = mid, fm
            else:
                b = mid
        w = complex(0.5 * (a + b), 0.0)
        if abs(dispersion_residual(n, k_z, w, drude, outer,
                                   geom)) > _RESIDUAL_TOL:
            continue              # sign change through a pole, not a root
        if not any(abs(w - r) < 1e-8 for r in roots):
            roots.append(w)
    return sorted(roots, key=lambda w: w.real)


def _track_real_root(n: int, k_z: float, pred: float, half_width: float,
                     drude: DrudeParams, outer: OuterMedium,
                     geom: WireGeometry, *, probes: int = 9,
                     tol: float = _RESIDUAL_TOL) -> complex | None:
    """Bracketed real-axis root nearest to pred, or None.

    Confined-branch continuation must not leave the real axis: the
    branch sits on the sqrt cut of the outer argument, and a free
    complex iterate that strays below the axis lands on the wrong sheet
    and converges to a coexisting radiating root. A bracket inside
    (0, light line) cannot do either.
    """
    lo = max(pred - half_width, 1e-6)
    hi = min(pred + half_width,
             k_z / math.sqrt(outer.eps_O) - 1e-9)
    if not hi > lo:
        return None

    def f(w: float) -> float:
        return dispersion_residual(n, k_z, complex(w), drude, outer,
                                   geom).real

    grid = np.linspace(lo, hi, probes)
    vals = np.array([f(w) for w in grid])
    best: tuple[float, float] | None = None
    for i in range(probes - 1):
        if not (np.isfinite(vals[i]) and np.isfinite(vals[i + 1])):
            continue
        if vals[i] * vals[i + 1] < 0:
            mid = 0.5 * (grid[i] + grid[i + 1])
            if best is None or abs(mid - pred) < abs(
                    0.5 * (best[0] + best[1]) - pred):
                best = (float(grid[i]), float(grid[i + 1]))
    if best is None:
        return None
    root = float(brentq(f, best[0], best[1], xtol=1e-15, rtol=8.9e-16))
    w = complex(root, 0.0)
    if abs(dispersion_residual(n, k_z, w, drude, outer, geom)) > tol:
        return None               # bracketed a pole, not a root
    return w


def trace_branch(n: int, k_range: tuple[float, float], seed: complex,
                 step: float, drude: DrudeParams, outer: OuterMedium,
                 geom: WireGeometry, *,
                 light_line: str = "printed") -> ModeBranch:
    """Continue a verified root from k_range[0] to k_range[1].

    The range may descend (k_range[0] > k_range[1]); samples are always
    returned in ascending k_z. Secant predictor plus damped-Newton
    corrector; the step halves when the corrector fails or the root
    moves further than the predictor justifies, and also on approach to
    the light line where the outer argument crosses its branch point.
    After refinement to step/64 the trace stops and returns the partial
    branch with a diagnostic rather than stepping over a discontinuity.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    k_start, k_stop = float(k_range[0]), float(k_range[1])
    if k_start == k_stop:
        raise ValueError(f"empty k_range {k_range}")
    direction = 1.0 if k_stop > k_start else -1.0
    ctx = BranchContext(drude=drude, outer=outer, geom=geom,
                        light_line=light_line)
    try:
        w = _polish_root(n, k_start, seed, drude, outer, geom)
    except NoConvergenceError as exc:
        raise DomainError(
            f"seed {seed} is not a root at k_z = {k_start}: {exc}") from exc
    # a genuine seed only absorbs roundoff during polishing; a large
    # correction means the iteration wandered off to some other mode
    if abs(w - seed) > 1e-3 * max(1.0, abs(seed)):
        raise DomainError(
            f"seed {seed} is not a root at k_z = {k_start}: "
            f"polishing moved it to {w}")

    samples = [_make_sample(ctx, n, k_start, w)]
    diagnostic = None
    k = k_start
    h = step
    h_min = step / 64.0
    slope: complex | None = None

    while direction * (k_stop - k) > 1e-14:
        h_eff = min(h, direction * (k_stop - k))
        # resolve the approach to the confinement boundary: the outer
        # wavevector's branch point sits at sqrt(eps_O) Re[omega], and
        # the printed boundary at Re[omega] marks the flagged transition
        dist = min(abs(k - math.sqrt(outer.eps_O) * w.real),
                   abs(k - w.real))
        if dist < 2.0 * h_eff and h_eff > h_min:
            h_eff = max(h_min, 0.5 * h_eff)
        k_try = k + direction * h_eff
        pred = w + slope * (k_try - k) if slope is not None else w
        # reject steps that land off the local tangent: those are hops
        # onto a coexisting branch, not continuation
        limit = 5.0 * h_eff * max(0.2, 2.0 * abs(slope)
                                  if slope is not None else 1.0)
        accepted = False
        if w.imag == 0.0 and pred.imag == 0.0:
            got = _track_real_root(n, k_try, pred.real, limit, drude,
                                   outer, geom)
            if got is not None:
                w_new, accepted = got, True
        else:
            try:
                w_new = _polish_root(n, k_try, pred, drude, outer, geom)
                accepted = abs(w_new - pred) <= limit
            except (NoConvergenceError, DomainError):
                pass
        if accepted:
            slope = (w_new - w) / (k_try - k)
            k, w = k_try, w_new
            samples.append(_make_sample(ctx, n, k, w))
            h = min(step, 2.0 * h)
        else:
            h = 0.5 * h_eff
            if h < h_min:
                diagnostic = (
                    f"continuation lost at k_z = {k:.6g} after refining "
                    f"to step {h_eff:.3g} (< step/64); likely a branch "
                    f"discontinuity near the light line")
                break
    if direction < 0:
        samples.reverse()
    return ModeBranch(n=n, samples=tuple(samples), context=ctx,
                      diagnostic=diagnostic)


class _PolishedCurve:
    """Cached map k_z -> polished complex root near a traced branch."""

    def __init__(self, branch: ModeBranch):
        if branch.context is None:
            raise GridError("branch carries no tracing context")
        self._ctx = branch.context
        self._n = branch.n
        self._k = branch.k_z_array()
        self._w = branch.omega_array()
        self._cache: dict[float, complex] = {}

    def __call__(self, k_z: float) -> complex:
        got = self._cache.get(k_z)
        if got is None:
            seed = complex(np.interp(k_z, self._k, self._w.real)) \
                + 1j * float(np.interp(k_z, self._k, self._w.imag))
            got = _polish_root(self._n, k_z, seed, self._ctx.drude,
                               self._ctx.outer, self._ctx.geom)
            self._cache[k_z] = got
        return got

    def real(self, k_z: float) -> float:
        return self(k_z).real


def _golden_refine(f: Callable[[float], float], a: float, b: float,
                   minimize: bool, tol: float) -> float:
    """Golden-section extremum refinement on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    sign = 1.0 if minimize else -1.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * f(d)
    return 0.5 * (a + b)


def _bound_runs(branch: ModeBranch) -> list[list[DispersionSample]]:
    runs: list[list[DispersionSample]] = []
    current: list[DispersionSample] = []
    for s in branch.samples:
        if s.bound:
            current.append(s)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def find_band_edges(branch: ModeBranch, *, rel_tol: float = 1e-4,
                    fit_window: float | None = None) -> list[BandEdgePoint]:
    """Locate and model the interior extrema of Re[omega](k_z) among the
    branch's bound samples.

    With a branch context present, each discrete extremum is refined by
    golden section on the polished root curve and the quadratic is
    least-squares fitted over a window shrunk until the model tracks the
    curve to rel_tol * omega_c. A context-free branch (synthetic or
    deserialized samples) is fitted on the stored samples directly. An
    extremum-free branch yields an empty list. fit_window, when given,
    fixes the half-width instead of adapting it.
    """
    if len(branch.samples) < 9:
        raise GridError(
            f"need at least 9 samples to locate edges, got "
            f"{len(branch.samples)}")
    curve = _PolishedCurve(branch) if branch.context is not None else None
    edges: list[BandEdgePoint] = []
    for run in _bound_runs(branch):
        if len(run) < 3:
            continue
        re = [s.omega.real for s in run]
        ks = [s.k_z for s in run]
        for i in range(1, len(run) - 1):
            lo, hi = re[i - 1], re[i + 1]
            if re[i] < lo and re[i] < hi:
                minimize = True
            elif re[i] > lo and re[i] > hi:
                minimize = False
            else:
                continue
            spacing = 0.5 * (ks[i + 1] - ks[i - 1])
            if curve is not None:
                k_star = _golden_refine(curve.real, ks[i - 1], ks[i + 1],
                                        minimize, tol=1e-10 * max(1.0, ks[i]))
                edge = _fit_curve_edge(curve, branch.n, k_star, spacing,
                                       minimize, rel_tol, fit_window)
            else:
                edge = _fit_sample_edge(np.asarray(ks), np.asarray(re),
                                        branch.n, ks[i], spacing, minimize,
                                        rel_tol, fit_window)
            if edge is not None:
                edges.append(edge)
    return edges


def _edge_from_fit(kk: np.ndarray, ww: np.ndarray, k_star: float, n: int,
                   minimize: bool, target: float,
                   window: float) -> BandEdgePoint | None:
    """Quadratic vertex from a window of (k, Re omega) points, or None
    when the points are not quadratic to the target yet."""
    c2, c1, c0 = np.polyfit(kk - k_star, ww, 2)
    if c2 == 0.0:
        return None
    model = c0 + c1 * (kk - k_star) + c2 * (kk - k_star) ** 2
    if float(np.max(np.abs(model - ww))) > 0.5 * target:
        return None
    return BandEdgePoint(
        n=n, k_c=float(k_star - c1 / (2.0 * c2)),
        omega_c=float(c0 - c1 * c1 / (4.0 * c2)), A=float(abs(c2)),
        kind="minimum" if minimize else "maximum",
        fit_window=float(window))


def _fit_curve_edge(curve: "_PolishedCurve", n: int, k_star: float,
                    spacing: float, minimize: bool, rel_tol: float,
                    fit_window: float | None,
                    n_fit: int = 13) -> BandEdgePoint | None:
    target = rel_tol * abs(curve(k_star).real)
    window = 2.0 * spacing if fit_window is None else fit_window
    for _ in range(60):
        kk = np.linspace(k_star - window, k_star + window, n_fit)
        try:
            ww = np.array([curve(float(k)).real for k in kk])
        except (NoConvergenceError, DomainError):
            edge = None        # window reached past the branch's run
        else:
            edge = _edge_from_fit(kk, ww, k_star, n, minimize, target,
                                  window)
        if edge is not None or fit_window is not None:
            return edge
        window *= 0.6
    return None


def _fit_sample_edge(ks: np.ndarray, re: np.ndarray, n: int, k_star: float,
                     spacing: float, minimize: bool, rel_tol: float,
                     fit_window: float | None) -> BandEdgePoint | None:
    target = rel_tol * abs(np.interp(k_star, ks, re))
    window = 4.0 * spacing if fit_window is None else fit_window
    for _ in range(60):
        mask = np.abs(ks - k_star) <= window
        if int(mask.sum()) < 5:
            return None
        edge = _edge_from_fit(ks[mask], re[mask], k_star, n, minimize,
                              target, window)
        if edge is not None or fit_window is not None:
            return edge
        window *= 0.6
    return None
