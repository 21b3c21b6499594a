"""Complex root refinement for transcendental dispersion residuals.

Damped Newton iteration with a numerically differenced derivative; falls
back to Muller's method when damping stagnates (the wire residual has
Bessel-ratio poles close to its roots, where a raw Newton step can
overshoot badly). All state updates are deterministic: same inputs, same
iterate sequence, bitwise-identical result.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NoConvergenceError

MAX_ITER = 100
DAMPING = 0.5
MAX_HALVINGS = 10

ComplexFn = Callable[[complex], complex]


def _derivative(f: ComplexFn, z: complex, fz: complex) -> complex:
    # centered difference along the real direction; for analytic f this is
    # the complex derivative up to O(h^2)
    h = 1e-7 * (1.0 + abs(z))
    return (f(z + h) - f(z - h)) / (2.0 * h)


def _muller_step(f: ComplexFn, z0, z1, z2, f0, f1, f2) -> complex:
    # quadratic through the last three iterates, root closest to z2
    h1 = z1 - z0
    h2 = z2 - z1
    if h1 == 0 or h2 == 0 or (h2 + h1) == 0:
        return z2 + 1e-7 * (1.0 + abs(z2))
    d1 = (f1 - f0) / h1
    d2 = (f2 - f1) / h2
    a = (d2 - d1) / (h2 + h1)
    b = a * h2 + d2
    disc = np.sqrt(b * b - 4.0 * f2 * a)
    den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
    if den == 0:
        return z2 + 1e-7 * (1.0 + abs(z2))
    return z2 - 2.0 * f2 / den


def find_root_complex(residual: ComplexFn, seed: complex, tol: float = 1e-13,
                      max_iter: int = MAX_ITER) -> complex:
    """Refine ``seed`` to a root of ``residual`` with |residual| < tol.

    Parameters
    ----------
    residual : callable
        Complex function of one complex variable.
    seed : complex
        Starting iterate.
    tol : float
        Residual magnitude target, at least 1e-14.

    Raises
    ------
    NoConvergenceError
        Iteration cap reached; carries the best iterate and its residual.
    """
    if tol < 1e-14:
        raise ValueError(f"tol must be >= 1e-14, got {tol}")
    z = complex(seed)
    fz = complex(residual(z))
    best, best_res = z, abs(fz)
    if best_res < tol:
        return z
    # ring buffer for Muller fallback
    hist = [(z, fz)]
    use_muller = False
    for _ in range(max_iter):
        if not use_muller:
            dfz = _derivative(residual, z, fz)
            if dfz == 0 or not np.isfinite(abs(dfz)):
                use_muller = True
        if use_muller and len(hist) >= 3:
            (z0, f0), (z1, f1), (z2, f2) = hist[-3], hist[-2], hist[-1]
            z_new = _muller_step(residual, z0, z1, z2, f0, f1, f2)
            f_new = complex(residual(z_new))
        else:
            step = fz / dfz if not use_muller else -fz
            z_new = z - step
            f_new = complex(residual(z_new))
            # damp while the residual grows
            halvings = 0
            while abs(f_new) > abs(fz) and halvings < MAX_HALVINGS:
                step *= DAMPING
                z_new = z - step
                f_new = complex(residual(z_new))
                halvings += 1
            if halvings == MAX_HALVINGS and abs(f_new) > abs(fz):
                # stagnated: switch to Muller from the next iteration
                use_muller = True
        z, fz = z_new, f_new
        hist.append((z, fz))
        if len(hist) > 4:
            hist.pop(0)
        if abs(fz) < best_res:
            best, best_res = z, abs(fz)
        if abs(fz) < tol:
            return z
    raise NoConvergenceError(
        f"no root with |residual| < {tol:g} within {max_iter} iterations "
        f"(best {best_res:g})", best, best_res)


def winding_number(residual: ComplexFn, corner_lo: complex, corner_hi: complex,
                   samples_per_side: int = 64) -> int:
    """Winding number of ``residual`` around a rectangle's boundary.

    Counts zeros minus poles inside by accumulating the phase of the
    residual along densely sampled rectangle edges. Used only to seed
    Newton refinement, so occasional under-sampling is tolerable.
    """
    x0, y0 = corner_lo.real, corner_lo.imag
    x1, y1 = corner_hi.real, corner_hi.imag
    m = samples_per_side
    top = x0 + np.linspace(0.0, 1.0, m, endpoint=False) * (x1 - x0) + 1j * y0
    right = x1 + 1j * (y0 + np.linspace(0.0, 1.0, m, endpoint=False) * (y1 - y0))
    bot = x1 - np.linspace(0.0, 1.0, m, endpoint=False) * (x1 - x0) + 1j * y1
    left = x0 + 1j * (y1 - np.linspace(0.0, 1.0, m, endpoint=False) * (y1 - y0))
    path = np.concatenate([top, right, bot, left])
    vals = np.array([residual(z) for z in path], dtype=complex)
    if np.any(vals == 0) or not np.all(np.isfinite(vals)):
        # a boundary point sits on a zero/pole; nudge by shrinking slightly
        shrink = 0.997
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        lo = complex(cx + (x0 - cx) * shrink, cy + (y0 - cy) * shrink)
        hi = complex(cx + (x1 - cx) * shrink, cy + (y1 - cy) * shrink)
        return winding_number(residual, lo, hi, samples_per_side)
    phases = np.angle(vals)
    dphi = np.diff(np.concatenate([phases, phases[:1]]))
    dphi = (dphi + np.pi) % (2 * np.pi) - np.pi
    return int(np.rint(dphi.sum() / (2 * np.pi)))


def scan_roots_rectangle(residual: ComplexFn, corner_lo: complex,
                         corner_hi: complex, max_depth: int = 6,
                         samples_per_side: int = 48) -> list[complex]:
    """Coarse argument-principle scan: subdivide a rectangle until each
    cell holds a single net zero, then return the cell centres as seeds.

    The returned points are *seeds*, not verified roots; callers polish
    them with :func:`find_root_complex` and discard failures. Cells with
    negative winding are subdivided too (poles can mask zeros); the one
    blind spot is a cell whose zeros and poles balance to exactly zero
    at every depth, which no winding count can see.
    """
    seeds: list[complex] = []
    # split off-centre at an irrational fraction: roots often sit on the
    # real or imaginary axis, and a midpoint split would place them
    # exactly on a child edge where the boundary-shrink retry loses them
    split = 0.5 + 1.0 / (2.0 * np.e)

    def recurse(lo: complex, hi: complex, depth: int) -> None:
        w = winding_number(residual, lo, hi, samples_per_side)
        if w == 0:
            return
        if w == 1 or (w > 1 and depth >= max_depth):
            seeds.append((lo + hi) / 2.0)
            return
        if depth >= max_depth:
            return
        cx = lo.real + split * (hi.real - lo.real)
        cy = lo.imag + split * (hi.imag - lo.imag)
        recurse(lo, complex(cx, cy), depth + 1)
        recurse(complex(cx, lo.imag), complex(hi.real, cy), depth + 1)
        recurse(complex(lo.real, cy), complex(cx, hi.imag), depth + 1)
        recurse(complex(cx, cy), hi, depth + 1)

    recurse(complex(corner_lo), complex(corner_hi), 0)
    return seeds
