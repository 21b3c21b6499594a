"""Cylinder functions of complex argument.

Thin wrapper over scipy.special (AMOS) exposing the value/derivative pair
needed by the wire dispersion residual, with explicit domain checks: the
AMOS routines silently return nan/inf when e^{|Im z|} overflows double
precision, which we convert into a hard signal instead of letting nan
propagate into root searches.
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy import special as sp

from ..errors import AccuracyLossError, DomainError

MAX_ORDER = 16


class CylinderKind(Enum):
    BESSEL_J = "bessel_j"
    HANKEL1 = "hankel1"


def cylinder_bessel(kind: CylinderKind, order: int, z: complex) -> tuple[complex, complex]:
    """Return (F_n(z), F_n'(z)) for F = J_n or H_n^(1).

    Parameters
    ----------
    kind : CylinderKind
        Which cylinder function family.
    order : int
        Non-negative order, at most ``MAX_ORDER``.
    z : complex
        Argument; any phase. H_n^(1) is singular at z = 0.

    Raises
    ------
    DomainError
        Negative or too-large order, or Hankel evaluated at z = 0.
    AccuracyLossError
        Result not representable in double precision (overflow) or the
        backend failed to converge (nan).
    """
    if not isinstance(order, (int, np.integer)):
        raise DomainError(f"order must be an integer, got {order!r}")
    if order < 0 or order > MAX_ORDER:
        raise DomainError(f"order must be in [0, {MAX_ORDER}], got {order}")
    z = complex(z)
    # overflow becomes AccuracyLossError below; keep the backend quiet
    with np.errstate(invalid="ignore", over="ignore"):
        if kind is CylinderKind.BESSEL_J:
            val = sp.jv(order, z)
            der = sp.jvp(order, z)
        elif kind is CylinderKind.HANKEL1:
            if z == 0:
                raise DomainError("hankel1 is singular at z = 0")
            val = sp.hankel1(order, z)
            der = sp.h1vp(order, z)
        else:
            raise DomainError(f"unknown cylinder kind {kind!r}")
    if not (np.isfinite(val.real) and np.isfinite(val.imag)
            and np.isfinite(der.real) and np.isfinite(der.imag)):
        raise AccuracyLossError(
            f"{kind.value}(n={order}) not representable at z={z!r}")
    return complex(val), complex(der)


def bessel_j_pair(order: int, z: complex) -> tuple[complex, complex]:
    return cylinder_bessel(CylinderKind.BESSEL_J, order, z)


def hankel1_pair(order: int, z: complex) -> tuple[complex, complex]:
    return cylinder_bessel(CylinderKind.HANKEL1, order, z)
