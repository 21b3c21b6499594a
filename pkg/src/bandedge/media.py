"""Material response and unit bookkeeping.

Internally everything runs dimensionless: frequencies in units of the
metal's plasma frequency omega_p, wavevectors in omega_p/c, lengths in
c/omega_p, and decay rates in the free-space emitter rate beta. The unit
system only matters when importing or exporting physical numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnknownUnitError


@dataclass(frozen=True)
class UnitSystem:
    """Conversion anchors between internal and laboratory units.

    hbar_omega_p_eV : plasma quantum in eV (sets the eV <-> omega_p map).
    unit_length_nm : physical size of one c/omega_p (configurable because
        quoted wire dimensions round it independently of hbar_omega_p_eV).
    beta_over_omega_p : emitter free-space rate in omega_p units; only
        cross-scale conversions involving the beta tag use it.
    """

    hbar_omega_p_eV: float = 3.76
    unit_length_nm: float = 53.8
    beta_over_omega_p: float = 1e-6

    def __post_init__(self):
        for name in ("hbar_omega_p_eV", "unit_length_nm", "beta_over_omega_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class DrudeParams:
    """Metal permittivity parameters.

    omega_p carries the plasma quantum in eV for unit export; the
    response itself is evaluated in omega_p units where the plasma
    frequency is 1 by construction. tau is in 1/omega_p units.
    """

    eps_inf: float = 9.6
    omega_p: float = 3.76
    tau: float = math.inf

    def __post_init__(self):
        if not self.eps_inf > 0:
            raise ValueError(f"eps_inf must be positive, got {self.eps_inf}")
        if not self.omega_p > 0:
            raise ValueError(f"omega_p must be positive, got {self.omega_p}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class OuterMedium:
    """Frequency-independent host permittivity."""

    eps_O: float = 5.3

    def __post_init__(self):
        if not self.eps_O > 0:
            raise ValueError(f"eps_O must be positive, got {self.eps_O}")


@dataclass(frozen=True)
class WireGeometry:
    """Cylinder radius R in c/omega_p units (the effective radius)."""

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")

    def a_nm(self, units: UnitSystem = UnitSystem()) -> float:
        """Physical radius in nanometres under the given unit anchors."""
        return convert_units(self.R, "c/omega_p", "nm", units)


def drude_epsilon(params: DrudeParams, omega,
                  units: UnitSystem | None = None):
    """Drude permittivity eps_inf * (1 - 1/(w(w + i/tau))) at frequency
    ``omega`` (omega_p units, complex allowed; scalar or array).

    ``units`` is accepted for call-shape uniformity with the exporting
    layers; the rational evaluation itself is unit-free because omega is
    already dimensionless.

    Raises
    ------
    DomainError
        omega = 0 is a pole of the response.
    """
    w = np.asarray(omega, dtype=complex)
    if np.any(w == 0):
        raise DomainError("drude_epsilon is singular at omega = 0")
    if math.isinf(params.tau):
        eps = params.eps_inf * (1.0 - 1.0 / (w * w))
    else:
        eps = params.eps_inf * (1.0 - 1.0 / (w * (w + 1j / params.tau)))
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return complex(eps)
    return eps


# tag -> (dimension, internal units carried by 1 unit of that tag)
def _unit_table(units: UnitSystem) -> dict[str, tuple[str, float]]:
    return {
        "omega_p": ("frequency", 1.0),
        "eV": ("frequency", 1.0 / units.hbar_omega_p_eV),
        "beta": ("frequency", units.beta_over_omega_p),
        "c/omega_p": ("length", 1.0),
        "nm": ("length", 1.0 / units.unit_length_nm),
    }


def convert_units(value: float, from_tag: str, to_tag: str,
                  units: UnitSystem = UnitSystem()) -> float:
    """Convert ``value`` between unit tags of the same dimension.

    Frequency tags: omega_p, eV, beta. Length tags: c/omega_p, nm.

    Raises
    ------
    UnknownUnitError
        Unrecognised tag.
    ValueError
        Tags of different dimensions.
    """
    table = _unit_table(units)
    try:
        dim_from, scale_from = table[from_tag]
    except KeyError:
        raise UnknownUnitError(f"unknown unit tag {from_tag!r}") from None
    try:
        dim_to, scale_to = table[to_tag]
    except KeyError:
        raise UnknownUnitError(f"unknown unit tag {to_tag!r}") from None
    if dim_from != dim_to:
        raise ValueError(
            f"cannot convert {from_tag!r} ({dim_from}) to {to_tag!r} ({dim_to})")
    # into internal units, then out into the target tag
    return value * scale_from / scale_to
