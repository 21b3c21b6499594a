"""Guided-mode dispersion, band-edge reservoir dynamics, and transport
noise for emitters near structured reservoirs."""

__version__ = "0.1.0"

from . import errors
from .dispersion import (BandEdgePoint, BranchContext, DispersionSample,
                         ModeBranch, dispersion_residual, find_band_edges,
                         seed_bound_roots, seed_roots, trace_branch,
                         transverse_wavevectors)
from .dynamics import (AmplitudeTrace, ReservoirSpec, amplitude_transform,
                       decay_trace, memory_kernel)
from .emission import CouplingModel, SEProfile, se_rate_profile
from .media import (DrudeParams, OuterMedium, UnitSystem, WireGeometry,
                    convert_units, drude_epsilon)
from .noise import (BranchReservoir, DotStateSpace, JunctionRates, NoiseMap,
                    NoiseResult, noise_map, noise_spectrum,
                    population_kernel, reservoir_selfenergy)
from .numerics import (CylinderKind, InversionSettings, TimeGrid,
                       cylinder_bessel, find_root_complex, invert_laplace,
                       solve_volterra)
from .retardation import (LaplaceAmplitudes, RetardedAmplitudes,
                          TwoDotConfig, retarded_amplitudes_laplace,
                          retarded_amplitudes_series, retarded_noise_spectrum)

__all__ = [
    "__version__",
    "errors",
    "DrudeParams",
    "OuterMedium",
    "WireGeometry",
    "UnitSystem",
    "convert_units",
    "drude_epsilon",
    "CylinderKind",
    "cylinder_bessel",
    "find_root_complex",
    "TimeGrid",
    "InversionSettings",
    "invert_laplace",
    "solve_volterra",
    "BandEdgePoint",
    "BranchContext",
    "DispersionSample",
    "ModeBranch",
    "dispersion_residual",
    "transverse_wavevectors",
    "seed_roots",
    "seed_bound_roots",
    "trace_branch",
    "find_band_edges",
    "CouplingModel",
    "SEProfile",
    "se_rate_profile",
    "ReservoirSpec",
    "AmplitudeTrace",
    "amplitude_transform",
    "memory_kernel",
    "decay_trace",
    "JunctionRates",
    "DotStateSpace",
    "NoiseResult",
    "NoiseMap",
    "BranchReservoir",
    "reservoir_selfenergy",
    "population_kernel",
    "noise_spectrum",
    "noise_map",
    "TwoDotConfig",
    "RetardedAmplitudes",
    "LaplaceAmplitudes",
    "retarded_amplitudes_series",
    "retarded_amplitudes_laplace",
    "retarded_noise_spectrum",
]
