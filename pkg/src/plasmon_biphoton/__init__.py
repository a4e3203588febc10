"""Simulator of plasmon-assisted transmission of polarization-entangled photons.

Models a nanostructured metal film (subwavelength hole array) placed at the
focus of a confocal telescope, and the effect of the combined system on a
polarization-entangled biphoton: transmittance spectra, multimode transfer
matrices, output polarization maps, and coincidence fringe visibilities.
"""

from .jones import (
    PolarizationEllipse,
    ellipse_of,
    jones_intensity,
    linear_pol,
    polarizer,
    rotation,
)
from .film import FilmModel, ResonanceFamily, film_matrix, resonance_wavelength, transmittance
from .optics import (
    FieldMap,
    GridSpec,
    SetupParams,
    field_map,
    lens_matrix,
    propagation_phase,
    telescope_matrix,
    telescope_matrix_sp,
)
from .quantum import (
    GRAM_LABELS,
    PostselectedState,
    VisibilityResult,
    coincidence_rate,
    concurrence,
    gram_allones,
    gram_identity,
    postselect_channel,
    singlet,
    visibility,
)

__version__ = "0.1.0"

__all__ = [
    "PolarizationEllipse",
    "ellipse_of",
    "jones_intensity",
    "linear_pol",
    "polarizer",
    "rotation",
    "FilmModel",
    "ResonanceFamily",
    "film_matrix",
    "resonance_wavelength",
    "transmittance",
    "FieldMap",
    "GridSpec",
    "SetupParams",
    "field_map",
    "lens_matrix",
    "propagation_phase",
    "telescope_matrix",
    "telescope_matrix_sp",
    "GRAM_LABELS",
    "PostselectedState",
    "VisibilityResult",
    "coincidence_rate",
    "concurrence",
    "gram_allones",
    "gram_identity",
    "postselect_channel",
    "singlet",
    "visibility",
]
