"""Soliton laboratory: lattices, spectral solvers, inverse scattering, dressing."""

__version__ = "0.1.0"

from . import fpu
from . import spectral
from . import scattering
from . import glm
from . import akns

__all__ = ["fpu", "spectral", "scattering", "glm", "akns", "__version__"]
