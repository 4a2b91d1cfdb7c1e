"""Density-of-states integration over the Brillouin zone.

Four integrators share one model interface: a smeared uniform grid
(:mod:`bzdos.ptr`), iterated adaptive quadrature (:mod:`bzdos.iai`), the
linear tetrahedron method (:mod:`bzdos.lt`) and complex contour deformation
(:mod:`bzdos.bcd`).
"""

from .bcd import BcdParams, FailureReport, bcd_diagnose, bcd_dos
from .grid import DosEstimate
from .iai import AdaptiveConfig, BudgetExceeded, iai_dos
from .lt import lt_dos
from .models import AnalyticBandModel, HermiticityViolation, KPoint, TightBindingModel
from .ptr import SmearingParams, ptr_dos, ptr_dos_resolvent
from .reference import get_system

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig", "AnalyticBandModel", "BcdParams", "BudgetExceeded", "DosEstimate",
    "FailureReport", "HermiticityViolation", "KPoint", "SmearingParams", "TightBindingModel",
    "bcd_diagnose", "bcd_dos", "get_system", "iai_dos", "lt_dos", "ptr_dos",
    "ptr_dos_resolvent",
]
