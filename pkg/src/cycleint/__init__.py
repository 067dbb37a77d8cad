"""Cycle integrals of smooth modular objects along closed geodesics."""

from .bqf import QuadForm, enumerate_classes, frame, pell_fundamental
from .cycle import CycleResult, QuadratureError, cycle_integral
from .forms import ModularObject, apply_operator
from .kernels import backend_name, use_backend
from .verify import IdentityReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "QuadForm", "enumerate_classes", "frame", "pell_fundamental",
    "CycleResult", "QuadratureError", "cycle_integral",
    "ModularObject", "apply_operator",
    "backend_name", "use_backend",
    "IdentityReport", "run_suite",
]
