"""f-deformed oscillator algebras and nonlinear coherent states on truncated Fock spaces."""

__version__ = "0.1.0"

from .deformation import DeformationSpec, Radius, convergence_radius, deformed_factorial, f_value, q_number
from .states import CoherentParameter, CoherentState, build_ncs, overlap_kernel

__all__ = [
    "DeformationSpec", "Radius", "convergence_radius", "deformed_factorial", "f_value", "q_number",
    "CoherentParameter", "CoherentState", "build_ncs", "overlap_kernel",
]
