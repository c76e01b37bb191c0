"""Radial ground states of weighted semilinear elliptic problems and their Morse indices."""

from .nonlinearity import NonlinearitySpec, check_assumptions
from .radial_ode import ProblemSpec, RadialProfile, shoot_ground_state
from .linearization import MeshParams, Weight, assemble, eigen
from .spectral_geometry import morse_index, mu, multiplicity
from .continuation import sweep

__all__ = [
    "NonlinearitySpec",
    "check_assumptions",
    "ProblemSpec",
    "RadialProfile",
    "shoot_ground_state",
    "MeshParams",
    "Weight",
    "assemble",
    "eigen",
    "morse_index",
    "mu",
    "multiplicity",
    "sweep",
]

__version__ = "0.1.0"
