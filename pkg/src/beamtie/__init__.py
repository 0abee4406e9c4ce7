"""Quasi-static coupling of geometrically exact beams to solid surfaces.

The package couples 1D Simo-Reissner beam finite elements to 2D surfaces
of 3D hyperelastic solids with mortar-type positional and rotational
constraints, enforced by a node-wise weighted penalty regularization.
"""

from .beam_fem import BeamMesh, BeamState, CrossSection
from .model import Model, State
from .model_io import load_model, save_model
from .mortar import CouplingConfig, MortarAssembler
from .solid_fem import MaterialModel, SolidMesh
from .solver import SolveConfig, solve
from .surface import SurfaceMesh, extract_surface

__version__ = "0.1.0"

__all__ = [
    "BeamMesh",
    "BeamState",
    "CrossSection",
    "CouplingConfig",
    "MaterialModel",
    "Model",
    "MortarAssembler",
    "SolidMesh",
    "SolveConfig",
    "State",
    "SurfaceMesh",
    "extract_surface",
    "load_model",
    "save_model",
    "solve",
    "__version__",
]
