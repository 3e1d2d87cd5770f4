"""Axisymmetric one-way coupled thermomechanical finite element solver."""

from .materials import (
    MaterialRecord,
    MaterialSet,
    PiecewiseQuadratic,
    build_hearth_materials,
    elasticity_matrix,
    fit_piecewise_quadratic,
    thermal_stress_term,
)
from .mesh import (
    BoundaryTag,
    Mesh,
    SubdomainPolygon,
    build_hearth_geometry,
    generate_mesh,
    hearth_mesh,
    load_mesh,
    save_mesh,
    tag_boundaries,
)
from .thermal import NewtonConfig, Robin, SolveReport, ThermalBC, newton_solve
from .mechanical import (
    MechanicalBC,
    StressField,
    Traction,
    hydrostatic_traction,
    recover_stress,
    solve_mechanical,
)
from .isoline import IsoLine, extract_isoline

__version__ = "0.1.0"

__all__ = [
    "BoundaryTag", "Mesh", "SubdomainPolygon", "build_hearth_geometry",
    "generate_mesh", "hearth_mesh", "load_mesh", "save_mesh",
    "tag_boundaries", "MaterialRecord", "MaterialSet", "PiecewiseQuadratic",
    "build_hearth_materials", "elasticity_matrix", "fit_piecewise_quadratic",
    "thermal_stress_term", "NewtonConfig", "Robin", "SolveReport",
    "ThermalBC", "newton_solve", "MechanicalBC", "StressField", "Traction",
    "hydrostatic_traction", "recover_stress", "solve_mechanical",
    "IsoLine", "extract_isoline",
]
