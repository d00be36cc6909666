"""Numerical verification toolkit for static perfect-fluid space-times
coupled to a smooth map: curvature tensors, system residuals,
integrability conditions, energy conditions, divergence identities,
symmetric-function obstructions, and oscillation-based non-existence
criteria.
"""

__version__ = "0.1.0"

from .catalog import CATALOG, build, examples_catalog
from .curvature import (Geometry, classical_curvature,
                        conformal_cotton_residual, map_quantities,
                        phi_bundle, schur_residual, trace_identities)
from .errors import PhifluidError
from .jets import Jet, jet_space
from .lorentz import (EnergyVerdict, einstein_residual, energy_conditions,
                      lift_static, observer_forms, psd_trace_bound,
                      stress_energy)
from .newton import (QuadratureGrid, build_grid, codazzi_and_divergence,
                     divergence_selftest, kazdan_warner, lk_apply,
                     newton_operator, sym_functions)
from .oscillation import (RadialProfile, ZeroReport, critical_curve,
                          nonexistence_verdict, profile_from_scene,
                          solve_cauchy, zero_criteria)
from .scene import Chart, MapSpec, ScalarField, Scene
from .sceneio import compile_expression, load_scene, scene_file
from .system import (IDENTITY_IDS, divergence_identity,
                     integrability_residuals, level_set_geometry,
                     system_residual, warped_split_residual)

__all__ = [
    "CATALOG", "Chart", "Geometry", "EnergyVerdict", "IDENTITY_IDS",
    "Jet", "MapSpec", "PhifluidError", "QuadratureGrid", "RadialProfile",
    "ScalarField", "Scene", "ZeroReport", "build", "build_grid",
    "classical_curvature", "codazzi_and_divergence", "compile_expression",
    "conformal_cotton_residual", "critical_curve", "divergence_identity",
    "divergence_selftest", "einstein_residual", "energy_conditions",
    "examples_catalog", "integrability_residuals", "jet_space",
    "kazdan_warner", "level_set_geometry", "lift_static", "lk_apply",
    "load_scene", "map_quantities", "newton_operator",
    "nonexistence_verdict", "observer_forms", "phi_bundle",
    "profile_from_scene", "psd_trace_bound", "scene_file",
    "schur_residual", "solve_cauchy", "stress_energy", "sym_functions",
    "system_residual", "trace_identities", "warped_split_residual",
    "zero_criteria",
]
