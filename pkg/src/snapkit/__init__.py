"""Snappability and singularity distance of isostatic frameworks.

Frameworks are bar or bar-and-plate structures with pinned supports.
The package measures how far a realization is from snapping into a
different shape, using elastic strain energy density as the distance.
"""

from .analysis import (AnalysisReport, NumericError, PreconditionError,
                       compare_variants, format_compare_table,
                       singularity_distance, snappability)
from .critical import (CriticalPoint, PathStatistics, QuotientSet,
                       build_quotient_set, classify_point,
                       solve_critical_homotopy, solve_critical_newton)
from .model import (Configuration, Edge, Framework, IsostaticReport, Knot,
                    Plate, ValidationError, configuration_diameter,
                    edge_lengths, gauge_fix, load_framework, save_framework,
                    squared_edge_lengths, validate_isostatic)
from .pathtrack import (LengthPath, MonotonicityReport, PathCertificate,
                        check_endpoint, interpolate_lengths,
                        project_onto_lengths, track_deformation,
                        verify_monotonicity)
from .rigidity import (ShakinessReport, is_shaky, pure_condition,
                       pure_condition_gradient, rigidity_matrix,
                       self_stress_basis)
from .strain import (bar_energy_ce, bar_energy_gl, density, edge_stresses,
                     energy_gradient, energy_hessian, energy_matrix,
                     gl_strain, gradient_system, lifted_lengths,
                     local_triangle_coords, plate_affine_matrix, plate_energy,
                     plate_quadratic_block, pseudometric, total_energy)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport", "Configuration", "CriticalPoint", "Edge", "Framework",
    "IsostaticReport", "Knot", "LengthPath", "MonotonicityReport",
    "NumericError", "PathCertificate", "PathStatistics", "Plate",
    "PreconditionError", "QuotientSet", "ShakinessReport", "ValidationError",
    "bar_energy_ce", "bar_energy_gl", "build_quotient_set", "check_endpoint",
    "classify_point", "compare_variants", "configuration_diameter", "density",
    "edge_lengths", "edge_stresses", "energy_gradient", "energy_hessian",
    "energy_matrix", "format_compare_table", "gauge_fix", "gl_strain",
    "gradient_system", "interpolate_lengths", "is_shaky", "lifted_lengths",
    "load_framework", "local_triangle_coords", "plate_affine_matrix",
    "plate_energy", "plate_quadratic_block", "project_onto_lengths",
    "pseudometric", "pure_condition", "pure_condition_gradient",
    "rigidity_matrix", "save_framework", "self_stress_basis",
    "singularity_distance", "snappability", "solve_critical_homotopy",
    "solve_critical_newton", "squared_edge_lengths", "total_energy",
    "track_deformation", "validate_isostatic", "verify_monotonicity",
    "__version__",
]
