"""Numerical workbench for the entire functions built from the Stokes
phenomenon of -y'' + (z^m + E) y = 0: the Stokes multiplier C(E), spectral
determinants W_{n,k}(E) and the derived functions g, f, h whose zeros and
1-points are radially distributed; plus certified root location in the
E-plane and admissibility decisions for labeled ray systems.
"""

__version__ = "0.1.0"

from .ode import (PolynomialPotential, Path, SolutionFrame,
                  StepSizeUnderflowError, integrate_path,
                  integrate_with_variation)
from .sibuya import (AnchorPolicy, AnchorRadiusError, DomainError,
                     ProblemSpec, StokesSector, anchor_radius, evaluate_y0,
                     rotate_energy, wkb_seed, yk_at_origin)
from .spectral import (ConventionError, InternalConsistencyError,
                       SpectralFunction, SpectralValue, connection_residual,
                       f_minus_one, make_handle, spectral_f, spectral_g,
                       spectral_h, stokes_C, w01_constant, wronskian)
from .rootfinder import (BoundaryProblem, Disk, OrderEstimateError,
                         RadialReport, Rectangle, RootRecord,
                         RootSearchBudgetError, WindingError, eigenvalues_nk,
                         find_roots, order_estimate, predicted_ray,
                         verify_radial, winding_count)
from .raysystem import (AdmissibilityReport, LabeledRaySystem, Ray,
                        ThreeRayReport, TwoLineClassification,
                        admissibility_check, classify_two_lines,
                        three_ray_check)

__all__ = [
    "PolynomialPotential", "Path", "SolutionFrame", "StepSizeUnderflowError",
    "integrate_path", "integrate_with_variation",
    "AnchorPolicy", "AnchorRadiusError", "DomainError", "ProblemSpec",
    "StokesSector", "anchor_radius", "evaluate_y0", "rotate_energy",
    "wkb_seed", "yk_at_origin",
    "ConventionError", "InternalConsistencyError", "SpectralFunction",
    "SpectralValue", "connection_residual", "f_minus_one", "make_handle",
    "spectral_f", "spectral_g", "spectral_h", "stokes_C", "w01_constant",
    "wronskian",
    "BoundaryProblem", "Disk", "OrderEstimateError", "RadialReport",
    "Rectangle", "RootRecord", "RootSearchBudgetError", "WindingError",
    "eigenvalues_nk", "find_roots", "order_estimate", "predicted_ray",
    "verify_radial", "winding_count",
    "AdmissibilityReport", "LabeledRaySystem", "Ray", "ThreeRayReport",
    "TwoLineClassification", "admissibility_check", "classify_two_lines",
    "three_ray_check",
]
