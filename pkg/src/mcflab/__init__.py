"""Numerical laboratory for mean curvature flow of mean-convex boundaries.

The package evolves closed curves, axisymmetric profiles, and level-set
fields by mean curvature, keeps exact comparison flows (spheres,
cylinders, planes, translating solitons), and measures the quantities
that control the flow: noncollapsing constants, Gaussian densities,
convexity margins, blow-up classification, and gradient-flow residuals.

Quick start::

    from mcflab import SphereFlow, StepParams, evolve
    hist = evolve(SphereFlow(dim=2).curve(0.0),
                  StepParams(t_end=0.2), [0.1, 0.2])
"""

from .density import (DensityReport, gaussian_density, monotonicity_profile)
from .diagnostics import (AndrewsReport, BoundaryPointData, ResidualReport,
                          SpeedLimitReport, andrews_Z, andrews_constants,
                          boundary_sample, curvature_stats, density_ratio,
                          evolution_residual, history_samples,
                          k_convexity_report, region_contains,
                          speed_limit_check, unit_ball_volume,
                          unit_sphere_area)
from .engines import (FlowAbort, StepParams, axisym_curvatures,
                      curvature_vectors, evolve, step_axisym,
                      step_level_set, step_parametric_curve,
                      time_of_arrival)
from .exact import (CylinderFlow, GrimReaperFlow, PlaneFlow, SphereFlow,
                    dumbbell_profile, make_exact)
from .geometry import (AxisymProfile, FlowHistory, LevelSetField,
                       ParabolicBall, ParametricCurve, SingularEvent,
                       SpaceTimePoint, extract_curves, extract_surface,
                       make_grid, parabolic_rescale, reinitialize,
                       signed_distance)
from .scenario import (ConfigError, ScenarioConfig, run_scenario, run_suite)
from .singularity import (DEFAULT_LAMBDAS, EstimateProfile, HarnackReport,
                          PointSelectionReport, TangentFlowClass,
                          classify_tangent_flow, convexity_profile,
                          curvature_estimate_profiler, cylindrical_profile,
                          harnack_check, point_selection)
from .translator import TranslatorSolution, solve_translator

__version__ = "0.1.0"

__all__ = [
    "AndrewsReport", "AxisymProfile", "BoundaryPointData", "ConfigError",
    "CylinderFlow", "DEFAULT_LAMBDAS", "DensityReport", "EstimateProfile",
    "FlowAbort", "FlowHistory", "GrimReaperFlow", "HarnackReport",
    "LevelSetField", "ParabolicBall", "ParametricCurve", "PlaneFlow",
    "PointSelectionReport", "ResidualReport", "ScenarioConfig",
    "SingularEvent", "SpaceTimePoint", "SpeedLimitReport", "SphereFlow",
    "StepParams", "TangentFlowClass", "TranslatorSolution", "andrews_Z",
    "andrews_constants", "axisym_curvatures", "boundary_sample",
    "classify_tangent_flow", "convexity_profile",
    "curvature_estimate_profiler", "curvature_stats", "curvature_vectors",
    "cylindrical_profile", "density_ratio", "dumbbell_profile", "evolve",
    "evolution_residual", "extract_curves", "extract_surface",
    "gaussian_density", "harnack_check", "history_samples",
    "k_convexity_report", "make_exact", "make_grid",
    "monotonicity_profile", "parabolic_rescale", "point_selection",
    "region_contains", "reinitialize", "run_scenario", "run_suite",
    "signed_distance", "solve_translator", "speed_limit_check",
    "step_axisym", "step_level_set", "step_parametric_curve",
    "time_of_arrival", "unit_ball_volume", "unit_sphere_area",
]
