"""stentlab: desk-scale structural simulation of self-expanding stent frames.

Parametric diamond-cell frames in superelastic wire, crimped, deployed and
cycled against a moving vessel surrogate, with deformation tracking and
strain-based fatigue classification.
"""
__version__ = "0.1.0"

from .errors import (ComputationError, DeploymentError, DriftError,
                     InfeasibleCrimpError, RelaxationTimeoutError,
                     SolverBlowupError, StentLabError, ValidationError)
from .material import (FiberState, MaterialParams, fiber_tangent, fiber_update,
                       superelastic_update, transformation_stresses)
from .geometry import (Frame, Section, StentDesign, assign_thickness,
                       build_stent, load_design, save_design,
                       scale_strut_width)
from .solver import (SolverConfig, SolverState, initial_state,
                     relax_to_equilibrium, stable_dt, step)
from .loading import LumenModel, MotionProfile, PointLoads, SheathBC
from .scenarios import (BeatResult, RadialForceCurve, StrainHistoryStore,
                        anchorage_force, beat_cycles, crimp, deploy,
                        min_crimp_diameter, radial_force_curve,
                        release_diameter)
from .tracking import (TrackingSeries, compression, eccentricity_index,
                       fit_axis, mean_radius, radii_deviation)
from .fatigue import (FatigueLimits, FatigueRecord, classify,
                      constant_life_data, extract_records, mean_amp,
                      polar_projection, region_report, strain_extrema)
from .pipeline import (ScenarioConfig, load_scenario, resolve_design,
                       run_pipeline)
from .sweep import SweepResult, rank_designs, run_sweep, width_variants
from .svgplot import emit_svg

__all__ = [name for name in dir() if not name.startswith("_")]
