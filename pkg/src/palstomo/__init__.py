"""palstomo: parametric level set shape reconstruction for tomography.

Shapes are represented by a handful of adaptive compactly supported radial
bumps; the shape parameters evolve by Levenberg-Marquardt driven by
adjoint-based sensitivities against one of three built-in forward physics
(parallel-beam X-ray CT, electrical resistance tomography, frequency-domain
diffuse optical tomography).
"""

from .csrbf import WendlandKernel
from .grids import Grid2D, graded_axis
from .pals import (PalsModel, ParamIndex, active_bumps, delta, eval_phi,
                   eval_phi_sensitivity, heaviside, property_map,
                   property_sensitivity)
from .forward import ForwardModel, SolverFailure
from .ct import CtGeometry, CtModel, ct_forward, full_view_angles, limited_view_angles
from .ert import ErtModel, ErtSetup, ert_solve, make_ert_setup
from .dot import DotModel, DotSetup, dot_solve, make_dot_setup
from .optim import SolverConfig, SolverState, run
from .phantoms import Phantom, jaccard, shape_metrics
from .harness import Experiment, ExperimentConfig, default_config, load_config

__all__ = [
    "WendlandKernel", "Grid2D", "graded_axis",
    "PalsModel", "ParamIndex", "active_bumps", "delta", "eval_phi",
    "eval_phi_sensitivity", "heaviside", "property_map", "property_sensitivity",
    "ForwardModel", "SolverFailure",
    "CtGeometry", "CtModel", "ct_forward", "full_view_angles", "limited_view_angles",
    "ErtModel", "ErtSetup", "ert_solve", "make_ert_setup",
    "DotModel", "DotSetup", "dot_solve", "make_dot_setup",
    "SolverConfig", "SolverState", "run",
    "Phantom", "jaccard", "shape_metrics",
    "Experiment", "ExperimentConfig", "default_config", "load_config",
]

__version__ = "0.1.0"
