"""Motion planners for fibered topological complexity, with sampled certification."""
from . import errors, geometry, paths, planner, verify
from .geometry import get_space
from .paths import ParamPath, concat_halves, concat_thirds, geodesic
from .planner import Planner, evaluate_planner
from .verify import VerificationConfig, VerificationReport, verify_planner

__version__ = "0.1.0"
