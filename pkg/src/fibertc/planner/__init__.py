"""Planners, their built-in instances and the constructions acting on them."""
from .core import CatEntry, CatWitness, HomotopySpec, Piece, Planner, evaluate_planner
from .builtins import (ccw_planner, circle_planner, convex_planner, diagonal_planner,
                       product_planner, shorter_arc_planner, sphere_antipodal_planner,
                       torus_planner)
from .constructions import (based_loop_planner_from_cat, cat_cover_to_planner,
                            combine_cover_planners, dominate_planner, planner_to_cat_cover,
                            restrict_planner, to_loop_planner, transport_bundle_iso,
                            transport_fhe, transport_fhe_back)
from . import controls
