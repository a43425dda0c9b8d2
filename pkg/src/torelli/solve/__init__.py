"""Nonlinear solvers: LM, singular points, homotopy continuation, witness sets, quadric extraction."""
from .homotopy import (AffineChart, PathPoint, TooManyPaths, TrackerOptions, homogenize, solve_square_system,
                       track_paths)
from .lm import LMOptions, LMResult, NoProgress, ResidualMap, levenberg_marquardt
from .quadrics import QuadricOptions, extract_quadrics
from .singular import BudgetExhausted, GenusTooSmall, find_singular_point, random_riemann_matrix, singular_system
from .witness import WitnessReport, witness_count

__all__ = ["AffineChart", "BudgetExhausted", "GenusTooSmall", "LMOptions", "LMResult", "NoProgress", "PathPoint",
           "QuadricOptions", "ResidualMap", "TooManyPaths", "TrackerOptions", "WitnessReport", "extract_quadrics",
           "find_singular_point", "homogenize", "levenberg_marquardt", "random_riemann_matrix",
           "singular_system", "solve_square_system", "track_paths", "witness_count"]
