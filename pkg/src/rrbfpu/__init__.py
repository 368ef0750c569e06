"""Rational RBF partition-of-unity surface reconstruction."""
from .augment import CLASSIC_LEVELS, RATIONAL_LEVELS, LevelValues, make_offsurface
from .bench import cross_validation_error, epsilon_sweep, rmse_surface, sample_surface
from .config import RunConfig
from .errors import (ConditioningError, DenominatorNearZero, EigenSolverError,
                     PointCloudFormatError, RRBFError, UncoveredPoint, ZeroFunctionValue)
from .io import read_mesh, read_point_cloud, write_mesh, write_points
from .kernels import KernelSpec, kernel_matrix
from .normals import estimate_normals
from .pipeline import reconstruct
from .pu import build_covering, fit_pu
from .surface import eval_grid, marching_cubes, mesh_stats

__all__ = [
    "CLASSIC_LEVELS", "RATIONAL_LEVELS", "LevelValues", "make_offsurface",
    "cross_validation_error", "epsilon_sweep", "rmse_surface", "sample_surface",
    "RunConfig", "ConditioningError", "DenominatorNearZero", "EigenSolverError",
    "PointCloudFormatError", "RRBFError", "UncoveredPoint", "ZeroFunctionValue",
    "read_mesh", "read_point_cloud", "write_mesh", "write_points", "KernelSpec",
    "kernel_matrix", "estimate_normals", "reconstruct", "build_covering", "fit_pu",
    "eval_grid", "marching_cubes", "mesh_stats",
]
