"""End-to-end reconstruction: normals, augmentation, PU fit, grid, iso-surface."""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .augment import make_offsurface
from .kernels import KernelSpec
from .normals import OrientedNormals, estimate_normals
from .pu import build_covering, fit_pu
from .spatial import as_points
from .surface import eval_grid, marching_cubes, pad_field

log = logging.getLogger(__name__)


@dataclass
class Reconstruction:
    data: object
    interp: object
    field: object
    mesh: object
    timings: dict = field(default_factory=dict)


def oriented(points, normals, cfg):
    """Normals as OrientedNormals, estimating them when absent."""
    if normals is None:
        return estimate_normals(points, K=cfg.K)
    nrm = np.asarray(normals, dtype=float)
    length = np.linalg.norm(nrm, axis=1)
    degenerate = length == 0
    nrm = np.where(degenerate[:, None], 0.0, nrm / np.where(degenerate, 1.0, length)[:, None])
    return OrientedNormals(nrm, degenerate)


def fit(data, cfg):
    """PU interpolant of an augmented dataset under `cfg`."""
    covering = build_covering(cfg.gamma, len(data))
    return fit_pu(data, covering, KernelSpec(cfg.kernel, cfg.epsilon), cfg.method,
                  min_points=cfg.min_points, grow_empty=cfg.grow_empty,
                  sentinel=cfg.sentinel, eig_method=cfg.eig_method,
                  tol=cfg.eig_tol, max_iter=cfg.eig_max_iter, workers=cfg.threads)


def augment(points, normals, cfg):
    return make_offsurface(points, normals, xi=cfg.xi, levels=cfg.level_values,
                           domain=(0.0, cfg.gamma))


def reconstruct(points, cfg, normals=None, data=None):
    """Run the full pipeline; `data` short-cuts normal estimation and augmentation."""
    timings = {}
    t0 = time.perf_counter()
    if data is None:
        pts = as_points(points)
        data = augment(pts, oriented(pts, normals, cfg), cfg)
    timings["augment"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    interp = fit(data, cfg)
    timings["fit"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    grid = eval_grid(interp, (0.0, cfg.gamma), cfg.resolution, workers=cfg.threads)
    timings["grid"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    lv = cfg.level_values
    mesh = marching_cubes(pad_field(grid, lv.b) if cfg.cap_boundary else grid, lv.a)
    timings["mesh"] = time.perf_counter() - t0
    log.info("reconstruction: N=%d patches=%d triangles=%d timings=%s", len(data),
             len(interp.fits), len(mesh.triangles),
             {k: round(v, 3) for k, v in timings.items()})
    return Reconstruction(data, interp, grid, mesh, timings)
