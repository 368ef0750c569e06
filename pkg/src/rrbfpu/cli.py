"""Command-line driver: ``python -m rrbfpu {normals,reconstruct,sweep,crossval}``.

Failures print one line ``error: <Kind>: <message>`` on stderr and exit
nonzero (2 for usage errors, 1 otherwise). Log verbosity comes from the
RRBFPU_LOG_LEVEL environment variable (default WARNING).
"""
import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import bench, pipeline
from .config import RunConfig
from .errors import RRBFError
from .io import read_point_cloud, write_mesh, write_points
from .surface import IsoMesh, mesh_stats

log = logging.getLogger("rrbfpu")

LOG_ENV = "RRBFPU_LOG_LEVEL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class Normalization:
    """x_box = (x - shift) * scale + offset maps the input into the margin box."""

    shift: np.ndarray
    scale: float
    offset: np.ndarray

    @classmethod
    def fit(cls, points, gamma=1.0, margin=0.05):
        lo, hi = points.min(axis=0), points.max(axis=0)
        extent = float((hi - lo).max())
        scale = (1.0 - 2.0 * margin) * gamma / extent if extent > 0 else 1.0
        # centre the data inside the box
        offset = 0.5 * gamma - 0.5 * (hi - lo) * scale
        return cls(lo, scale, offset)

    def forward(self, x):
        return (x - self.shift) * self.scale + self.offset

    def inverse(self, x):
        return (x - self.offset) / self.scale + self.shift


def _common(p, method=True):
    if method:
        p.add_argument("--method", choices=("rbf", "rrbf"), default="rrbf")
    p.add_argument("--kernel", choices=("gaussian", "wendland"), default="wendland")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--K", type=int, default=10, help="neighbours for normal estimation")
    p.add_argument("--xi", type=float, default=1.0 / 3.0)
    p.add_argument("--levels", type=float, nargs=3, metavar=("A", "B", "C"))
    p.add_argument("--resolution", type=int, default=80)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--eig-method", choices=("dacg", "dense"), default="dacg")
    p.add_argument("--sentinel", choices=("nearest", "outside", "error"), default="nearest")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=True,
                   help="rescale input into [0.05, 0.95]^3 of the domain (default on)")


def build_parser():
    parser = _Parser(prog="rrbfpu", description="RRBF-PU implicit surface reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normals", help="estimate and orient normals, write 6-column XYZ")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--K", type=int, default=10)

    p = sub.add_parser("reconstruct", help="point cloud to iso-surface mesh")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help=".ply or .obj")
    _common(p)

    p = sub.add_parser("sweep", help="shape-parameter sweep on an analytic surface, CSV out")
    p.add_argument("--surface", choices=sorted(bench.SURFACES), default="f1")
    p.add_argument("--n", type=int, default=1089)
    p.add_argument("--methods", nargs="+", choices=("rbf", "rrbf"), default=["rbf", "rrbf"])
    p.add_argument("--eps-count", type=int, default=20)
    p.add_argument("--eps-min", type=float, default=1e-3)
    p.add_argument("--eps-max", type=float, default=1e2)
    p.add_argument("-o", "--output", help="CSV path (stdout when omitted)")
    _common(p, method=False)
    p.set_defaults(kernel="gaussian")

    p = sub.add_parser("crossval", help="k-fold CV error of a point cloud, printed on stdout")
    p.add_argument("input")
    p.add_argument("--folds", type=int, default=10)
    _common(p)
    return parser


def _config(args, **extra):
    fields = dict(kernel=args.kernel, epsilon=args.epsilon, K=args.K, xi=args.xi,
                  levels=tuple(args.levels) if args.levels else None,
                  resolution=args.resolution, gamma=args.gamma, seed=args.seed,
                  threads=args.threads, eig_method=args.eig_method,
                  sentinel=args.sentinel, normalize=args.normalize)
    if hasattr(args, "method"):
        fields["method"] = args.method
    if hasattr(args, "folds"):
        fields["folds"] = args.folds
    fields.update(extra)
    cfg = RunConfig(**fields)
    log.info("resolved config: %s", json.dumps(cfg.resolved(), sort_keys=True))
    return cfg


def _load(path, cfg):
    points, normals = read_point_cloud(path)
    norm = None
    if cfg.normalize:
        norm = Normalization.fit(points, cfg.gamma)
        points = norm.forward(points)
        log.info("normalization: shift=%s scale=%.9g offset=%s",
                 norm.shift.tolist(), norm.scale, norm.offset.tolist())
    return points, normals, norm


def cmd_normals(args):
    points, _ = read_point_cloud(args.input)
    cfg = RunConfig(K=args.K)
    log.info("resolved config: %s", json.dumps(cfg.resolved(), sort_keys=True))
    est = pipeline.oriented(points, None, cfg)
    write_points(args.output, points, est.normals)
    print(json.dumps({"points": int(points.shape[0]),
                      "degenerate": int(est.degenerate.sum())}))


def cmd_reconstruct(args):
    cfg = _config(args, input=args.input, output=args.output)
    points, normals, norm = _load(args.input, cfg)
    rec = pipeline.reconstruct(points, cfg, normals=normals)
    mesh = rec.mesh
    if norm is not None and len(mesh.vertices):
        mesh = IsoMesh(norm.inverse(mesh.vertices), mesh.triangles, mesh.level)
    write_mesh(mesh, args.output)
    st = mesh_stats(mesh)
    print(json.dumps({"vertices": st.vertices, "triangles": st.triangles,
                      "boundary_edges": st.boundary_edges,
                      "nonmanifold_edges": st.nonmanifold_edges,
                      "bbox_min": st.bbox_min.tolist(), "bbox_max": st.bbox_max.tolist(),
                      "seconds": {k: round(v, 4) for k, v in rec.timings.items()}}))


def cmd_sweep(args):
    cfg = _config(args)
    eps = bench.epsilon_grid(args.eps_count, args.eps_min, args.eps_max)
    res = bench.epsilon_sweep(args.surface, args.n, kernel=cfg.kernel,
                              methods=tuple(args.methods), epsilons=eps, seed=cfg.seed,
                              config=cfg)
    if args.output:
        res.to_csv(args.output)
    else:
        res.to_csv(sys.stdout)


def cmd_crossval(args):
    cfg = _config(args, input=args.input)
    points, normals, _ = _load(args.input, cfg)
    err = bench.cross_validation_error(points, cfg, seed=cfg.seed, normals=normals)
    print(f"{err:.9g}")


COMMANDS = {"normals": cmd_normals, "reconstruct": cmd_reconstruct,
            "sweep": cmd_sweep, "crossval": cmd_crossval}


def main(argv=None):
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except (RRBFError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0
