"""10-fold CV error and mesh audit of RRBF-PU against RBF-PU on a scan.

    python3 scripts/bunny_crossval.py [data/bunny_28088.xyz] [--folds 10] [--eig-method dense]
"""
import argparse
import json
import time

from rrbfpu import pipeline
from rrbfpu.bench import cross_validation_error
from rrbfpu.cli import Normalization
from rrbfpu.config import RunConfig
from rrbfpu.io import read_point_cloud
from rrbfpu.surface import mesh_stats


def run(path, folds=10, eig_method="dense", epsilon=1.0, seed=0, mesh=True):
    points, normals = read_point_cloud(path)
    points = Normalization.fit(points).forward(points)
    out = {"points": int(points.shape[0])}
    for method in ("rbf", "rrbf"):
        cfg = RunConfig(method=method, kernel="wendland", epsilon=epsilon, folds=folds,
                        eig_method=eig_method, seed=seed)
        t0 = time.perf_counter()
        cv = cross_validation_error(points, cfg, seed=seed, normals=normals)
        row = {"cv": cv, "cv_seconds": round(time.perf_counter() - t0, 1)}
        if mesh:
            t0 = time.perf_counter()
            st = mesh_stats(pipeline.reconstruct(points, cfg, normals=normals).mesh)
            row.update(triangles=st.triangles, boundary_edges=st.boundary_edges,
                       nonmanifold_edges=st.nonmanifold_edges,
                       mesh_seconds=round(time.perf_counter() - t0, 1))
        out[method] = row
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("path", nargs="?", default="data/bunny_28088.xyz")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--eig-method", choices=("dacg", "dense"), default="dense")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    print(json.dumps(run(args.path, args.folds, args.eig_method, args.epsilon, args.seed),
                     indent=2))


if __name__ == "__main__":
    main()
