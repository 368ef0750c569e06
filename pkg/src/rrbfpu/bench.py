"""Analytic test surfaces, error metrics, shape-parameter sweeps and cross-validation."""
import csv
import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import pipeline
from .config import RunConfig
from .errors import RRBFError
from .spatial import as_points

log = logging.getLogger(__name__)

CSV_COLUMNS = ("surface", "n", "method", "kernel", "epsilon", "rmse", "seconds", "seed")


@dataclass(frozen=True)
class TestSurface:
    name: str
    func: Callable
    grad: Callable
    box: tuple = (0.0, 1.0)

    __test__ = False  # not a pytest class

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float).reshape(-1, 3))


def _f1(x):
    return ((x - 0.5) ** 2).sum(axis=1) - 0.25


def _f1_grad(x):
    return 2.0 * (x - 0.5)


def _f2(x):
    return _f1(x) + np.sin(4.0 * x[:, 1]) ** 4


def _f2_grad(x):
    g = _f1_grad(x)
    s = np.sin(4.0 * x[:, 1])
    g[:, 1] += 16.0 * s ** 3 * np.cos(4.0 * x[:, 1])
    return g


SPHERE = TestSurface("f1", _f1, _f1_grad)
# the second coordinate plays the role of y
BUMPY = TestSurface("f2", _f2, _f2_grad)
SURFACES = {"f1": SPHERE, "f2": BUMPY}


def _project(surface, x, max_iter=60, tol=1e-10):
    """Damped Newton steps x <- x - F grad / |grad|^2 toward the zero set."""
    x = x.copy()
    val = surface.func(x)
    for _ in range(max_iter):
        active = np.abs(val) > tol
        if not active.any():
            break
        g = surface.grad(x[active])
        g2 = (g ** 2).sum(axis=1)
        step = np.where(g2 > 0, val[active] / np.where(g2 > 0, g2, 1.0), 0.0)
        xa = x[active]
        va = np.abs(val[active])
        damp = np.ones(xa.shape[0])
        trial = xa - step[:, None] * g
        tv = surface.func(trial)
        # halve the step where the residual does not drop
        for _ in range(20):
            worse = np.abs(tv) >= va
            if not worse.any():
                break
            damp[worse] *= 0.5
            trial[worse] = xa[worse] - (damp[worse] * step[worse])[:, None] * g[worse]
            tv[worse] = surface.func(trial[worse])
        x[active] = trial
        val[active] = tv
    return x, val


def sample_surface(surface, n, seed=0, tol=1e-10):
    """n seeded random points on the zero set inside the surface's box.

    Uniform random points are projected by damped Newton; points that do
    not converge or leave the box are redrawn (the count is logged).
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    rng = np.random.default_rng(seed)
    lo, hi = surface.box
    out = []
    have = 0
    rejected = 0
    while have < n:
        x, val = _project(surface, rng.uniform(lo, hi, size=(2 * (n - have) + 16, 3)))
        ok = (np.abs(val) <= tol) & np.all((x >= lo) & (x <= hi), axis=1)
        rejected += int((~ok).sum())
        good = x[ok][: n - have]
        out.append(good)
        have += good.shape[0]
    if rejected:
        log.debug("sample_surface(%s): %d candidates redrawn", surface.name, rejected)
    return np.vstack(out)


def rmse_surface(mesh, surface):
    """Root mean square of the implicit residual over the mesh vertices."""
    v = np.asarray(mesh.vertices).reshape(-1, 3)
    if v.shape[0] == 0:
        raise ValueError("empty mesh")
    return float(np.sqrt(np.mean(surface(v) ** 2)))


def epsilon_grid(count=20, lo=1e-3, hi=1e2):
    return np.logspace(np.log10(lo), np.log10(hi), count)


@dataclass
class SweepRow:
    surface: str
    n: int
    method: str
    kernel: str
    epsilon: float
    rmse: float  # NaN marks a failed run
    seconds: float
    seed: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    n: int = 0
    seed: int = 0

    def best(self, method):
        """(epsilon, rmse) with the smallest RMSE for a method, or None."""
        rows = [r for r in self.rows if r.method == method and np.isfinite(r.rmse)]
        if not rows:
            return None
        r = min(rows, key=lambda r: r.rmse)
        return r.epsilon, r.rmse

    def to_csv(self, path_or_file):
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([r.surface, r.n, r.method, r.kernel, f"{r.epsilon:.9g}",
                            "" if not np.isfinite(r.rmse) else f"{r.rmse:.9g}",
                            f"{r.seconds:.4f}", r.seed])
        finally:
            if own:
                fh.close()


def epsilon_sweep(surface, n, kernel="gaussian", methods=("rbf", "rrbf"), epsilons=None,
                  seed=0, config=None, points=None):
    """RMSE of the reconstructed iso-surface for every (epsilon, method).

    Normals and off-surface points are built once per method; failed fits
    (conditioning, eigensolver) are recorded with a NaN RMSE.
    """
    surface = SURFACES[surface] if isinstance(surface, str) else surface
    epsilons = epsilon_grid() if epsilons is None else np.atleast_1d(epsilons)
    if len(epsilons) == 0:
        raise ValueError("empty epsilon grid")
    base = config or RunConfig()
    pts = sample_surface(surface, n, seed) if points is None else as_points(points)
    normals = pipeline.oriented(pts, None, replace(base, method="rrbf"))
    result = SweepResult(n=pts.shape[0], seed=seed)
    for method in methods:
        cfg = replace(base, method=method, kernel=kernel,
                      levels=None if base.method != method else base.levels)
        data = pipeline.augment(pts, normals, cfg)
        for eps in epsilons:
            cfg_e = replace(cfg, epsilon=float(eps))
            t0 = time.perf_counter()
            try:
                rec = pipeline.reconstruct(None, cfg_e, data=data)
                rmse = rmse_surface(rec.mesh, surface)
            except (RRBFError, ValueError) as exc:
                log.info("sweep %s eps=%.3g failed: %s", method, eps, exc)
                rmse = float("nan")
            result.rows.append(SweepRow(surface.name, pts.shape[0], method, kernel,
                                        float(eps), rmse, time.perf_counter() - t0, seed))
    return result


def _folds(n, folds, seed):
    rng = np.random.default_rng(seed)
    return np.array_split(rng.permutation(n), folds)


def cross_validation_error(points, config=None, folds=None, seed=0, normals=None):
    """k-fold CV error of the surface level over held-out surface points.

    Each fold drops its surface points together with their off-surface
    children, refits, and measures I(x_i) - a at the dropped points.
    """
    cfg = config or RunConfig()
    folds = cfg.folds if folds is None else folds
    pts = as_points(points)
    n = pts.shape[0]
    if not 2 <= folds <= n:
        raise ValueError(f"folds must be in [2, {n}]")
    data = pipeline.augment(pts, pipeline.oriented(pts, normals, cfg), cfg)
    a = cfg.level_values.a
    sq = np.empty(n)
    for held in _folds(n, folds, seed):
        mask = np.ones(n, dtype=bool)
        mask[held] = False
        interp = pipeline.fit(data.subset(mask), cfg)
        sq[held] = (interp.evaluate(pts[held], workers=cfg.threads) - a) ** 2
    return float(np.sqrt(sq.mean()))
