"""Off-surface augmentation of a point cloud for implicit interpolation."""
import warnings
from dataclasses import dataclass

import numpy as np

from .spatial import as_points, separation_distance

SURFACE, PLUS, MINUS = 0, 1, -1


@dataclass(frozen=True)
class LevelValues:
    """Data values on the surface (a), outside (b) and inside (c)."""

    a: float = 2.0
    b: float = 3.0
    c: float = 1.0

    def __post_init__(self):
        if len({self.a, self.b, self.c}) != 3:
            raise ValueError("level values must be pairwise distinct")

    @property
    def nonzero(self):
        return self.a != 0 and self.b != 0 and self.c != 0


RATIONAL_LEVELS = LevelValues(2.0, 3.0, 1.0)
CLASSIC_LEVELS = LevelValues(0.0, 1.0, -1.0)


@dataclass
class AugmentedDataset:
    nodes: np.ndarray
    values: np.ndarray
    delta: float
    origin: np.ndarray  # SURFACE / PLUS / MINUS per node
    parent: np.ndarray  # index of the generating surface point
    levels: LevelValues

    def __len__(self):
        return self.nodes.shape[0]

    def subset(self, mask):
        """Nodes whose parent surface point is selected by `mask`."""
        keep = np.asarray(mask, dtype=bool)[self.parent]
        return AugmentedDataset(self.nodes[keep], self.values[keep], self.delta,
                                self.origin[keep], self.parent[keep], self.levels)


def make_offsurface(points, normals, xi=1.0 / 3.0, levels=RATIONAL_LEVELS,
                    domain=(0.0, 1.0), delta=None):
    """Add x_i + delta n_i (value b) and x_i - delta n_i (value c).

    `delta` defaults to xi times the separation distance of `points`.
    Points with a zero normal only contribute their surface node, and
    off-surface nodes outside the closed box `domain` are dropped.
    """
    pts = as_points(points)
    n = pts.shape[0]
    nrm = getattr(normals, "normals", normals)
    nrm = np.asarray(nrm, dtype=float).reshape(n, 3)
    degenerate = ~np.any(nrm != 0, axis=1)
    if degenerate.all():
        raise ValueError("all normals are degenerate")
    if delta is None:
        if not xi > 0:
            raise ValueError("xi must be positive")
        if xi > 1.0 / 3.0:
            warnings.warn(f"xi = {xi:g} > 1/3 may place off-surface points "
                          "too close together", stacklevel=2)
        q = separation_distance(pts) if n > 1 else 0.0
        if q == 0.0:
            raise ValueError("separation distance is zero (duplicate points)")
        delta = xi * q
    elif not delta > 0:
        raise ValueError("delta must be positive")
    lo, hi = domain
    good = np.flatnonzero(~degenerate)
    plus = pts[good] + delta * nrm[good]
    minus = pts[good] - delta * nrm[good]
    in_plus = np.all((plus >= lo) & (plus <= hi), axis=1)
    in_minus = np.all((minus >= lo) & (minus <= hi), axis=1)
    nodes = np.vstack([pts, plus[in_plus], minus[in_minus]])
    values = np.concatenate([np.full(n, levels.a),
                             np.full(in_plus.sum(), levels.b),
                             np.full(in_minus.sum(), levels.c)])
    origin = np.concatenate([np.full(n, SURFACE), np.full(in_plus.sum(), PLUS),
                             np.full(in_minus.sum(), MINUS)]).astype(np.int8)
    parent = np.concatenate([np.arange(n), good[in_plus], good[in_minus]])
    return AugmentedDataset(nodes, values, float(delta), origin, parent, levels)
