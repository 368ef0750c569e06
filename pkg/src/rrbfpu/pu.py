"""Partition-of-unity covering, Shepard weights and the blended interpolant."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UncoveredPoint, ZeroFunctionValue
from .augment import SURFACE
from .interpolants import LocalRRBF, fit_rbf_local, fit_rrbf_local
from .kernels import wendland_c2
from .spatial import CellIndex, as_points

log = logging.getLogger(__name__)

METHODS = ("rbf", "rrbf")


def patches_per_side(N):
    """ceil(N^(1/3) / 2), computed exactly in integers."""
    if N < 1:
        raise ValueError("N must be positive")
    k = max(1, int(round(N ** (1.0 / 3.0) / 2.0)) - 1)
    while 8 * k ** 3 < N:
        k += 1
    while k > 1 and 8 * (k - 1) ** 3 >= N:
        k -= 1
    return k


@dataclass
class Covering:
    """Regular grid of spherical patches over the cube [0, gamma]^3."""

    gamma: float
    per_side: int
    radius: float
    centers: np.ndarray

    @property
    def d(self):
        return self.centers.shape[0]


def build_covering(gamma, N):
    """d = ceil(N^(1/3)/2)^3 patches of radius gamma / d^(1/3) centred on cells."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    k = patches_per_side(N)
    axis = (np.arange(k) + 0.5) * gamma / k
    centers = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"),
                       axis=-1).reshape(-1, 3)
    return Covering(float(gamma), k, gamma / k, centers)


def assign_nodes(covering, nodes, min_points=10, growth=1.5, max_steps=5,
                 grow_empty=False):
    """Node indices and (possibly grown) radius of every patch.

    A patch holding between 1 and `min_points` - 1 nodes has its radius
    multiplied by `growth` up to `max_steps` times. Empty patches stay empty
    unless `grow_empty` is set.
    """
    X = as_points(nodes, "nodes")
    index = CellIndex(X, covering.radius)
    members, radii = [], np.empty(covering.d)
    for j, c in enumerate(covering.centers):
        r = covering.radius
        ids = index.ball_query(c, r)
        steps = 0
        if ids.size == 0 and not grow_empty:
            steps = max_steps
        while ids.size < min_points and steps < max_steps:
            r *= growth
            steps += 1
            ids = index.ball_query(c, r)
        members.append(ids)
        radii[j] = r
    return members, radii


def raw_weights(centers, radii, x):
    """Unnormalized Wendland weights of each patch at the rows of x."""
    dist = np.linalg.norm(np.asarray(x, dtype=float)[:, None, :] - centers[None], axis=2)
    return wendland_c2(dist, 1.0 / radii[None, :])


def shepard_weights(covering, x, radii=None, active=None):
    """Sparse Shepard weights at a single point: list of (patch, weight).

    `active` restricts the partition to patches carrying a fit. Raises
    UncoveredPoint when no active patch reaches x.
    """
    x = np.asarray(x, dtype=float).reshape(1, 3)
    radii = np.full(covering.d, covering.radius) if radii is None else np.asarray(radii)
    ids = np.arange(covering.d) if active is None else np.asarray(active)
    w = raw_weights(covering.centers[ids], radii[ids], x)[0]
    total = w.sum()
    if not total > 0:
        raise UncoveredPoint(f"point {x[0]} is not covered by any patch", location=x[0])
    nz = np.flatnonzero(w > 0)
    return [(int(ids[i]), float(w[i] / total)) for i in nz]


@dataclass
class PUInterpolant:
    covering: Covering
    method: str
    levels: object
    patch_ids: np.ndarray  # patches carrying a fit
    centers: np.ndarray
    radii: np.ndarray
    fits: list
    members: list = field(repr=False, default=None)
    sentinel: str = "nearest"
    fallbacks: int = 0
    nodes: np.ndarray = field(repr=False, default=None)  # off-surface nodes for the sentinel
    values: np.ndarray = field(repr=False, default=None)
    _node_index: object = field(repr=False, default=None, compare=False)

    def sentinel_values(self, X):
        """Fill-in values for uncovered points.

        ``"nearest"`` copies the value of the nearest off-surface node (c on
        the inner side, b on the outer side); ``"outside"`` uses b everywhere.
        """
        if self.sentinel == "outside" or self.nodes is None or len(self.nodes) == 0:
            return np.full(X.shape[0], float(self.levels.b))
        if self._node_index is None:
            self._node_index = CellIndex(self.nodes, 0.5 * self.covering.radius)
        nearest, _ = self._node_index.knn_batch(X, 1)
        return self.values[nearest[:, 0]]

    def _contribution(self, j, X, index):
        ids = index.ball_query(self.centers[j], self.radii[j])
        if ids.size == 0:
            return ids, None, None
        dist = np.linalg.norm(X[ids] - self.centers[j], axis=1)
        w = wendland_c2(dist, 1.0 / self.radii[j])
        fit = self.fits[j]
        if isinstance(fit, LocalRRBF):
            val, ok = fit.evaluate(X[ids])
            ids, w, val = ids[ok], w[ok], val[ok]
        else:
            val = fit(X[ids])
        return ids, w, w * val

    def evaluate(self, x, workers=1):
        """Blend of the local fits at each row of x.

        Points reached by no fitted patch get a sentinel value (see
        `sentinel_values`) or raise UncoveredPoint under the "error" policy.
        """
        X = np.asarray(x, dtype=float).reshape(-1, 3)
        num = np.zeros(X.shape[0])
        den = np.zeros(X.shape[0])
        if len(self.fits):
            index = CellIndex(X, float(np.median(self.radii)))
            jobs = range(len(self.fits))
            if workers > 1:
                with ThreadPoolExecutor(workers) as pool:
                    parts = pool.map(lambda j: self._contribution(j, X, index), jobs)
                    parts = list(parts)
            else:
                parts = (self._contribution(j, X, index) for j in jobs)
            # fixed patch order keeps the sums bit-identical for any worker count
            for ids, w, wv in parts:
                if ids.size:
                    den[ids] += w
                    num[ids] += wv
        covered = den > 0
        out = np.empty(X.shape[0])
        out[covered] = num[covered] / den[covered]
        if not covered.all():
            if self.sentinel == "error":
                bad = X[np.argmin(covered)]
                raise UncoveredPoint(f"point {bad} is not covered by any fitted patch",
                                     location=bad)
            out[~covered] = self.sentinel_values(X[~covered])
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.evaluate(x)
        return out if x.ndim > 1 else float(out[0])

    def weights_at(self, x):
        """Shepard weights of the fitted patches at one point."""
        out = shepard_weights(self.covering, x, radii=self._all_radii(),
                              active=self.patch_ids)
        return out

    def _all_radii(self):
        r = np.full(self.covering.d, self.covering.radius)
        r[self.patch_ids] = self.radii
        return r


SENTINELS = ("nearest", "outside", "error")


def fit_pu(data, covering, kernel, method="rrbf", min_points=10, growth=1.5,
           max_steps=5, grow_empty=False, eig_method="dacg", tol=1e-8, max_iter=500,
           sentinel="nearest", workers=1):
    """Fit one local interpolant per nonempty patch of the covering."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if sentinel not in SENTINELS:
        raise ValueError(f"unknown sentinel policy {sentinel!r}")
    if method == "rrbf" and np.any(data.values == 0):
        raise ZeroFunctionValue("rational fit needs nonzero data values; "
                                "use level values with a, b, c != 0")
    members, radii = assign_nodes(covering, data.nodes, min_points, growth, max_steps,
                                  grow_empty)
    active = [j for j, ids in enumerate(members) if ids.size]

    def fit_one(j):
        ids = members[j]
        if method == "rbf":
            return fit_rbf_local(data.nodes[ids], data.values[ids], kernel, patch=j)
        return fit_rrbf_local(data.nodes[ids], data.values[ids], kernel,
                              eig_method=eig_method, tol=tol, max_iter=max_iter,
                              patch=j)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            fits = list(pool.map(fit_one, active))
    else:
        fits = [fit_one(j) for j in active]
    fallbacks = sum(1 for f in fits
                    if isinstance(f, LocalRRBF) and f.eig.method == "dense-fallback")
    if fallbacks:
        log.info("%d of %d patch eigensolves fell back to the dense solver",
                 fallbacks, len(fits))
    active = np.asarray(active, dtype=np.int64)
    off = data.origin != SURFACE
    return PUInterpolant(covering, method, data.levels, active,
                         covering.centers[active], radii[active], fits,
                         members=members, sentinel=sentinel, fallbacks=fallbacks,
                         nodes=data.nodes[off], values=data.values[off])


def eval_pu(interp, x):
    return interp(x)
