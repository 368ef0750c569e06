"""Normal estimation by local PCA and orientation along a minimal spanning tree.

Unoriented normals come from the covariance of each point's K nearest
neighbours. Orientation is propagated breadth-first over the minimal
spanning tree of the Riemann graph, whose edge costs 1 - |n_i . n_k| are
small for nearly parallel tangent planes.
"""
from collections import deque
from dataclasses import dataclass

import numpy as np

from .spatial import CellIndex, as_points, default_cell_size

DEGENERACY_RATIO = 0.5


@dataclass
class TangentPlanes:
    """Per-point tangent planes (struct of arrays)."""

    centers: np.ndarray
    normals: np.ndarray
    eigenvalues: np.ndarray  # descending per row
    degenerate: np.ndarray

    def __len__(self):
        return self.centers.shape[0]


@dataclass
class RiemannGraph:
    n: int
    edges: np.ndarray  # (m, 2), i < k
    weights: np.ndarray


@dataclass
class OrientedNormals:
    normals: np.ndarray
    degenerate: np.ndarray


def _index(points, index):
    return CellIndex(points, default_cell_size(points)) if index is None else index


def estimate_tangent_planes(points, K=10, ratio=DEGENERACY_RATIO, index=None):
    """PCA tangent plane from the K nearest points (the point included).

    A normal is kept when lambda_3 <= ratio * lambda_2; otherwise, or when
    the neighbourhood is collapsed to a point or a line, the plane is flagged
    degenerate and its normal set to zero.
    """
    pts = as_points(points)
    n = pts.shape[0]
    if not 3 <= K <= n:
        raise ValueError(f"K must be in [3, {n}], got {K}")
    nbrs, _ = _index(pts, index).knn_batch(pts, K)
    local = pts[nbrs]
    centers = local.mean(axis=1)
    diff = local - centers[:, None, :]
    cov = np.einsum("nki,nkj->nij", diff, diff)
    w, v = np.linalg.eigh(cov)
    w = w[:, ::-1]
    normals = v[:, :, 0].copy()
    lam1, lam2, lam3 = w[:, 0], w[:, 1], w[:, 2]
    tiny = np.finfo(float).tiny
    degenerate = (lam1 <= tiny) | (lam2 <= 1e-12 * lam1) | (lam3 > ratio * lam2)
    normals[degenerate] = 0.0
    return TangentPlanes(centers, normals, w, degenerate)


def build_riemann_graph(points, planes, K=10, index=None):
    """Edges (i, k) whenever k is among the K nearest other points of i, or vice versa."""
    pts = as_points(points)
    n = pts.shape[0]
    if n < 2:
        return RiemannGraph(n, np.empty((0, 2), dtype=np.int64), np.empty(0))
    k = min(K + 1, n)
    nbrs, _ = _index(pts, index).knn_batch(pts, k)
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    keep = rows != cols
    pairs = np.stack([np.minimum(rows[keep], cols[keep]),
                      np.maximum(rows[keep], cols[keep])], axis=1)
    pairs = np.unique(pairs, axis=0)
    nrm = planes.normals
    dots = np.abs(np.einsum("ij,ij->i", nrm[pairs[:, 0]], nrm[pairs[:, 1]]))
    weights = np.clip(1.0 - dots, 0.0, 1.0)
    return RiemannGraph(n, pairs, weights)


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def minimal_spanning_tree(graph):
    """Kruskal's algorithm; returns tree edges (a forest if disconnected)."""
    if graph.n == 0:
        raise ValueError("empty graph")
    parent = list(range(graph.n))
    rank = [0] * graph.n
    chosen = []
    for e in np.argsort(graph.weights, kind="stable"):
        i, k = graph.edges[e]
        ri, rk = _find(parent, int(i)), _find(parent, int(k))
        if ri == rk:
            continue
        if rank[ri] < rank[rk]:
            ri, rk = rk, ri
        parent[rk] = ri
        rank[ri] += rank[ri] == rank[rk]
        chosen.append(e)
        if len(chosen) == graph.n - 1:
            break
    chosen = np.asarray(chosen, dtype=np.int64)
    return graph.edges[chosen].reshape(-1, 2), graph.weights[chosen]


def _seed(component, points, rule, degenerate):
    usable = component[~degenerate[component]]
    if usable.size:
        component = usable
    if rule == "max_z":
        z = points[component, 2]
        return component[np.flatnonzero(z == z.max())[0]]
    if rule == "first":
        return component[0]
    raise ValueError(f"unknown seed rule {rule!r}")


def orient_normals(planes, tree, points=None, seed_rule="max_z"):
    """Propagate a consistent orientation along the tree edges.

    Each connected component starts from its own seed. With ``"max_z"`` the
    seed is the highest point and its normal is turned toward +z; with
    ``"first"`` the lowest-index point keeps its sign. Degenerate (zero)
    normals pass on the orientation of their nearest oriented ancestor.
    """
    normals = planes.normals.copy()
    n = normals.shape[0]
    edges = tree[0] if isinstance(tree, tuple) else tree
    adj = [[] for _ in range(n)]
    for i, k in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        adj[i].append(k)
        adj[k].append(i)
    if points is None:
        points = planes.centers
    seen = np.zeros(n, dtype=bool)
    for start in range(n):
        if seen[start]:
            continue
        # collect the component first so the seed rule can see all of it
        comp = [start]
        seen[start] = True
        head = 0
        while head < len(comp):
            for k in adj[comp[head]]:
                if not seen[k]:
                    seen[k] = True
                    comp.append(k)
            head += 1
        comp = np.sort(np.asarray(comp))
        root = _seed(comp, points, seed_rule, planes.degenerate)
        if seed_rule == "max_z" and normals[root, 2] < 0:
            normals[root] = -normals[root]
        ref = {root: normals[root]}
        queue = deque([root])
        visited = {root}
        while queue:
            i = queue.popleft()
            for k in adj[i]:
                if k in visited:
                    continue
                visited.add(k)
                if np.dot(ref[i], normals[k]) < 0:
                    normals[k] = -normals[k]
                ref[k] = normals[k] if np.any(normals[k]) else ref[i]
                queue.append(k)
    return OrientedNormals(normals, planes.degenerate.copy())


def estimate_normals(points, K=10, ratio=DEGENERACY_RATIO, seed_rule="max_z"):
    """Full pipeline: tangent planes, Riemann graph, MST, orientation."""
    pts = as_points(points)
    index = CellIndex(pts, default_cell_size(pts))
    planes = estimate_tangent_planes(pts, K, ratio, index=index)
    graph = build_riemann_graph(pts, planes, K, index=index)
    tree = minimal_spanning_tree(graph)
    return orient_normals(planes, tree, points=pts, seed_rule=seed_rule)
