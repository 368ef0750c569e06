"""Grid evaluation of the blended interpolant and marching-cubes extraction.

The 256-case triangle table is generated at import time. On every cube face
the crossing points are joined so that each corner above the level is cut
off on its own, which is the same rule on both sides of a shared face; the
extracted meshes are therefore closed wherever the level set stays inside
the grid. Face segments are chained into loops and fanned into triangles
whose normals point toward increasing field values.
"""
import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# corner c sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1)
CORNERS = np.array([[c & 1, (c >> 1) & 1, (c >> 2) & 1] for c in range(8)])
EDGES = [(a, b) for a in range(8) for b in range(a + 1, 8)
         if bin(a ^ b).count("1") == 1]
EDGE_AXIS = np.array([(a ^ b).bit_length() - 1 for a, b in EDGES])
EDGE_LOW = np.array([a for a, _ in EDGES])
_EDGE_ID = {frozenset(e): i for i, e in enumerate(EDGES)}


def _faces():
    """Six faces as corner cycles, counter-clockwise seen from outside."""
    faces = []
    for axis in range(3):
        for side in (0, 1):
            ids = [c for c in range(8) if CORNERS[c, axis] == side]
            u, v = [a for a in range(3) if a != axis]
            # cyclic order around the face
            square = [(0, 0), (1, 0), (1, 1), (0, 1)]
            cyc = [next(c for c in ids if (CORNERS[c, u], CORNERS[c, v]) == s)
                   for s in square]
            p = CORNERS[cyc].astype(float)
            normal = np.cross(p[1] - p[0], p[2] - p[1])
            outward = np.zeros(3)
            outward[axis] = 1.0 if side else -1.0
            if normal @ outward < 0:
                cyc = cyc[::-1]
            faces.append(cyc)
    return faces


FACES = _faces()


def _case_loops(case):
    """Closed loops of edge ids for one corner configuration."""
    above = [(case >> c) & 1 for c in range(8)]
    nxt = {}
    for cyc in FACES:
        signs = [above[c] for c in cyc]
        if all(signs) or not any(signs):
            continue
        for i in range(4):
            # each run of corners above the level yields one segment
            if signs[i] and not signs[i - 1]:
                enter = _EDGE_ID[frozenset((cyc[i - 1], cyc[i]))]
                j = i
                while signs[(j + 1) % 4]:
                    j += 1
                leave = _EDGE_ID[frozenset((cyc[j % 4], cyc[(j + 1) % 4]))]
                nxt[leave] = enter
    loops = []
    while nxt:
        start = min(nxt)
        loop = [start]
        e = nxt.pop(start)
        while e != start:
            loop.append(e)
            e = nxt.pop(e)
        loops.append(loop)
    return loops


_EDGE_FACES = [frozenset(f for f, cyc in enumerate(FACES) if a in cyc and b in cyc)
               for a, b in EDGES]


def _triangulate(loop):
    """Triangulation of a loop avoiding diagonals that lie in a cell face.

    Such a diagonal can coincide with the neighbouring cell's mesh and make
    its edge non-manifold. Polygon DP over the number of in-face diagonals;
    ties keep the lexicographically first split, which is deterministic.
    """
    n = len(loop)

    def cost(i, j):
        if j - i == 1 or (i == 0 and j == n - 1):
            return 0
        return int(bool(_EDGE_FACES[loop[i]] & _EDGE_FACES[loop[j]]))

    best = {}
    for span in range(2, n):
        for i in range(n - span):
            j = i + span
            best[i, j] = min(
                (best.get((i, k), (0, None))[0] + best.get((k, j), (0, None))[0]
                 + cost(i, k) + cost(k, j), k) for k in range(i + 1, j))
    rows = []

    def emit(i, j):
        if j - i < 2:
            return
        k = best[i, j][1]
        rows.append((loop[i], loop[k], loop[j]))
        emit(i, k)
        emit(k, j)

    emit(0, n - 1)
    return rows


def _build_table():
    tris = []
    for case in range(256):
        rows = []
        for loop in _case_loops(case):
            rows.extend(_triangulate(loop))
        tris.append(rows)
    width = max(len(r) for r in tris)
    table = np.full((256, width, 3), -1, dtype=np.int64)
    for case, rows in enumerate(tris):
        if rows:
            table[case, :len(rows)] = rows
    return table


TRI_TABLE = _build_table()


def _orient_table():
    """Flip the table if needed so normals point toward larger values."""
    # single corner above the level: normal must point at that corner
    case = 1
    e = TRI_TABLE[case, 0]
    pts = np.array([(CORNERS[EDGE_LOW[k]] + np.eye(3)[EDGE_AXIS[k]] * 0.5) for k in e])
    normal = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    if normal @ (CORNERS[0] - pts.mean(axis=0)) < 0:
        TRI_TABLE[:, :, [1, 2]] = TRI_TABLE[:, :, [2, 1]]


_orient_table()


@dataclass
class ScalarField:
    values: np.ndarray  # (nx, ny, nz)
    lo: np.ndarray
    hi: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    @property
    def spacing(self):
        return (self.hi - self.lo) / (np.array(self.shape) - 1)

    def axes(self):
        return [np.linspace(self.lo[k], self.hi[k], self.shape[k]) for k in range(3)]

    def points(self):
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1).reshape(-1, 3)


@dataclass
class IsoMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    level: float

    @classmethod
    def empty(cls, level=0.0):
        return cls(np.empty((0, 3)), np.empty((0, 3), dtype=np.int64), level)


@dataclass
class MeshStats:
    vertices: int
    triangles: int
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    boundary_edges: int
    nonmanifold_edges: int


def _box(box):
    lo, hi = box
    return (np.broadcast_to(np.asarray(lo, dtype=float), (3,)).copy(),
            np.broadcast_to(np.asarray(hi, dtype=float), (3,)).copy())


def sample_field(func, box=(0.0, 1.0), resolution=80):
    """ScalarField of a vectorized function f((m, 3)) -> (m,) on a grid."""
    lo, hi = _box(box)
    res = np.broadcast_to(np.asarray(resolution), (3,))
    if np.any(res < 2):
        raise ValueError("resolution must be at least 2 per axis")
    field = ScalarField(np.zeros(tuple(res)), lo, hi)
    field.values = np.asarray(func(field.points()), dtype=float).reshape(tuple(res))
    return field


def eval_grid(interp, box=(0.0, 1.0), resolution=80, workers=1):
    """Values of a PU interpolant on a regular grid (sentinel where uncovered)."""
    return sample_field(lambda p: interp.evaluate(p, workers=workers), box, resolution)


def pad_field(field, value):
    """Field grown by one layer of constant `value` on every side.

    Extracting from the padded field caps level sets that leave the box, so
    with `value` on the outer side of the level the mesh is closed.
    """
    h = field.spacing
    return ScalarField(np.pad(np.asarray(field.values, dtype=float), 1,
                              constant_values=value), field.lo - h, field.hi + h)


def marching_cubes(field, level):
    """Triangle mesh of {field = level} by marching cubes with linear edge interpolation.

    With the field padded by a value on one side of the level the mesh is
    closed. It is also edge-manifold unless grid values equal the level
    exactly, where the level set itself can pinch. Tiny but non-collapsed
    triangles are kept, since removing them opens holes.
    """
    v = np.asarray(field.values, dtype=float)
    if not (v.min() <= level < v.max()):
        log.warning("level %g outside field range [%g, %g]; empty mesh",
                    level, v.min(), v.max())
        return IsoMesh.empty(level)
    nx, ny, nz = v.shape
    above = v > level
    case = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.int64)
    for c, (dx, dy, dz) in enumerate(CORNERS):
        case |= above[dx:nx - 1 + dx, dy:ny - 1 + dy, dz:nz - 1 + dz].astype(np.int64) << c
    cells = np.flatnonzero((case != 0) & (case != 255))
    if cells.size == 0:
        return IsoMesh.empty(level)
    cases = case.ravel()[cells]
    ci, cj, ck = np.unravel_index(cells, case.shape)
    local = TRI_TABLE[cases]  # (m, T, 3)
    valid = local[:, :, 0] >= 0
    cell_of = np.broadcast_to(np.arange(cells.size)[:, None], valid.shape)[valid]
    local = local[valid]  # (t, 3)
    # global edge key: lower grid point (linear) * 3 + axis
    low = CORNERS[EDGE_LOW[local]]  # (t, 3, 3)
    gi = ci[cell_of][:, None] + low[..., 0]
    gj = cj[cell_of][:, None] + low[..., 1]
    gk = ck[cell_of][:, None] + low[..., 2]
    keys = ((gi * ny + gj) * nz + gk) * 3 + EDGE_AXIS[local]
    ukeys, tri = np.unique(keys.ravel(), return_inverse=True)
    tri = tri.reshape(-1, 3)
    axis = ukeys % 3
    lin = ukeys // 3
    i0, j0, k0 = np.unravel_index(lin, v.shape)
    step = np.eye(3, dtype=np.int64)[axis]
    i1, j1, k1 = i0 + step[:, 0], j0 + step[:, 1], k0 + step[:, 2]
    v0 = v[i0, j0, k0]
    v1 = v[i1, j1, k1]
    t = (level - v0) / (v1 - v0)
    h = field.spacing
    p0 = field.lo + np.stack([i0, j0, k0], axis=1) * h
    verts = p0 + t[:, None] * step * h
    # vertices on grid points coincide across edges: merge, then drop collapsed triangles
    verts, inv = np.unique(verts, axis=0, return_inverse=True)
    tri = np.asarray(inv).reshape(-1)[tri]
    tri = tri[~_collapsed(tri)]
    used, tri = np.unique(tri, return_inverse=True)
    return IsoMesh(verts[used], np.asarray(tri).reshape(-1, 3).astype(np.int64), level)


def _collapsed(tri):
    return (tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 0] == tri[:, 2])


def edge_counts(triangles):
    e = np.sort(np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
                                triangles[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return counts


def mesh_stats(mesh):
    tri = np.asarray(mesh.triangles).reshape(-1, 3)
    verts = np.asarray(mesh.vertices).reshape(-1, 3)
    if tri.shape[0] == 0:
        zero = np.zeros(3)
        return MeshStats(verts.shape[0], 0, zero, zero, 0, 0)
    counts = edge_counts(tri)
    return MeshStats(verts.shape[0], tri.shape[0], verts.min(axis=0), verts.max(axis=0),
                     int((counts == 1).sum()), int((counts > 2).sum()))
