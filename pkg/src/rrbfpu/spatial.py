"""Uniform cell-grid index for k-NN and ball queries on 3D point sets.

Points are binned by integer cell coordinates and stored sorted by linear
cell key, so a query only touches the cells overlapping its search box.
All queries return exactly the brute-force result.
"""
import numpy as np


def as_points(points, name="points"):
    """Validate and return an (n, 3) float array of finite coordinates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size == 3:
        pts = pts.reshape(1, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def default_cell_size(points, per_cell=8):
    """Cell edge giving roughly `per_cell` points per cell for surface-like data."""
    pts = as_points(points)
    extent = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if extent == 0.0:
        return 1.0
    return extent * np.sqrt(per_cell / pts.shape[0])


class CellIndex:
    """Immutable uniform-grid index over a point set.

    Parameters
    ----------
    points : (n, 3) array
    cell_size : float
        Edge length of the cubic cells.
    """

    def __init__(self, points, cell_size):
        pts = as_points(points).copy()
        if not cell_size > 0:
            raise ValueError("cell_size must be positive")
        pts.flags.writeable = False
        self.points = pts
        self.cell_size = float(cell_size)
        self.origin = pts.min(axis=0)
        cells = np.floor((pts - self.origin) / self.cell_size).astype(np.int64)
        self.dims = cells.max(axis=0) + 1
        keys = self._linear(cells)
        # stable sort keeps ascending point index inside each cell
        self._order = np.argsort(keys, kind="stable")
        keys, starts, counts = np.unique(keys[self._order], return_index=True,
                                         return_counts=True)
        self._keys = keys
        self._starts = starts
        self._counts = counts
        self._cell_coords = self._unlinear(keys)

    def __len__(self):
        return self.points.shape[0]

    @property
    def n_cells(self):
        """Number of occupied cells."""
        return self._keys.size

    def _linear(self, cells):
        d = self.dims
        return (cells[..., 0] * d[1] + cells[..., 1]) * d[2] + cells[..., 2]

    def _unlinear(self, keys):
        d = self.dims
        z = keys % d[2]
        y = (keys // d[2]) % d[1]
        x = keys // (d[1] * d[2])
        return np.stack([x, y, z], axis=-1)

    def _cell_of(self, q):
        return np.floor((q - self.origin) / self.cell_size).astype(np.int64)

    def _candidates(self, lo, hi):
        """Point indices (ascending) in occupied cells of the box lo..hi."""
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, self.dims - 1)
        if np.any(lo > hi):
            return np.empty(0, dtype=np.int64)
        volume = int(np.prod(hi - lo + 1))
        if volume >= self._keys.size:
            cc = self._cell_coords
            sel = np.nonzero(np.all((cc >= lo) & (cc <= hi), axis=1))[0]
        else:
            axes = [np.arange(lo[k], hi[k] + 1) for k in range(3)]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
            keys = self._linear(grid)
            pos = np.searchsorted(self._keys, keys)
            pos = np.minimum(pos, self._keys.size - 1)
            sel = pos[self._keys[pos] == keys]
        return self._gather(sel)

    @staticmethod
    def _cells_within(cell_lo, cell_hi, qlo, qhi, limit2):
        """Occupied cells whose box comes within sqrt(limit2) of the box qlo..qhi."""
        gap = np.maximum(np.maximum(cell_lo - qhi, qlo - cell_hi), 0.0)
        near2 = (gap ** 2).sum(axis=1)
        # slack absorbs rounding in the box distances
        return np.flatnonzero(near2 <= limit2 * (1.0 + 1e-9) + 1e-300)

    def _gather(self, sel):
        """Ascending point indices stored in the occupied cells `sel`."""
        if sel.size == 0:
            return np.empty(0, dtype=np.int64)
        starts = self._starts[sel]
        counts = self._counts[sel]
        total = int(counts.sum())
        offsets = np.repeat(starts - np.cumsum(counts) + counts, counts) + np.arange(total)
        return np.sort(self._order[offsets])

    def ball_query(self, center, radius):
        """Indices of all points with ||x_i - center|| <= radius, ascending."""
        if not radius > 0:
            raise ValueError("radius must be positive")
        c = np.asarray(center, dtype=float).reshape(3)
        lo = self._cell_of(c - radius)
        hi = self._cell_of(c + radius)
        cand = self._candidates(lo, hi)
        d2 = ((self.points[cand] - c) ** 2).sum(axis=1)
        return cand[d2 <= radius * radius]

    def knn(self, query, k):
        """The k nearest points to one query, ordered by distance then index."""
        idx, _ = self.knn_batch(np.asarray(query, dtype=float).reshape(1, 3), k)
        return idx[0]

    def knn_batch(self, queries, k):
        """k-NN for many queries.

        Returns (indices, squared distances), both of shape (m, k). Queries
        are grouped by cell. For each group an upper bound U on the k-th
        distance follows from the farthest-corner distances to whole cells;
        only cells whose nearest corner lies within U are then scanned.
        """
        q = np.asarray(queries, dtype=float).reshape(-1, 3)
        n = len(self)
        if not 1 <= k <= n:
            raise ValueError(f"k must be in [1, {n}], got {k}")
        m = q.shape[0]
        out_idx = np.empty((m, k), dtype=np.int64)
        out_d2 = np.empty((m, k))
        if m == 0:
            return out_idx, out_d2
        qcells = self._cell_of(q)
        _, group_of = np.unique(qcells, axis=0, return_inverse=True)
        group_of = np.asarray(group_of).reshape(-1)
        order = np.argsort(group_of, kind="stable")
        bounds = np.flatnonzero(np.diff(group_of[order])) + 1
        h = self.cell_size
        cell_lo = self.origin + self._cell_coords * h
        cell_hi = cell_lo + h
        for members in np.split(order, bounds):
            qs = q[members]
            qlo, qhi = qs.min(axis=0), qs.max(axis=0)
            mid = 0.5 * (qlo + qhi)
            # exact k-th distance of the group centre, then widen by the group radius
            far = np.maximum(np.abs(cell_hi - mid), np.abs(mid - cell_lo))
            far2 = (far ** 2).sum(axis=1)
            by_far = np.argsort(far2, kind="stable")
            reach = np.searchsorted(np.cumsum(self._counts[by_far]), k)
            cand = self._gather(self._cells_within(cell_lo, cell_hi, mid, mid,
                                                   far2[by_far[reach]]))
            mid_d2 = ((self.points[cand] - mid) ** 2).sum(axis=1)
            r_mid = np.sqrt(np.partition(mid_d2, k - 1)[k - 1])
            spread = np.sqrt(((qs - mid) ** 2).sum(axis=1).max())
            cand = self._gather(self._cells_within(cell_lo, cell_hi, qlo, qhi,
                                                   (r_mid + spread) ** 2))
            pc = self.points[cand]
            for chunk in np.array_split(np.arange(members.size),
                                        max(1, members.size * cand.size // 2_000_000)):
                rows = members[chunk]
                d2 = _sq_dist(qs[chunk], pc)
                part = _smallest_k(d2, k)
                out_idx[rows] = cand[part]
                out_d2[rows] = np.take_along_axis(d2, part, axis=1)
        return out_idx, out_d2


def _sq_dist(a, b):
    """Pairwise squared distances, summed x, y, z in order like ((a-b)**2).sum(-1)."""
    d2 = np.subtract.outer(a[:, 0], b[:, 0])
    d2 *= d2
    for ax in (1, 2):
        t = np.subtract.outer(a[:, ax], b[:, ax])
        t *= t
        d2 += t
    return d2


def _smallest_k(d2, k):
    """Column positions of the k smallest entries per row, ordered by value then
    position (candidates are ascending node indices, so ties go to the lower index)."""
    m, c = d2.shape
    if k == 1:
        return np.argmin(d2, axis=1)[:, None]
    if k >= c:
        return np.argsort(d2, axis=1, kind="stable")
    part = np.argpartition(d2, k - 1, axis=1)[:, :k]
    kth = np.take_along_axis(d2, part, axis=1).max(axis=1)
    tied = (d2 <= kth[:, None]).sum(axis=1) > k
    vals = np.take_along_axis(d2, part, axis=1)
    order = np.lexsort((part, vals), axis=1)
    part = np.take_along_axis(part, order, axis=1)
    if tied.any():
        # argpartition picks arbitrarily among values equal to the k-th
        part[tied] = np.argsort(d2[tied], axis=1, kind="stable")[:, :k]
    return part


def build_index(points, cell_size):
    """Build a CellIndex; raises ValueError for empty input or bad cell size."""
    return CellIndex(points, cell_size)


def knn(index, query, k):
    """Indices of the k nearest nodes to `query`, ties by lower index."""
    return index.knn(query, k)


def ball_query(index, center, radius):
    """Indices of nodes within `radius` (inclusive) of `center`."""
    return index.ball_query(center, radius)


def separation_distance(points, index=None):
    """Half the minimum pairwise distance; 0 when duplicates exist."""
    pts = as_points(points)
    if pts.shape[0] < 2:
        raise ValueError("separation distance needs at least 2 points")
    if index is None:
        index = CellIndex(pts, default_cell_size(pts))
    _, d2 = index.knn_batch(pts, 2)
    return 0.5 * float(np.sqrt(d2[:, 1].min()))


def grid_probes(lo, hi, resolution=40):
    """Regular probe grid with `resolution` points per axis over a box."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (3,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (3,))
    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(3)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def fill_distance_estimate(points, domain=(0.0, 1.0), probes=None, resolution=40,
                           index=None):
    """Largest probe-to-nearest-node distance.

    This bounds the true fill distance from below; the default probes are a
    `resolution`^3 grid over the box `domain = (lo, hi)`.
    """
    pts = as_points(points)
    if probes is None:
        probes = grid_probes(domain[0], domain[1], resolution)
    probes = as_points(probes, "probes")
    if index is None:
        index = CellIndex(pts, default_cell_size(pts))
    _, d2 = index.knn_batch(probes, 1)
    return float(np.sqrt(d2[:, 0].max()))
