"""ASCII point-cloud readers and mesh writers (XYZ, PLY, OBJ)."""
import logging
import os

import numpy as np

from .errors import PointCloudFormatError
from .surface import IsoMesh

log = logging.getLogger(__name__)

FLOAT = "%.9g"


def _floats(tokens, path, lineno, width):
    if len(tokens) != width:
        raise PointCloudFormatError(f"expected {width} values, got {len(tokens)}", path, lineno)
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise PointCloudFormatError(f"non-numeric value in {' '.join(tokens)!r}",
                                    path, lineno) from None
    if not all(np.isfinite(vals)):
        raise PointCloudFormatError("non-finite value", path, lineno)
    return vals


def _read_xyz(path, lines):
    rows, width = [], None
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if width is None:
            if len(tokens) not in (3, 6):
                raise PointCloudFormatError(
                    f"XYZ rows need 3 or 6 columns, got {len(tokens)}", path, lineno)
            width = len(tokens)
        rows.append(_floats(tokens, path, lineno, width))
    if not rows:
        raise PointCloudFormatError("no points", path, len(lines))
    data = np.array(rows)
    return data[:, :3], (data[:, 3:6] if width == 6 else None)


def _read_ply(path, lines):
    if not lines or lines[0].strip() != "ply":
        raise PointCloudFormatError("missing 'ply' magic", path, 1)
    elements = []  # (name, count, [properties])
    lineno = 1
    for lineno, line in enumerate(lines[1:], 2):
        tokens = line.split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        if tokens[0] == "format":
            if tokens[1:2] != ["ascii"]:
                raise PointCloudFormatError(f"unsupported PLY format {tokens[1:2]}",
                                            path, lineno)
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise PointCloudFormatError("property before element", path, lineno)
            elements[-1][2].append(tokens[-1] if tokens[1] != "list" else None)
        elif tokens[0] == "end_header":
            break
    else:
        raise PointCloudFormatError("missing end_header", path, lineno)
    body = lineno  # index of the first body line in `lines`
    points = normals = None
    for name, count, props in elements:
        chunk = lines[body:body + count]
        if len(chunk) < count:
            raise PointCloudFormatError(f"element {name!r} truncated",
                                        path, body + len(chunk))
        if name != "vertex":
            log.warning("%s: skipping PLY element %r (%d rows)", path, name, count)
            body += count
            continue
        if None in props or not {"x", "y", "z"} <= set(props):
            raise PointCloudFormatError("vertex element needs scalar x, y, z", path, body)
        cols = [props.index(c) for c in ("x", "y", "z")]
        has_n = {"nx", "ny", "nz"} <= set(props)
        ncols = [props.index(c) for c in ("nx", "ny", "nz")] if has_n else []
        rows = [_floats(line.split(), path, body + i + 1, len(props))
                for i, line in enumerate(chunk)]
        data = np.array(rows).reshape(count, len(props))
        points = data[:, cols]
        normals = data[:, ncols] if has_n else None
        body += count
    if points is None or points.shape[0] == 0:
        raise PointCloudFormatError("no vertex element", path, body)
    return points, normals


def read_point_cloud(path):
    """Points (n, 3) and normals (n, 3) or None from an ASCII XYZ or PLY file."""
    path = os.fspath(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if path.lower().endswith(".ply"):
        return _read_ply(path, lines)
    return _read_xyz(path, lines)


def write_points(path, points, normals=None):
    """XYZ file with 3 columns, or 6 when normals are given."""
    data = np.asarray(points, dtype=float)
    if normals is not None:
        data = np.hstack([data, np.asarray(normals, dtype=float)])
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, data, fmt=FLOAT)


def write_mesh(mesh, path, fmt=None):
    """Write an IsoMesh as ASCII PLY or OBJ (format from `fmt` or the extension)."""
    path = os.fspath(path)
    fmt = (fmt or os.path.splitext(path)[1].lstrip(".")).lower()
    v = np.asarray(mesh.vertices, dtype=float).reshape(-1, 3)
    t = np.asarray(mesh.triangles, dtype=np.int64).reshape(-1, 3)
    with open(path, "w", newline="\n") as fh:
        if fmt == "ply":
            fh.write("ply\nformat ascii 1.0\n")
            fh.write(f"element vertex {len(v)}\n")
            fh.write("property float x\nproperty float y\nproperty float z\n")
            fh.write(f"element face {len(t)}\n")
            fh.write("property list uchar int vertex_indices\nend_header\n")
            np.savetxt(fh, v, fmt=FLOAT)
            np.savetxt(fh, np.hstack([np.full((len(t), 1), 3), t]), fmt="%d")
        elif fmt == "obj":
            np.savetxt(fh, v, fmt="v " + " ".join([FLOAT] * 3))
            np.savetxt(fh, t + 1, fmt="f %d %d %d")
        else:
            raise ValueError(f"unsupported mesh format {fmt!r} (use ply or obj)")


def read_mesh(path):
    """IsoMesh from an ASCII PLY or OBJ file written by `write_mesh`."""
    path = os.fspath(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if path.lower().endswith(".obj"):
        verts = [list(map(float, ln.split()[1:4])) for ln in lines if ln.startswith("v ")]
        faces = [[int(x.split("/")[0]) - 1 for x in ln.split()[1:4]]
                 for ln in lines if ln.startswith("f ")]
    else:
        end = lines.index("end_header")
        header = [ln.split() for ln in lines[:end]]
        counts = {h[1]: int(h[2]) for h in header if h and h[0] == "element"}
        nv, nf = counts.get("vertex", 0), counts.get("face", 0)
        verts = [list(map(float, ln.split()[:3])) for ln in lines[end + 1:end + 1 + nv]]
        faces = [list(map(int, ln.split()[1:4]))
                 for ln in lines[end + 1 + nv:end + 1 + nv + nf]]
    return IsoMesh(np.array(verts, dtype=float).reshape(-1, 3),
                   np.array(faces, dtype=np.int64).reshape(-1, 3), float("nan"))
