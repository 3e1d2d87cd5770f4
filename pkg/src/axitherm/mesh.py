"""Rectilinear multi-material mesh generation in the (r, y) half plane.

Subdomains are simple, axis-aligned polygons. The mesher overlays a grid
whose lines contain every distinct r- and y-coordinate of the polygons,
so every subdomain interface is resolved exactly, then splits each cell
into two triangles along the lower-left to upper-right diagonal. The
result is deterministic and conforming by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

GEOM_TOL = 1e-9


class BoundaryTag(Enum):
    BOTTOM = "bottom"
    OUTER = "outer"
    TOP = "top"
    INNER = "inner"
    AXIS = "axis"
    INTERFACE = "interface"


@dataclass(frozen=True)
class SubdomainPolygon:
    """Closed, counterclockwise, axis-aligned simple polygon.

    ``subdomain_id`` need not be unique in a list of polygons: a
    subdomain made of several disconnected pieces is represented by
    several polygons sharing one id.
    """

    subdomain_id: int
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if np.any(v[:, 0] < -GEOM_TOL):
            raise ValueError("polygon extends into r < 0")
        nxt = np.roll(v, -1, axis=0)
        dr = np.abs(nxt[:, 0] - v[:, 0])
        dy = np.abs(nxt[:, 1] - v[:, 1])
        if np.any((dr > GEOM_TOL) & (dy > GEOM_TOL)):
            raise ValueError(
                f"polygon {self.subdomain_id} has a non-axis-aligned edge"
            )
        if self.area() <= 0:
            raise ValueError(f"polygon {self.subdomain_id} is not counterclockwise")

    def area(self) -> float:
        """Signed shoelace area (positive for counterclockwise)."""
        v = np.asarray(self.vertices, float)
        nxt = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Even-odd point-in-polygon test, vectorized over ``points``."""
        x = points[:, 0]
        y = points[:, 1]
        inside = np.zeros(len(points), dtype=bool)
        v = np.asarray(self.vertices, float)
        n = len(v)
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            cross = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= cross & (x < xi)
        return inside


@dataclass
class Mesh:
    """Conforming triangle mesh with subdomain and boundary tagging.

    nodes            (N, 2) float array of (r, y) coordinates
    triangles        (M, 3) int array, positively oriented
    tri_subdomain    (M,) int array of subdomain ids
    boundary_edges   list of (i, j, BoundaryTag) with i < j
    h                maximum triangle diameter
    """

    nodes: np.ndarray
    triangles: np.ndarray
    tri_subdomain: np.ndarray
    boundary_edges: list = field(default_factory=list)
    h: float = 0.0

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        v1 = p[:, 1] - p[:, 0]
        v2 = p[:, 2] - p[:, 0]
        return 0.5 * (v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])

    def edges_with_tag(self, tag: BoundaryTag) -> list:
        return [(i, j) for (i, j, t) in self.boundary_edges if t is tag]


# Hearth geometry. Vertex coordinates in meters. Subdomain 2 consists of
# two disconnected blocks; a naive vertex list for it would overlap the
# neighbouring subdomains, so the two blocks are trimmed to a tiling of
# the domain (west edge of the lower block at r = 0.39, inner corner of
# the upper block at y = 6.4).
_HEARTH_POLYGONS = [
    (1, [(0.0, 0.0), (5.9501, 0.0), (5.9501, 1.0), (2.1, 1.0), (0.0, 1.0)]),
    (2, [(0.39, 1.0), (2.1, 1.0), (2.1, 1.6), (0.39, 1.6)]),
    (2, [(4.875, 5.2), (5.9501, 5.2), (5.9501, 7.35), (5.5188, 7.35),
         (5.5188, 6.4), (4.875, 6.4)]),
    (3, [(0.0, 1.0), (0.39, 1.0), (0.39, 1.6), (0.0, 1.6)]),
    (4, [(0.39, 1.6), (2.1, 1.6), (4.875, 1.6), (4.875, 5.2), (4.875, 6.4),
         (5.5188, 6.4), (5.5188, 7.35), (5.5188, 7.4), (4.875, 7.4),
         (4.875, 7.0), (4.475, 7.0), (4.475, 2.1), (0.39, 2.1)]),
    (5, [(2.1, 1.0), (5.9501, 1.0), (5.9501, 5.2), (4.875, 5.2),
         (4.875, 1.6), (2.1, 1.6)]),
    (6, [(5.9501, 0.0), (6.0201, 0.0), (6.0201, 7.4), (5.9501, 7.4),
         (5.9501, 7.35), (5.9501, 5.2), (5.9501, 1.0)]),
]

# Inner (cavity) wall of the hearth: the polyline from the cavity floor
# near the axis up-and-over to (4.875, 7.4). Edges lying on these
# segments face the molten metal.
HEARTH_CAVITY_SEGMENTS = [
    ((0.0, 1.6), (0.39, 1.6)),
    ((0.39, 1.6), (0.39, 2.1)),
    ((0.39, 2.1), (4.475, 2.1)),
    ((4.475, 2.1), (4.475, 7.0)),
    ((4.475, 7.0), (4.875, 7.0)),
    ((4.875, 7.0), (4.875, 7.4)),
]

# Edges of the stepped upper surface (a notch between the top of the
# middle block at y = 7.35 and y_max) count as top-boundary contact.
HEARTH_TOP_BAND_MIN_Y = 7.35


def build_hearth_geometry() -> list[SubdomainPolygon]:
    """Blast-furnace hearth cross-section: 6 subdomains, 7 polygons."""
    return [SubdomainPolygon(sid, tuple(v)) for sid, v in _HEARTH_POLYGONS]


def _breaklines(polygons, axis: int, target_h: float) -> np.ndarray:
    breaks = sorted({float(v[axis]) for p in polygons for v in p.vertices})
    lines = [breaks[0]]
    # subdivide so every cell diagonal stays below target_h
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, math.ceil(math.sqrt(2.0) * (b - a) / target_h))
        lines.extend(np.linspace(a, b, n + 1)[1:])
    return np.asarray(lines)


def _min_feature(polygons) -> tuple[float, int]:
    """Smallest polygon extent: min over polygons of max(width, height)."""
    best, best_id = math.inf, -1
    for p in polygons:
        v = np.asarray(p.vertices, float)
        ext = max(np.ptp(v[:, 0]), np.ptp(v[:, 1]))
        if ext < best:
            best, best_id = ext, p.subdomain_id
    return best, best_id


def generate_mesh(polygons: list[SubdomainPolygon], target_h: float) -> Mesh:
    """Generate a conforming triangle mesh covering the given polygons.

    Cells whose centroid falls in no polygon are dropped, so hollow
    regions (such as the hearth cavity) stay unmeshed.
    """
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    feature, fid = _min_feature(polygons)
    if target_h > feature + GEOM_TOL:
        raise ValueError(
            f"target_h={target_h} exceeds the smallest polygon extent "
            f"{feature} (subdomain {fid})"
        )

    r_lines = _breaklines(polygons, 0, target_h)
    y_lines = _breaklines(polygons, 1, target_h)
    nr, ny = len(r_lines), len(y_lines)

    # cell centroids -> subdomain id (0 = outside every polygon)
    cr = 0.5 * (r_lines[:-1] + r_lines[1:])
    cy = 0.5 * (y_lines[:-1] + y_lines[1:])
    CR, CY = np.meshgrid(cr, cy, indexing="ij")
    centroids = np.column_stack([CR.ravel(), CY.ravel()])
    cell_sub = np.zeros(len(centroids), dtype=int)
    for p in polygons:
        hit = p.contains(centroids)
        claimed = hit & (cell_sub != 0)
        if np.any(claimed):
            bad = centroids[claimed][0]
            raise ValueError(
                f"polygons overlap near (r={bad[0]:g}, y={bad[1]:g})"
            )
        cell_sub[hit] = p.subdomain_id
    cell_sub = cell_sub.reshape(nr - 1, ny - 1)

    ci, cj = np.nonzero(cell_sub)
    if len(ci) == 0:
        raise ValueError("no cell centroid lies inside any polygon")
    sub = cell_sub[ci, cj]

    def gid(i, j):
        return i * ny + j

    ll, lr = gid(ci, cj), gid(ci + 1, cj)
    ul, ur = gid(ci, cj + 1), gid(ci + 1, cj + 1)
    # fixed diagonal lower-left -> upper-right, both triangles CCW
    tris = np.concatenate(
        [np.column_stack([ll, lr, ur]), np.column_stack([ll, ur, ul])]
    )
    tri_sub = np.concatenate([sub, sub])

    # drop unused grid nodes, renumber
    used = np.unique(tris)
    remap = -np.ones(nr * ny, dtype=int)
    remap[used] = np.arange(len(used))
    tris = remap[tris]
    nodes = np.column_stack(
        [r_lines[used // ny], y_lines[used % ny]]
    )

    # interleave the two triangles of each cell back into cell order so
    # element numbering follows the grid deterministically
    order = np.argsort(np.r_[np.arange(len(ci)) * 2, np.arange(len(ci)) * 2 + 1],
                       kind="stable")
    tris = tris[order]
    tri_sub = tri_sub[order]

    mesh = Mesh(nodes=nodes, triangles=tris, tri_subdomain=tri_sub)
    p = nodes[tris]
    edge_len = np.stack([
        np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
        np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
        np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
    ])
    mesh.h = float(edge_len.max())
    _collect_boundary_edges(mesh)
    return mesh


def _collect_boundary_edges(mesh: Mesh) -> None:
    """Find exterior and inter-subdomain edges; exterior ones untagged."""
    tris = mesh.triangles
    edges = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    owner_sub = np.tile(mesh.tri_subdomain, 3)
    key = np.sort(edges, axis=1)
    uniq, inv, counts = np.unique(key, axis=0, return_inverse=True,
                                  return_counts=True)
    mesh.boundary_edges = []
    first_sub = np.full(len(uniq), -1)
    second_sub = np.full(len(uniq), -1)
    for e, s in zip(inv, owner_sub):
        if first_sub[e] < 0:
            first_sub[e] = s
        else:
            second_sub[e] = s
    for idx in range(len(uniq)):
        i, j = int(uniq[idx, 0]), int(uniq[idx, 1])
        if counts[idx] == 1:
            mesh.boundary_edges.append((i, j, None))
        elif counts[idx] == 2 and first_sub[idx] != second_sub[idx]:
            mesh.boundary_edges.append((i, j, BoundaryTag.INTERFACE))
        elif counts[idx] > 2:
            raise ValueError(f"non-conforming edge ({i}, {j})")


def _on_segment(p, q, seg) -> bool:
    (ax, ay), (bx, by) = seg
    lo_x, hi_x = min(ax, bx) - GEOM_TOL, max(ax, bx) + GEOM_TOL
    lo_y, hi_y = min(ay, by) - GEOM_TOL, max(ay, by) + GEOM_TOL
    for x, y in (p, q):
        if not (lo_x <= x <= hi_x and lo_y <= y <= hi_y):
            return False
        # axis-aligned segments: collinearity is a single coordinate match
        if abs(ax - bx) < GEOM_TOL and abs(x - ax) > GEOM_TOL:
            return False
        if abs(ay - by) < GEOM_TOL and abs(y - ay) > GEOM_TOL:
            return False
    return True


def tag_boundaries(
    mesh: Mesh,
    polygons: list[SubdomainPolygon],
    inner_segments=None,
    top_band_min_y: float | None = None,
) -> Mesh:
    """Assign physical tags to the exterior boundary edges in place.

    Exterior edges on r=0 become AXIS, y=0 BOTTOM, r=r_max OUTER and
    y=y_max TOP. When ``inner_segments`` is given, edges lying on those
    segments become INNER and remaining edges above ``top_band_min_y``
    become TOP (stepped upper surfaces); otherwise every leftover
    exterior edge is treated as an inner (cavity-facing) wall. Any edge
    matching no rule raises.
    """
    verts = np.concatenate([np.asarray(p.vertices, float) for p in polygons])
    r_max = float(verts[:, 0].max())
    y_max = float(verts[:, 1].max())

    tagged = []
    for (i, j, tag) in mesh.boundary_edges:
        if tag is BoundaryTag.INTERFACE:
            tagged.append((i, j, tag))
            continue
        p, q = mesh.nodes[i], mesh.nodes[j]
        if abs(p[0]) < GEOM_TOL and abs(q[0]) < GEOM_TOL:
            t = BoundaryTag.AXIS
        elif abs(p[1]) < GEOM_TOL and abs(q[1]) < GEOM_TOL:
            t = BoundaryTag.BOTTOM
        elif abs(p[0] - r_max) < GEOM_TOL and abs(q[0] - r_max) < GEOM_TOL:
            t = BoundaryTag.OUTER
        elif abs(p[1] - y_max) < GEOM_TOL and abs(q[1] - y_max) < GEOM_TOL:
            t = BoundaryTag.TOP
        elif inner_segments is not None:
            if any(_on_segment(p, q, s) for s in inner_segments):
                t = BoundaryTag.INNER
            elif top_band_min_y is not None and min(p[1], q[1]) >= top_band_min_y - GEOM_TOL:
                t = BoundaryTag.TOP
            else:
                raise ValueError(
                    f"untaggable exterior edge ({p[0]:g},{p[1]:g})-({q[0]:g},{q[1]:g})"
                )
        elif max(p[0], q[0]) < r_max - GEOM_TOL:
            t = BoundaryTag.INNER
        else:
            raise ValueError(
                f"untaggable exterior edge ({p[0]:g},{p[1]:g})-({q[0]:g},{q[1]:g})"
            )
        tagged.append((i, j, t))
    mesh.boundary_edges = tagged
    return mesh


def hearth_mesh(target_h: float) -> Mesh:
    """Generate and fully tag the built-in hearth mesh."""
    polys = build_hearth_geometry()
    mesh = generate_mesh(polys, target_h)
    return tag_boundaries(mesh, polys, HEARTH_CAVITY_SEGMENTS,
                          HEARTH_TOP_BAND_MIN_Y)


def save_mesh(mesh: Mesh, path) -> None:
    """Write the plain-text mesh format (axitherm-mesh v1)."""
    lines = ["axitherm-mesh v1", f"nodes {mesh.num_nodes}"]
    for r, y in mesh.nodes:
        lines.append(f"{float(r)!r} {float(y)!r}")
    lines.append(f"triangles {len(mesh.triangles)}")
    for (i, j, k), s in zip(mesh.triangles, mesh.tri_subdomain):
        lines.append(f"{i} {j} {k} {s}")
    lines.append(f"boundary_edges {len(mesh.boundary_edges)}")
    for i, j, tag in mesh.boundary_edges:
        name = tag.value if tag is not None else "untagged"
        lines.append(f"{i} {j} {name}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Read the plain-text mesh format written by :func:`save_mesh`."""
    with open(path) as f:
        tokens = []
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if line:
                tokens.append(line.split())
    if tokens[0] != ["axitherm-mesh", "v1"]:
        raise ValueError("not an axitherm-mesh v1 file")
    pos = 1

    def expect(keyword):
        nonlocal pos
        kw, count = tokens[pos]
        if kw != keyword:
            raise ValueError(f"expected '{keyword}', got '{kw}'")
        pos += 1
        return int(count)

    n = expect("nodes")
    nodes = np.array([[float(a) for a in tokens[pos + i]] for i in range(n)])
    pos += n
    m = expect("triangles")
    tri_rows = [[int(a) for a in tokens[pos + i]] for i in range(m)]
    pos += m
    tris = np.array([row[:3] for row in tri_rows], dtype=int)
    sub = np.array([row[3] for row in tri_rows], dtype=int)
    b = expect("boundary_edges")
    bedges = []
    for i in range(b):
        a, c, name = tokens[pos + i]
        tag = None if name == "untagged" else BoundaryTag(name)
        bedges.append((int(a), int(c), tag))
    mesh = Mesh(nodes=nodes, triangles=tris, tri_subdomain=sub,
                boundary_edges=bedges)
    p = nodes[tris]
    mesh.h = float(max(
        np.linalg.norm(p[:, 1] - p[:, 0], axis=1).max(),
        np.linalg.norm(p[:, 2] - p[:, 1], axis=1).max(),
        np.linalg.norm(p[:, 0] - p[:, 2], axis=1).max(),
    ))
    return mesh
