"""Triangulation of a :class:`~lipspec.geometry.DomainSpec`.

Boundary nodes are placed on the exact curves at equal arclength spacing.
Interior nodes start from an equilateral lattice (offset seeded by the domain
hash), are smoothed, and the Delaunay triangulation of all nodes is refined
by inserting circumcenters until no circumradius exceeds ``h``.  Interior
nodes are kept more than ``h/2`` away from the boundary polygon, so every
boundary edge has an empty diametral circle and is recovered by the Delaunay
triangulation; the result is therefore a constrained Delaunay mesh.

Each boundary edge remembers its source segment and arclength interval so that
normals and curvature can be evaluated on the exact geometry later on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .geometry import DomainSpec

MAX_NODES = 200_000
MIN_ANGLE_DEG = 20.0


class MeshError(RuntimeError):
    pass


class MeshSizeError(MeshError, ValueError):
    """Invalid ``h`` or node budget exceeded (a configuration problem)."""


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangle mesh with boundary edges linked to exact segments.

    Attributes
    ----------
    nodes : (N, 2) float array
    triangles : (T, 3) int array, counter-clockwise
    bnd_edges : (B, 2) int array, boundary loop in traversal order
    bnd_segment : (B,) int array, source segment index of each boundary edge
    bnd_param : (B, 2) float array, arclength interval ``[s0, s1]``
    bnd_corner : (B, 2) bool array, corner flag of each edge endpoint
    h : float, target edge length
    spec : DomainSpec or None
    """

    nodes: np.ndarray
    triangles: np.ndarray
    bnd_edges: np.ndarray
    bnd_segment: np.ndarray
    bnd_param: np.ndarray
    bnd_corner: np.ndarray
    h: float
    spec: DomainSpec | None = None
    domain_hash: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def areas(self):
        if "areas" not in self._cache:
            self._cache["areas"] = triangle_areas(self.nodes, self.triangles)
        return self._cache["areas"]

    @property
    def edges(self):
        """Unique undirected edges, sorted."""
        if "edges" not in self._cache:
            t = self.triangles
            e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            e.sort(axis=1)
            self._cache["edges"] = np.unique(e, axis=0)
        return self._cache["edges"]

    @property
    def boundary_nodes(self):
        return self.bnd_edges[:, 0]

    @property
    def corner_nodes(self):
        return self.bnd_edges[self.bnd_corner[:, 0], 0]

    @property
    def interior_nodes(self):
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def boundary_node_params(self):
        """Per boundary node: ``(node, segment, s, corner)`` taken from the edge it starts."""
        return (self.bnd_edges[:, 0], self.bnd_segment, self.bnd_param[:, 0], self.bnd_corner[:, 0])

    def gradients(self):
        """P1 basis gradients per triangle, shape (T, 3, 2)."""
        if "grads" not in self._cache:
            self._cache["grads"] = p1_gradients(self.nodes, self.triangles)
        return self._cache["grads"]

    def barycenters(self):
        return self.nodes[self.triangles].mean(axis=1)


def triangle_areas(nodes, triangles):
    p = nodes[triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def p1_gradients(nodes, triangles):
    p = nodes[triangles]
    area2 = 2.0 * triangle_areas(nodes, triangles)
    # grad of barycentric coordinate i is perp(opposite edge) / (2 area)
    g = np.empty((len(triangles), 3, 2))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        e = p[:, k] - p[:, j]
        g[:, i, 0] = -e[:, 1] / area2
        g[:, i, 1] = e[:, 0] / area2
    return g


def circumradii(nodes, triangles):
    p = nodes[triangles]
    a = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    b = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    c = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    return a * b * c / (4.0 * np.abs(triangle_areas(nodes, triangles)))


def min_angles(nodes, triangles):
    """Smallest interior angle of every triangle (radians)."""
    p = nodes[triangles]
    out = np.full(len(triangles), np.inf)
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cos = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        out = np.minimum(out, np.arccos(np.clip(cos, -1.0, 1.0)))
    return out


def circumcenters(nodes, triangles):
    p = nodes[triangles]
    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    d = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
    a2, b2, c2 = (a ** 2).sum(1), (b ** 2).sum(1), (c ** 2).sum(1)
    ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d
    uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d
    return np.stack([ux, uy], axis=1)


def points_in_polygon(pts, poly):
    """Even-odd rule; ``poly`` is an (M, 2) closed loop without repeated end point."""
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    cond = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return (np.count_nonzero(cond & (x < xint), axis=1) % 2) == 1


def distance_to_polyline(pts, poly, chunk=4096):
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    L2 = (ab ** 2).sum(1)
    out = np.empty(len(pts))
    for k in range(0, len(pts), chunk):
        p = pts[k:k + chunk, None, :]
        t = np.clip(((p - a) * ab).sum(-1) / L2, 0.0, 1.0)
        d = p - (a + t[..., None] * ab)
        out[k:k + chunk] = np.sqrt((d ** 2).sum(-1).min(axis=1))
    return out


def _sample_boundary(spec: DomainSpec, h: float):
    corner_starts = {c.outgoing for c in spec.corners}
    pts, seg_id, s0, s1, corner = [], [], [], [], []
    for i, seg in enumerate(spec.segments):
        n = max(1, int(math.ceil(seg.length / h - 1e-9)))
        s = np.linspace(0.0, seg.length, n + 1)
        p = seg.point(s[:-1])
        if i in corner_starts:
            p[0] = seg.start
        pts.append(p)
        seg_id.append(np.full(n, i))
        s0.append(s[:-1])
        s1.append(s[1:])
        c = np.zeros(n, dtype=bool)
        c[0] = i in corner_starts
        corner.append(c)
    pts = np.concatenate(pts)
    seg_id = np.concatenate(seg_id)
    params = np.stack([np.concatenate(s0), np.concatenate(s1)], axis=1)
    cflag = np.concatenate(corner)
    m = len(pts)
    edges = np.stack([np.arange(m), (np.arange(m) + 1) % m], axis=1)
    cpair = np.stack([cflag, np.roll(cflag, -1)], axis=1)
    return pts, edges, seg_id, params, cpair


def _lattice(spec: DomainSpec, a: float, rng):
    x0, y0, x1, y1 = spec.bbox
    dy = a * math.sqrt(3) / 2
    ox, oy = rng.uniform(0, a), rng.uniform(0, dy)
    ys = np.arange(y0 - dy + oy, y1 + dy, dy)
    rows = []
    for k, y in enumerate(ys):
        shift = 0.5 * a if k % 2 else 0.0
        xs = np.arange(x0 - a + ox + shift, x1 + a, a)
        rows.append(np.stack([xs, np.full_like(xs, y)], axis=1))
    return np.concatenate(rows)


def _delaunay(points, poly):
    tri = Delaunay(points, qhull_options="Qbb Qc Qz Q12")
    t = tri.simplices.astype(np.int64)
    area = triangle_areas(points, t)
    t[area < 0] = t[area < 0][:, [0, 2, 1]]
    area = np.abs(area)
    scale = np.ptp(points, axis=0).max() ** 2
    keep = area > 1e-13 * scale
    t = t[keep]
    inside = points_in_polygon(points[t].mean(axis=1), poly)
    return t[inside]


def _domain_seed(spec: DomainSpec) -> int:
    return int(spec.hash[:8], 16) if spec.hash else 0


def triangulate(spec: DomainSpec, h: float, max_nodes: int = MAX_NODES,
                smoothing: int = 6) -> Mesh:
    """Mesh ``spec`` with target edge length ``h``.

    Boundary edges have arclength at most ``h`` (and at least ``h/2`` on every
    segment longer than ``h``); all circumradii are at most ``h``.
    """
    if not (0 < h < spec.diameter):
        raise MeshSizeError(f"h must satisfy 0 < h < diameter ({spec.diameter:.6g}), got {h}")
    est = spec.area / (0.35 * h * h) + spec.perimeter / h
    if est > max_nodes:
        raise MeshSizeError(f"h = {h} would need about {int(est)} nodes (cap {max_nodes})")
    rng = np.random.default_rng(_domain_seed(spec))

    bpts, bedges, bseg, bparam, bcorner = _sample_boundary(spec, h)
    nb = len(bpts)
    # polygon used for inside tests; arcs are refined so the sagitta stays tiny
    poly = bpts
    clearance = 0.5 * h * (1 + 1e-6)

    cand = _lattice(spec, h, rng)
    cand = cand[points_in_polygon(cand, poly)]
    cand = cand[distance_to_polyline(cand, poly) > 0.6 * h]
    interior = cand

    for _ in range(smoothing):
        pts = np.concatenate([bpts, interior])
        t = _delaunay(pts, poly)
        interior = _smooth(pts, t, nb, poly, clearance)

    for _ in range(200):
        pts = np.concatenate([bpts, interior])
        t = _delaunay(pts, poly)
        R = circumradii(pts, t)
        bad = np.flatnonzero(R > h)
        if bad.size == 0:
            break
        new = _refinement_points(pts, t[bad], poly, clearance, h)
        if len(new) == 0:
            raise MeshError("circumradius refinement stalled")
        interior = np.concatenate([interior, new])
        if len(interior) + nb > max_nodes:
            raise MeshSizeError(f"node budget {max_nodes} exceeded")
    else:
        raise MeshError("circumradius refinement did not terminate")

    pts = np.concatenate([bpts, interior])
    t = _delaunay(pts, poly)
    used = np.zeros(len(pts), dtype=bool)
    used[t] = True
    if not used.all():
        # drop unreferenced interior nodes (boundary nodes are always used)
        remap = np.cumsum(used) - 1
        pts, t = pts[used], remap[t]
    mesh = Mesh(pts, t, bedges, bseg, bparam, bcorner, float(h), spec, spec.hash)
    check_mesh(mesh)
    return mesh


def _smooth(pts, t, nb, poly, clearance):
    n = len(pts)
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e = np.concatenate([e, e[:, ::-1]])
    acc = np.zeros((n, 2))
    cnt = np.zeros(n)
    np.add.at(acc, e[:, 0], pts[e[:, 1]])
    np.add.at(cnt, e[:, 0], 1.0)
    interior = pts[nb:].copy()
    target = acc[nb:] / np.maximum(cnt[nb:], 1)[:, None]
    ok = (cnt[nb:] > 0) & points_in_polygon(target, poly)
    ok &= distance_to_polyline(target, poly) > clearance
    interior[ok] = target[ok]
    return interior


def _refinement_points(pts, bad_tris, poly, clearance, h):
    cc = circumcenters(pts, bad_tris)
    cen = pts[bad_tris].mean(axis=1)
    good_cc = points_in_polygon(cc, poly) & (distance_to_polyline(cc, poly) > clearance)
    good_cen = distance_to_polyline(cen, poly) > clearance
    new = np.where(good_cc[:, None], cc, cen)
    new = new[good_cc | good_cen]
    if len(new) == 0:
        return new
    # avoid near-duplicate insertions in one sweep
    order = np.lexsort((new[:, 1], new[:, 0]))
    new = new[order]
    keep = [0]
    for i in range(1, len(new)):
        if np.min(np.linalg.norm(new[keep] - new[i], axis=1)) > 0.25 * h:
            keep.append(i)
    return new[keep]


def check_mesh(mesh: Mesh):
    """Raise :class:`MeshError` if structural invariants are violated."""
    if np.any(mesh.areas <= 0):
        raise MeshError("non-positive triangle area")
    # boundary edges are edges of exactly one triangle, and all such edges are listed
    t = mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshError("non-manifold edge")
    free = {tuple(x) for x in uniq[counts == 1]}
    listed = {tuple(sorted(x)) for x in mesh.bnd_edges.tolist()}
    if free != listed:
        raise MeshError(f"boundary recovery failed ({len(listed ^ free)} mismatched edges)")
    V, E, F = mesh.n_nodes, len(uniq), mesh.n_triangles
    if V - E + F != 1:
        raise MeshError(f"Euler characteristic V - E + F = {V - E + F}, expected 1")


def refine(mesh: Mesh, max_nodes: int = MAX_NODES) -> Mesh:
    """Uniform red refinement; boundary midpoints are moved onto the exact curve."""
    edges = mesh.edges
    n = mesh.n_nodes
    if n + len(edges) > max_nodes:
        raise MeshSizeError(f"node budget {max_nodes} exceeded")
    mid = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    edge_id = {(int(a), int(b)): n + k for k, (a, b) in enumerate(edges)}

    def mid_of(a, b):
        return edge_id[(a, b) if a < b else (b, a)]

    be, bs, bp, bc = [], [], [], []
    for (a, b), seg, (s0, s1), (c0, c1) in zip(mesh.bnd_edges.tolist(), mesh.bnd_segment.tolist(),
                                                mesh.bnd_param.tolist(), mesh.bnd_corner.tolist()):
        m = mid_of(a, b)
        sm = 0.5 * (s0 + s1)
        if mesh.spec is not None:
            mid[m - n] = mesh.spec.segments[seg].point(sm)
        be += [(a, m), (m, b)]
        bs += [seg, seg]
        bp += [(s0, sm), (sm, s1)]
        bc += [(c0, False), (False, c1)]

    t = mesh.triangles
    ab = np.array([mid_of(int(x), int(y)) for x, y in t[:, [0, 1]]])
    bc_ = np.array([mid_of(int(x), int(y)) for x, y in t[:, [1, 2]]])
    ca = np.array([mid_of(int(x), int(y)) for x, y in t[:, [2, 0]]])
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    tris = np.concatenate([
        np.stack([a, ab, ca], 1), np.stack([ab, b, bc_], 1),
        np.stack([ca, bc_, c], 1), np.stack([ab, bc_, ca], 1),
    ])
    nodes = np.concatenate([mesh.nodes, mid])
    out = Mesh(nodes, tris, np.array(be, dtype=np.int64), np.array(bs, dtype=np.int64),
               np.array(bp, dtype=float), np.array(bc, dtype=bool), mesh.h / 2, mesh.spec,
               mesh.domain_hash)
    check_mesh(out)
    return out


# -- text format ------------------------------------------------------------

def _g(x):
    return format(float(x), ".17g")


def write_mesh(mesh: Mesh) -> str:
    lines = [f"mesh v={mesh.n_nodes} t={mesh.n_triangles} b={len(mesh.bnd_edges)} h={_g(mesh.h)}"]
    if mesh.domain_hash:
        lines.append(f"# domain {mesh.domain_hash}")
    lines += [f"n {_g(x)} {_g(y)}" for x, y in mesh.nodes]
    lines += [f"t {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    for (i, j), seg, (s0, s1), (c0, c1) in zip(mesh.bnd_edges.tolist(), mesh.bnd_segment.tolist(),
                                                mesh.bnd_param.tolist(), mesh.bnd_corner.tolist()):
        lines.append(f"b {i} {j} {seg} {_g(s0)} {_g(s1)} {int(c0)} {int(c1)}")
    return "\n".join(lines) + "\n"


def read_mesh(text: str, spec: DomainSpec | None = None) -> Mesh:
    """Parse the text format written by :func:`write_mesh` (0-based indices)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("mesh "):
        raise MeshError("missing 'mesh' header")
    head = dict(kv.split("=", 1) for kv in lines[0].split()[1:])
    nodes, tris, be, bs, bp, bc = [], [], [], [], [], []
    dhash = ""
    for ln in lines[1:]:
        tok = ln.split()
        if tok[0] == "#":
            if len(tok) >= 3 and tok[1] == "domain":
                dhash = tok[2]
            continue
        if tok[0] == "n":
            nodes.append((float(tok[1]), float(tok[2])))
        elif tok[0] == "t":
            tris.append(tuple(int(x) for x in tok[1:4]))
        elif tok[0] == "b":
            be.append((int(tok[1]), int(tok[2])))
            bs.append(int(tok[3]))
            bp.append((float(tok[4]), float(tok[5])))
            bc.append((tok[6] == "1", tok[7] == "1"))
        else:
            raise MeshError(f"unknown record {tok[0]!r}")
    if (len(nodes), len(tris), len(be)) != (int(head["v"]), int(head["t"]), int(head["b"])):
        raise MeshError("record counts do not match header")
    if spec is not None and dhash and spec.hash != dhash:
        raise MeshError("mesh was generated for a different domain")
    mesh = Mesh(np.array(nodes), np.array(tris, dtype=np.int64), np.array(be, dtype=np.int64),
                np.array(bs, dtype=np.int64), np.array(bp, dtype=float), np.array(bc, dtype=bool),
                float(head["h"]), spec, dhash or (spec.hash if spec else ""))
    check_mesh(mesh)
    return mesh
