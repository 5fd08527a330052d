"""Piecewise-smooth planar boundaries built from lines and circular arcs.

A domain is described by its boundary, traversed once with the domain on the
left.  Every segment carries an arclength parametrization ``r(s)`` on
``[0, L]`` together with the exact unit tangent ``r'(s)``, the outer unit
normal ``-r'(s)^perp`` and the signed curvature ``<nu, r''(s)>``, which is
negative where the domain is locally convex.

The text format read by :func:`parse_domain` has one statement per line::

    # comment
    line x0 y0 x1 y1
    arc cx cy r theta0 theta1 ccw|cw
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
CORNER_TOL = 1e-9
CLOSURE_TOL = 1e-12
ANGLE_TOL = 1e-12
LIP_SEARCH_STEPS = 512


class DomainError(ValueError):
    """Raised for malformed or invalid domain descriptions."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


def perp(v):
    """Rotate vectors by +pi/2, ``(a, b) -> (-b, a)``."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _fmt(x):
    return format(float(x), ".17g")


class BoundarySegment:
    """Base class for smooth boundary pieces parametrized by arclength."""

    kind = "segment"

    @property
    def length(self) -> float:
        raise NotImplementedError

    def point(self, s):
        raise NotImplementedError

    def tangent(self, s):
        raise NotImplementedError

    def second_derivative(self, s):
        raise NotImplementedError

    def normal(self, s):
        """Outer unit normal ``-r'(s)^perp``."""
        return -perp(self.tangent(s))

    def curvature(self, s):
        """Signed curvature ``<nu, r''(s)>``."""
        s = np.asarray(s, dtype=float)
        return np.einsum("...i,...i->...", self.normal(s), self.second_derivative(s))

    @property
    def start(self):
        return self.point(0.0)

    @property
    def end(self):
        return self.point(self.length)

    def check_parameter(self, s):
        s = np.asarray(s, dtype=float)
        tol = 1e-12 * max(1.0, self.length)
        if np.any(s < -tol) or np.any(s > self.length + tol):
            raise DomainError(f"arclength parameter outside [0, {self.length!r}]")
        return s

    def normal_angles(self):
        """Angular interval ``(start, width)`` swept by the outer normal."""
        raise NotImplementedError

    def transformed(self, angle, shift=(0.0, 0.0)):
        raise NotImplementedError

    def reversed(self):
        raise NotImplementedError

    def polyline(self, max_angle=math.pi / 32):
        raise NotImplementedError

    def serialize(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Line(BoundarySegment):
    p0: tuple
    p1: tuple

    kind = "line"

    def __post_init__(self):
        object.__setattr__(self, "p0", (float(self.p0[0]), float(self.p0[1])))
        object.__setattr__(self, "p1", (float(self.p1[0]), float(self.p1[1])))
        if self.length == 0.0:
            raise DomainError("degenerate line segment of zero length")

    @property
    def length(self):
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    @property
    def direction(self):
        d = np.subtract(self.p1, self.p0)
        return d / np.linalg.norm(d)

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.p0) + s[..., None] * self.direction

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self.direction, s.shape + (2,)).copy()

    def second_derivative(self, s):
        s = np.asarray(s, dtype=float)
        return np.zeros(s.shape + (2,))

    @property
    def start(self):
        return np.asarray(self.p0)

    @property
    def end(self):
        return np.asarray(self.p1)

    def normal_angles(self):
        n = -perp(self.direction)
        return math.atan2(n[1], n[0]) % TWO_PI, 0.0

    def transformed(self, angle, shift=(0.0, 0.0)):
        R = rotation_matrix(angle)
        return Line(R @ self.p0 + shift, R @ self.p1 + shift)

    def reversed(self):
        return Line(self.p1, self.p0)

    def polyline(self, max_angle=math.pi / 32):
        return np.array([self.p0, self.p1])

    def serialize(self):
        return "line " + " ".join(_fmt(v) for v in (*self.p0, *self.p1))


@dataclass(frozen=True)
class CircularArc(BoundarySegment):
    """Arc of the circle with the given center and radius.

    ``theta1 - theta0`` is the signed sweep: positive for ``ccw`` arcs,
    negative for ``cw`` arcs, at most one full turn.
    """

    center: tuple
    radius: float
    theta0: float
    theta1: float
    ccw: bool = True

    kind = "arc"

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DomainError("arc radius must be positive")
        sweep = self.theta1 - self.theta0
        if (sweep <= 0 and self.ccw) or (sweep >= 0 and not self.ccw):
            raise DomainError("arc sweep theta1 - theta0 must be positive for ccw and negative for cw")
        if abs(sweep) > TWO_PI * (1 + 1e-12):
            raise DomainError("arc sweep exceeds a full turn")

    @property
    def sign(self):
        return 1.0 if self.ccw else -1.0

    @property
    def sweep(self):
        return self.theta1 - self.theta0

    @property
    def length(self):
        return self.radius * abs(self.sweep)

    def angle(self, s):
        return self.theta0 + self.sign * np.asarray(s, dtype=float) / self.radius

    def point(self, s):
        t = self.angle(s)
        return np.asarray(self.center) + self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def tangent(self, s):
        t = self.angle(s)
        return self.sign * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def second_derivative(self, s):
        t = self.angle(s)
        return -np.stack([np.cos(t), np.sin(t)], axis=-1) / self.radius

    def project(self, s):
        """Exact point at parameter ``s`` (used for refinement)."""
        return self.point(s)

    def normal_angles(self):
        # outward for ccw (domain inside the circle), inward for cw
        base = self.theta0 if self.ccw else self.theta0 + math.pi
        if self.ccw:
            return base % TWO_PI, abs(self.sweep)
        return (base + self.sweep) % TWO_PI, abs(self.sweep)

    def transformed(self, angle, shift=(0.0, 0.0)):
        R = rotation_matrix(angle)
        return CircularArc(R @ self.center + shift, self.radius,
                           self.theta0 + angle, self.theta1 + angle, self.ccw)

    def reversed(self):
        return CircularArc(self.center, self.radius, self.theta1, self.theta0, not self.ccw)

    def polyline(self, max_angle=math.pi / 32):
        n = max(2, int(math.ceil(abs(self.sweep) / max_angle)))
        return self.point(np.linspace(0.0, self.length, n + 1))

    def serialize(self):
        vals = (*self.center, self.radius, self.theta0, self.theta1)
        return "arc " + " ".join(_fmt(v) for v in vals) + (" ccw" if self.ccw else " cw")


def rotation_matrix(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Corner:
    vertex: tuple
    angle: float
    incoming: int
    outgoing: int


@dataclass(frozen=True)
class DomainSpec:
    """Validated, positively oriented, simply connected boundary loop."""

    segments: tuple
    corners: tuple
    bbox: tuple
    orientation: int = 1
    _hash: str = field(default="", compare=False, repr=False)

    @property
    def area(self) -> float:
        return signed_area(self.segments)

    @property
    def perimeter(self) -> float:
        return sum(seg.length for seg in self.segments)

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)

    @property
    def hash(self) -> str:
        return self._hash

    def serialize(self) -> str:
        return serialize_domain(self)

    def corner_at(self, point, tol=None):
        """Index of the corner located at ``point`` or ``None``."""
        tol = tol if tol is not None else 1e-10 * self.diameter
        for i, c in enumerate(self.corners):
            if math.hypot(c.vertex[0] - point[0], c.vertex[1] - point[1]) <= tol:
                return i
        return None


def signed_area(segments) -> float:
    """Signed enclosed area from the exact boundary (shoelace plus arc terms)."""
    total = 0.0
    for seg in segments:
        if isinstance(seg, Line):
            (x0, y0), (x1, y1) = seg.p0, seg.p1
            total += x0 * y1 - x1 * y0
        else:
            cx, cy = seg.center
            R, t0, t1 = seg.radius, seg.theta0, seg.theta1
            total += R * (cx * (math.sin(t1) - math.sin(t0)) - cy * (math.cos(t1) - math.cos(t0)))
            total += R * R * (t1 - t0)
    return 0.5 * total


def _bbox(segments):
    pts = [seg.start for seg in segments] + [seg.end for seg in segments]
    for seg in segments:
        if isinstance(seg, CircularArc):
            lo, hi = sorted((seg.theta0, seg.theta1))
            k0, k1 = math.ceil(lo / (math.pi / 2)), math.floor(hi / (math.pi / 2))
            for k in range(k0, k1 + 1):
                t = k * math.pi / 2
                pts.append(np.asarray(seg.center) + seg.radius * np.array([math.cos(t), math.sin(t)]))
    pts = np.array(pts)
    return (float(pts[:, 0].min()), float(pts[:, 1].min()),
            float(pts[:, 0].max()), float(pts[:, 1].max()))


def _turning_angle(t_in, t_out):
    cross = t_in[0] * t_out[1] - t_in[1] * t_out[0]
    dot = t_in[0] * t_out[0] + t_in[1] * t_out[1]
    return math.atan2(cross, dot)


def _segments_intersect(P, Q):
    """Pairwise closed-segment intersection test, ``P``: (n,2,2), ``Q``: (m,2,2)."""
    a, b = P[:, None, 0], P[:, None, 1]
    c, d = Q[None, :, 0], Q[None, :, 1]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)

    def on_seg(p, q, r, o):
        return (np.abs(o) <= 1e-14) & (np.minimum(p[..., 0], q[..., 0]) <= r[..., 0]) \
            & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0])) \
            & (np.minimum(p[..., 1], q[..., 1]) <= r[..., 1]) \
            & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]))

    touch = on_seg(a, b, c, o1) | on_seg(a, b, d, o2) | on_seg(c, d, a, o3) | on_seg(c, d, b, o4)
    return proper | touch


def _check_simple(segments):
    pieces, owner = [], []
    for i, seg in enumerate(segments):
        pl = seg.polyline()
        for k in range(len(pl) - 1):
            pieces.append((pl[k], pl[k + 1]))
            owner.append(i)
    P = np.array(pieces)
    n = len(P)
    if n < 3:
        return
    hit = _segments_intersect(P, P)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap <= 1) | (gap == n - 1)
    hit &= ~adjacent
    if np.any(hit):
        i, j = np.argwhere(hit)[0]
        raise DomainError(f"self-intersecting boundary chain (segments {owner[i]} and {owner[j]})")


def build_domain(segments) -> DomainSpec:
    """Validate a traversal-ordered list of segments into a :class:`DomainSpec`."""
    segments = tuple(segments)
    if not segments:
        raise DomainError("empty boundary")
    bbox = _bbox(segments)
    diam = math.hypot(bbox[2] - bbox[0], bbox[3] - bbox[1])
    n = len(segments)
    for i in range(n):
        gap = np.linalg.norm(segments[i].end - segments[(i + 1) % n].start)
        if gap > CLOSURE_TOL * diam:
            raise DomainError(f"open boundary chain: gap {gap:.3g} between segment {i} and {(i + 1) % n}")
    _check_simple(segments)
    area = signed_area(segments)
    if area <= 0:
        raise DomainError("negative orientation (signed area %.6g); reverse the segment order "
                          "so the domain lies on the left" % area)
    corners = []
    for i in range(n):
        j = (i + 1) % n
        t_in = segments[i].tangent(segments[i].length)
        t_out = segments[j].tangent(0.0)
        turn = _turning_angle(t_in, t_out)
        if abs(turn) <= CORNER_TOL:
            continue
        interior = math.pi - turn
        v = segments[j].start
        if not (0.0 < interior < math.pi):
            raise DomainError(f"non-convex corner at ({v[0]:.6g}, {v[1]:.6g}) "
                              f"with interior angle {interior:.6g}")
        corners.append(Corner((float(v[0]), float(v[1])), interior, i, j))
    # corners listed starting from the start point of segment 0
    corners.sort(key=lambda c: c.outgoing)
    spec = DomainSpec(segments, tuple(corners), bbox, 1)
    text = serialize_domain(spec)
    object.__setattr__(spec, "_hash", hashlib.sha256(text.encode()).hexdigest()[:16])
    return spec


def parse_domain(text: str) -> DomainSpec:
    """Parse domain source text and validate it."""
    segments = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        cols, pos = [], 0
        for tok in tokens:
            pos = line.index(tok, pos)
            cols.append(pos + 1)
            pos += len(tok)
        head = tokens[0]
        if head == "line":
            nargs = 4
        elif head == "arc":
            nargs = 6
        else:
            raise DomainError(f"unknown statement {head!r}", lineno, cols[0])
        if len(tokens) != nargs + 1:
            col = cols[nargs + 1] if len(tokens) > nargs + 1 else len(line.rstrip()) + 1
            raise DomainError(f"'{head}' expects {nargs} arguments, got {len(tokens) - 1}", lineno, col)
        nums = []
        last = nargs if head == "line" else 5
        for k in range(1, last + 1):
            try:
                nums.append(float(tokens[k]))
            except ValueError:
                raise DomainError(f"expected a number, got {tokens[k]!r}", lineno, cols[k]) from None
            if not math.isfinite(nums[-1]):
                raise DomainError("non-finite number", lineno, cols[k])
        try:
            if head == "line":
                segments.append(Line(nums[:2], nums[2:]))
            else:
                orient = tokens[6]
                if orient not in ("ccw", "cw"):
                    raise DomainError(f"expected 'ccw' or 'cw', got {orient!r}", lineno, cols[6])
                segments.append(CircularArc(nums[:2], nums[2], nums[3], nums[4], orient == "ccw"))
        except DomainError as err:
            if err.line is not None:
                raise
            raise DomainError(str(err), lineno, cols[0]) from None
    return build_domain(segments)


def load_domain(path) -> DomainSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_domain(fh.read())


def serialize_domain(spec: DomainSpec) -> str:
    return "\n".join(seg.serialize() for seg in spec.segments) + "\n"


def signed_curvature(segment: BoundarySegment, s):
    """Signed curvature ``<nu(r(s)), r''(s)>`` of ``segment`` at arclength ``s``.

    Zero on lines, ``-1/R`` on arcs bounding a disk-like region and ``+1/R``
    on arcs traversed clockwise (domain outside the circle).
    """
    s = segment.check_parameter(s)
    return segment.curvature(s)


def boundary_frame(spec: DomainSpec, index: int, s):
    """Return ``(point, tangent, outer normal)`` on segment ``index`` at ``s``."""
    if not 0 <= index < len(spec.segments):
        raise IndexError(f"segment index {index} out of range")
    seg = spec.segments[index]
    s = seg.check_parameter(s)
    return seg.point(s), seg.tangent(s), seg.normal(s)


# -- constructors ---------------------------------------------------------

def polygon(vertices) -> DomainSpec:
    """Closed polygon through ``vertices`` (counter-clockwise)."""
    v = [tuple(map(float, p)) for p in vertices]
    return build_domain(Line(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def disk(radius=1.0, center=(0.0, 0.0)) -> DomainSpec:
    return build_domain([CircularArc(center, radius, 0.0, TWO_PI, True)])


def diamond() -> DomainSpec:
    """Square of side sqrt(2) with vertices (+-1, 0), (0, +-1)."""
    return polygon([(1, 0), (0, 1), (-1, 0), (0, -1)])


def rotated(spec: DomainSpec, angle: float, shift=(0.0, 0.0)) -> DomainSpec:
    return build_domain(seg.transformed(angle, shift) for seg in spec.segments)


def rectangle(width, height, angle=0.0, center=(0.0, 0.0)) -> DomainSpec:
    w, h = width / 2, height / 2
    base = polygon([(-w, -h), (w, -h), (w, h), (-w, h)])
    return rotated(base, angle, center)


def regular_polygon(n, radius=1.0, phase=0.0) -> DomainSpec:
    t = phase + TWO_PI * np.arange(n) / n
    return polygon(np.stack([radius * np.cos(t), radius * np.sin(t)], axis=1))


# -- lip test -------------------------------------------------------------

@dataclass(frozen=True)
class LipCertificate:
    """Outcome of the normal-cone test for lip domains.

    ``verdict`` refers to the requested ``rotation``; ``search_rotation`` is
    the first angle ``k pi/256`` certifying the domain when a search was
    requested (``None`` if none does or no search was made).
    """

    verdict: str
    rotation: float
    intervals: tuple
    violating: tuple
    rectangle: bool
    square: bool
    searched: bool = False
    search_rotation: float | None = None

    @property
    def is_lip(self) -> bool:
        return self.verdict == "Lip"

    @property
    def search_verdict(self):
        if not self.searched:
            return None
        return "Lip" if self.search_rotation is not None else "NotLip"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "rotation": self.rotation,
            "intervals": [list(iv) for iv in self.intervals],
            "violating": list(self.violating),
            "rectangle": self.rectangle,
            "square": self.square,
            "searched": self.searched,
            "search_rotation": self.search_rotation,
            "search_verdict": self.search_verdict,
        }


_CONES = (math.pi / 4, 5 * math.pi / 4)


def _in_cone(start, width, tol=ANGLE_TOL):
    for c in _CONES:
        d = (start - c + tol) % TWO_PI - tol
        if -tol <= d and d + width <= math.pi / 2 + tol:
            return True
    return False


def _normal_intervals(spec, rotation):
    out = []
    for seg in spec.segments:
        start, width = seg.normal_angles()
        out.append(((start + rotation) % TWO_PI, width))
    return out


def _violations(intervals):
    return tuple(i for i, (a, w) in enumerate(intervals) if not _in_cone(a, w))


def is_rectangle(spec: DomainSpec, tol=1e-9):
    if len(spec.segments) != 4 or len(spec.corners) != 4:
        return False, False
    if not all(isinstance(s, Line) for s in spec.segments):
        return False, False
    if not all(abs(c.angle - math.pi / 2) <= tol for c in spec.corners):
        return False, False
    lengths = [s.length for s in spec.segments]
    return True, max(lengths) - min(lengths) <= tol * max(lengths)


def check_lip(spec: DomainSpec, rotation: float = 0.0, search: bool = False) -> LipCertificate:
    """Cone test: every outer normal angle in [pi/4, 3pi/4] U [5pi/4, 7pi/4].

    Closed cones, so boundary angles count as inside.  Segments are tested
    individually; corners have no normal and are skipped.
    """
    intervals = _normal_intervals(spec, rotation)
    bad = _violations(intervals)
    rect, square = is_rectangle(spec)
    found = None
    if search:
        for k in range(LIP_SEARCH_STEPS):
            rho = k * math.pi / 256
            if not _violations(_normal_intervals(spec, rho)):
                found = rho
                break
    return LipCertificate(
        verdict="NotLip" if bad else "Lip",
        rotation=float(rotation),
        intervals=tuple((float(a), float(w)) for a, w in intervals),
        violating=bad,
        rectangle=rect,
        square=square,
        searched=bool(search),
        search_rotation=found,
    )


def extreme_points(spec: DomainSpec, tol=None):
    """Leftmost and rightmost boundary points with uniqueness flags.

    Returns ``(v0, v0_unique, v1, v1_unique)``.
    """
    tol = tol if tol is not None else 1e-10 * spec.diameter
    x0, _, x1, _ = spec.bbox
    result = []
    for target in (x0, x1):
        cands = []
        flat = False
        for seg in spec.segments:
            for p in (seg.start, seg.end):
                if abs(p[0] - target) <= tol:
                    cands.append(tuple(p))
            if isinstance(seg, Line):
                if abs(seg.p0[0] - target) <= tol and abs(seg.p1[0] - target) <= tol:
                    flat = True
            else:
                t = math.pi if target == x0 else 0.0
                lo, hi = sorted((seg.theta0, seg.theta1))
                k = math.ceil((lo - t) / TWO_PI)
                if t + k * TWO_PI <= hi:
                    p = np.asarray(seg.center) + seg.radius * np.array([math.cos(t), math.sin(t)])
                    if abs(p[0] - target) <= tol:
                        cands.append(tuple(p))
        uniq = []
        for p in cands:
            if not any(math.hypot(p[0] - q[0], p[1] - q[1]) <= tol for q in uniq):
                uniq.append(p)
        result.append((uniq[0], len(uniq) == 1 and not flat))
    (v0, u0), (v1, u1) = result
    return v0, u0, v1, u1


def has_diagonal_pieces(spec: DomainSpec, tol=1e-12):
    """True if some line segment is parallel to e1 + e2 or e1 - e2."""
    for seg in spec.segments:
        if isinstance(seg, Line):
            d = seg.direction
            if abs(abs(d[0]) - abs(d[1])) <= tol:
                return True
    return False
