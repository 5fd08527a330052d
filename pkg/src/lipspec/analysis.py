"""Verification layer: spectrum matching, Helmholtz classification, hot spots.

Everything here consumes the immutable outputs of the meshing and FEM
modules.  Thresholds are stored in each report so that verdicts can be
audited afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from . import geometry
from .fem_scalar import NEUMANN, ScalarEigenpairs, solve_scalar
from .fem_vector import (VectorEigenpairs, boundary_quadrature, build_tangential_constraint,
                         rayleigh, to_flat, vector_system)
from .meshing import Mesh, distance_to_polyline, triangulate

RESIDUAL_THRESHOLD = 0.1
CLUSTER_WIDTH = 1e-3
GRADIENT, PERP_GRADIENT, MIXED = "GradientType", "PerpGradientType", "Mixed"
DIAG_PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)
DIAG_MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)


class NotLipError(ValueError):
    pass


class MultiplicityError(ValueError):
    pass


# -- helpers -------------------------------------------------------------

def field_gradients(mesh: Mesh, u):
    """Per-triangle gradients of both components, each (T, 2)."""
    G = mesh.gradients()
    u = np.asarray(u, dtype=float)
    g1 = np.einsum("tid,ti->td", G, u[mesh.triangles, 0])
    g2 = np.einsum("tid,ti->td", G, u[mesh.triangles, 1])
    return g1, g2


def scalar_gradient(mesh: Mesh, psi):
    return np.einsum("tid,ti->td", mesh.gradients(), np.asarray(psi)[mesh.triangles])


def recover_gradient(mesh: Mesh, psi, constrain=True):
    """Nodal gradient of a P1 function by area-weighted patch averaging.

    With ``constrain`` the result is projected onto the tangential
    constraint (normal part removed at boundary nodes, zero at corners).
    """
    g = scalar_gradient(mesh, psi)
    acc = np.zeros((mesh.n_nodes, 2))
    wsum = np.zeros(mesh.n_nodes)
    A = mesh.areas
    for i in range(3):
        np.add.at(acc, mesh.triangles[:, i], g * A[:, None])
        np.add.at(wsum, mesh.triangles[:, i], A)
    u = acc / wsum[:, None]
    if constrain:
        u = constrain_field(mesh, u)
    return u


def constrain_field(mesh: Mesh, u, constraint=None):
    cm = constraint if constraint is not None else build_tangential_constraint(mesh)
    flat = cm.project(to_flat(u))
    n = mesh.n_nodes
    return np.stack([flat[:n], flat[n:]], axis=1)


def l2_norm(mesh: Mesh, u):
    """L2 norm of a nodal P1 vector field (consistent mass)."""
    p = np.asarray(u)[mesh.triangles]  # (T, 3, 2)
    s = p.sum(axis=1)
    sq = (p ** 2).sum(axis=(1, 2)) + (s ** 2).sum(axis=1)
    return math.sqrt(float((mesh.areas * sq).sum() / 12.0))


def boundary_traces(mesh: Mesh, u):
    """Normal component and squared magnitude of ``u`` at boundary Gauss points."""
    t, w, _, normals = boundary_quadrature(mesh)
    u = np.asarray(u)
    ua, ub = u[mesh.bnd_edges[:, 0]], u[mesh.bnd_edges[:, 1]]
    uq = ua[:, None, :] * (1 - t)[None, :, None] + ub[:, None, :] * t[None, :, None]
    un = np.einsum("eqd,eqd->eq", uq, normals)
    return uq, un, w


def interior_mask(mesh: Mesh, width):
    """Triangles whose barycenter is farther than ``width`` from the boundary."""
    loop = mesh.nodes[mesh.bnd_edges[:, 0]]
    return distance_to_polyline(mesh.barycenters(), loop) > width


def clusters(values, width=CLUSTER_WIDTH):
    """Group ascending values; consecutive entries within ``width`` (relative) chain."""
    groups = []
    for i, v in enumerate(values):
        if groups and abs(v - values[groups[-1][-1]]) <= width * max(abs(v), 1e-300):
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


# -- classification ------------------------------------------------------

@dataclass(frozen=True)
class ClassificationTag:
    """Helmholtz-sector tag of a vector field.

    ``curl_residual`` and ``div_residual`` are L2 norms of the piecewise
    constant curl and divergence relative to the L2 norm of the full
    gradient; ``normal_trace`` is the L2 norm of ``<u, nu>`` on the boundary
    and ``trace_ratio`` that value relative to the L2 norm of ``u``.
    """

    kind: str
    curl_residual: float
    div_residual: float
    normal_trace: float
    trace_ratio: float
    threshold: float = RESIDUAL_THRESHOLD

    def to_dict(self):
        return {"kind": self.kind, "curl_residual": self.curl_residual,
                "div_residual": self.div_residual, "normal_trace": self.normal_trace,
                "trace_ratio": self.trace_ratio, "threshold": self.threshold}


def classify(u, mesh: Mesh, threshold=RESIDUAL_THRESHOLD) -> ClassificationTag:
    """Tag a field as gradient-like, rotated-gradient-like or mixed."""
    u = np.asarray(u, dtype=float)
    norm = l2_norm(mesh, u)
    if norm == 0.0:
        raise ValueError("cannot classify the zero field")
    g1, g2 = field_gradients(mesh, u)
    A = mesh.areas
    curl = g2[:, 0] - g1[:, 1]
    div = g1[:, 0] + g2[:, 1]
    gnorm = math.sqrt(float((A * ((g1 ** 2).sum(1) + (g2 ** 2).sum(1))).sum()))
    extent = float(np.ptp(mesh.nodes, axis=0).max())
    # constant fields: gradients are pure rounding noise
    if gnorm > 1e-10 * norm / extent:
        rc = math.sqrt(float((A * curl ** 2).sum())) / gnorm
        rd = math.sqrt(float((A * div ** 2).sum())) / gnorm
    else:
        rc = rd = 0.0
    _, un, w = boundary_traces(mesh, u)
    ntrace = math.sqrt(float((w * un ** 2).sum()))
    ratio = ntrace / norm
    if rc < threshold and rd >= rc:
        kind = GRADIENT
    elif rd < threshold and ratio < threshold:
        kind = PERP_GRADIENT
    else:
        kind = MIXED
    return ClassificationTag(kind, rc, rd, ntrace, ratio, threshold)


def separate_clusters(vec: VectorEigenpairs, width=CLUSTER_WIDTH) -> VectorEigenpairs:
    """Rotate each eigenvalue cluster's basis to diagonalize the curl energy.

    Inside a (numerically) multiple eigenvalue the computed basis is
    arbitrary and typically mixes gradient and rotated-gradient fields.  The
    rotation keeps the fields mass-orthonormal; values are replaced by the
    Rayleigh quotients of the rotated fields.
    """
    mesh = vec.mesh
    A = mesh.areas
    fields = vec.fields.copy()
    reduced = vec.reduced.copy()
    values = vec.eigenvalues.copy()
    for grp in clusters(vec.eigenvalues, width):
        if len(grp) < 2:
            continue
        curls = []
        for j in grp:
            g1, g2 = field_gradients(mesh, fields[j])
            curls.append(g2[:, 0] - g1[:, 1])
        curls = np.array(curls)
        C = (curls * A) @ curls.T
        _, Z = np.linalg.eigh(0.5 * (C + C.T))
        fields[grp] = np.einsum("ij,jnd->ind", Z.T, vec.fields[grp])
        reduced[:, grp] = vec.reduced[:, grp] @ Z
        R = reduced[:, grp]
        num = np.einsum("ij,ij->j", R, vec.system.A @ R)
        den = np.einsum("ij,ij->j", R, vec.system.B @ R)
        values[grp] = num / den
    form_vals = np.array([to_flat(f) @ (vec.system.form @ to_flat(f)) for f in fields])
    return replace(vec, eigenvalues=values, fields=fields, reduced=reduced,
                   form_values=form_vals, tags=[])


def classify_all(vec: VectorEigenpairs, threshold=RESIDUAL_THRESHOLD,
                 separate=True, width=CLUSTER_WIDTH) -> VectorEigenpairs:
    """Classify every eigenfield, after separating clusters if requested."""
    out = separate_clusters(vec, width) if separate else replace(vec, tags=[])
    out.tags = [classify(f, out.mesh, threshold) for f in out.fields]
    return out


# -- spectrum matching ----------------------------------------------------

@dataclass
class SpectrumMatchReport:
    matches: list
    unmatched_vector: list
    unmatched_scalar: list
    tolerance: float
    clusters: list
    disagreements: list
    K: int

    @property
    def passed(self):
        return (not self.unmatched_vector and not self.unmatched_scalar
                and len(self.matches) == self.K
                and all(m["rel_gap"] <= self.tolerance for m in self.matches))

    @property
    def consistent(self):
        return self.passed and not self.disagreements

    def to_dict(self):
        return {"K": self.K, "tolerance": self.tolerance, "passed": self.passed,
                "consistent": self.consistent, "matches": self.matches,
                "unmatched_vector": self.unmatched_vector,
                "unmatched_scalar": self.unmatched_scalar,
                "clusters": self.clusters, "disagreements": self.disagreements}


def merged_scalar_list(neu: ScalarEigenpairs, dirichlet: ScalarEigenpairs):
    """Positive Neumann and all Dirichlet eigenvalues, ascending, with sources."""
    items = [(float(mu), "Neumann", k + 1) for k, mu in enumerate(neu.eigenvalues) if k >= 1]
    items += [(float(lam), "Dirichlet", k + 1) for k, lam in enumerate(dirichlet.eigenvalues)]
    items.sort(key=lambda x: (x[0], x[1] != "Neumann", x[2]))
    return items


def match_spectra(vec: VectorEigenpairs, neu: ScalarEigenpairs, dirichlet: ScalarEigenpairs,
                  K: int, rel_tol: float = 0.02,
                  cluster_width: float = CLUSTER_WIDTH) -> SpectrumMatchReport:
    """Pair the first ``K`` vector eigenvalues with the merged scalar list.

    Both lists are sorted, so the greedy pairing walks them together; an
    entry is left unmatched when its partner is farther than ``rel_tol``.
    Where several scalar eigenvalues lie within ``rel_tol`` of each other the
    Neumann/Dirichlet attribution is decided by the fields' classification.
    """
    if len(neu.eigenvalues) - 1 < K or len(dirichlet.eigenvalues) < K:
        raise ValueError(f"need at least {K + 1} Neumann and {K} Dirichlet eigenpairs")
    if len(vec.eigenvalues) < K:
        raise ValueError(f"need at least {K} vector eigenpairs")
    if not vec.tags:
        vec = classify_all(vec, width=cluster_width)
    scal = merged_scalar_list(neu, dirichlet)
    eta = [float(x) for x in vec.eigenvalues[:K]]
    first = scal[:K]

    pairs, un_v, un_s = [], [], []
    i = j = 0
    while i < K and j < K:
        a, b = eta[i], first[j][0]
        if abs(a - b) <= rel_tol * abs(b):
            pairs.append([i, j])
            i += 1
            j += 1
        elif a < b:
            un_v.append(i)
            i += 1
        else:
            un_s.append(j)
            j += 1
    un_v += list(range(i, K))
    un_s += list(range(j, K))

    # ambiguity groups over the full scalar list; sources may be swapped within
    groups = clusters([s[0] for s in scal], rel_tol)
    group_of = {idx: g for g, members in enumerate(groups) for idx in members}
    by_group = {}
    for p in pairs:
        by_group.setdefault(group_of[p[1]], []).append(p)
    for g, plist in by_group.items():
        members = groups[g]
        n_pool = [m for m in members if scal[m][1] == "Neumann"]
        d_pool = [m for m in members if scal[m][1] == "Dirichlet"]
        used = {p[1] for p in plist}
        # keep the multiset of matched sources fixed when the group is complete
        if set(members) <= used or len(plist) == len(members):
            n_avail = [m for m in n_pool if m in used]
            d_avail = [m for m in d_pool if m in used]
        else:
            n_avail, d_avail = list(n_pool), list(d_pool)
        need = len(plist)
        assigned = {}
        for p in plist:
            tag = vec.tags[p[0]].kind
            if tag == GRADIENT and n_avail:
                assigned[p[0]] = n_avail.pop(0)
            elif tag == PERP_GRADIENT and d_avail:
                assigned[p[0]] = d_avail.pop(0)
        rest = sorted(n_avail + d_avail)
        for p in plist:
            if p[0] not in assigned:
                assigned[p[0]] = rest.pop(0)
        if len(assigned) == need:
            for p in plist:
                p[1] = assigned[p[0]]

    matches, disagreements = [], []
    for vi, sj in pairs:
        val, src, idx = scal[sj]
        tag = vec.tags[vi]
        gap = abs(eta[vi] - val) / abs(val)
        ok = (src == "Neumann" and tag.kind == GRADIENT) or (src == "Dirichlet" and tag.kind == PERP_GRADIENT)
        entry = {"vector_index": vi + 1, "eta": eta[vi], "source": src, "index": idx,
                 "value": val, "rel_gap": gap, "tag": tag.kind,
                 "curl_residual": tag.curl_residual, "div_residual": tag.div_residual,
                 "trace_ratio": tag.trace_ratio}
        matches.append(entry)
        if not ok:
            disagreements.append(entry)
    return SpectrumMatchReport(
        matches=matches,
        unmatched_vector=[{"vector_index": i + 1, "eta": eta[i]} for i in un_v],
        unmatched_scalar=[{"source": first[j][1], "index": first[j][2], "value": first[j][0]} for j in un_s],
        tolerance=rel_tol,
        clusters=[[i + 1 for i in g] for g in clusters(eta, cluster_width)],
        disagreements=disagreements,
        K=K,
    )


# -- ordering and min-max --------------------------------------------------

@dataclass(frozen=True)
class OrderVerdict:
    passed: bool
    mu2: float
    lambda1: float
    gap: float

    def to_dict(self):
        return {"passed": self.passed, "mu2": self.mu2, "lambda1": self.lambda1, "gap": self.gap}


def order_check(neu: ScalarEigenpairs, dirichlet: ScalarEigenpairs) -> OrderVerdict:
    """Strict ordering of the first nonzero Neumann and first Dirichlet eigenvalue."""
    mu2 = float(neu.eigenvalues[1])
    lam1 = float(dirichlet.eigenvalues[0])
    return OrderVerdict(bool(mu2 < lam1), mu2, lam1, lam1 - mu2)


@dataclass(frozen=True)
class MinMaxVerdict:
    passed: bool
    j: int
    trials: int
    eta_j: float
    min_margin: float
    equality_gap: float
    tol: float

    def to_dict(self):
        return {"passed": self.passed, "j": self.j, "trials": self.trials, "eta_j": self.eta_j,
                "min_margin": self.min_margin, "equality_gap": self.equality_gap, "tol": self.tol}


def _max_rayleigh(A, B, Y):
    H = Y.T @ (A @ Y)
    S = Y.T @ (B @ Y)
    return float(sla.eigh(0.5 * (H + H.T), 0.5 * (S + S.T), eigvals_only=True)[-1])


def minmax_bound_check(vec: VectorEigenpairs, j: int, trials: int = 200, seed: int = 0,
                       tol: float = 1e-8) -> MinMaxVerdict:
    """One-sided Courant-Fischer check on random constrained ``j``-dim subspaces.

    Half of the trial subspaces are uniformly random; the other half perturb
    the span of the first ``j`` eigenvectors by random amounts, which probes
    the bound close to equality.
    """
    if not 1 <= j <= len(vec.eigenvalues):
        raise ValueError(f"j must be in [1, {len(vec.eigenvalues)}]")
    A, B = vec.system.A, vec.system.B
    V = vec.result.eigenvectors[:, :j]
    eta = float(vec.result.eigenvalues[j - 1])
    bound = tol * (abs(eta) + 1.0)
    root = np.random.SeedSequence([seed, j])
    margins = []
    for child in root.spawn(trials):
        rng = np.random.default_rng(child)
        Y = rng.standard_normal((A.shape[0], j))
        if rng.random() < 0.5:
            eps = 10.0 ** rng.uniform(-4, 0)
            Y = V + eps * Y / np.linalg.norm(Y, axis=0) * np.linalg.norm(V, axis=0)
        margins.append(_max_rayleigh(A, B, Y) - eta)
    eq = abs(_max_rayleigh(A, B, V) - eta)
    min_margin = float(min(margins))
    return MinMaxVerdict(bool(min_margin >= -bound and eq <= bound), j, trials, eta, min_margin, float(eq), bound)


# -- hot spots ---------------------------------------------------------------

@dataclass
class HotSpotsReport:
    certificate: geometry.LipCertificate
    h: float
    mu: list
    cluster_size: int
    cluster_width: float
    square: bool
    rectangle: bool
    skipped: bool = False
    sign_flipped: bool = False
    sign_gap: float = float("nan")
    min_deriv_plus: float = float("nan")
    min_deriv_minus: float = float("nan")
    tested_points: int = 0
    argmin: tuple = ()
    argmax: tuple = ()
    argmin_on_boundary: bool = False
    argmax_on_boundary: bool = False
    v0: tuple = ()
    v1: tuple = ()
    v0_unique: bool = False
    v1_unique: bool = False
    dist_min_v0: float = float("nan")
    dist_max_v1: float = float("nan")
    corollary_applicable: bool = False
    extrema_at_v0_v1: bool = False
    strict: bool = True
    claims: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.claims.values())

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items() if k not in ("certificate",)}
        out["certificate"] = self.certificate.to_dict()
        out["passed"] = self.passed
        for k in ("argmin", "argmax", "v0", "v1"):
            out[k] = [float(x) for x in out[k]]
        return out


def _nearest_node(mesh, p):
    return int(np.argmin(np.linalg.norm(mesh.nodes - np.asarray(p), axis=1)))


def _second_neumann(mesh, cluster_width, k=6):
    while True:
        neu = solve_scalar(mesh, NEUMANN, min(k, mesh.n_nodes))
        mu = neu.eigenvalues
        size = len(clusters(mu[1:], cluster_width)[0])
        if size < len(mu) - 1 or len(mu) == mesh.n_nodes:
            return neu, size
        k *= 2


def hotspots_check(spec: geometry.DomainSpec, h: float, strict: bool = True,
                   cluster_width: float = CLUSTER_WIDTH, mesh: Mesh | None = None,
                   neumann: ScalarEigenpairs | None = None) -> HotSpotsReport:
    """Check simplicity of mu_2, diagonal monotonicity and extremum locations.

    The domain must pass the fixed-frame lip test.  Directional derivatives
    along (1, 1)/sqrt 2 and (1, -1)/sqrt 2 are evaluated at barycenters more
    than ``2h`` from the boundary.
    """
    cert = geometry.check_lip(spec)
    if not cert.is_lip:
        raise NotLipError("domain is not a lip domain")
    mesh = mesh if mesh is not None else triangulate(spec, h)
    if neumann is None:
        neumann, size = _second_neumann(mesh, cluster_width)
    else:
        size = len(clusters(neumann.eigenvalues[1:], cluster_width)[0])
    mu = [float(x) for x in neumann.eigenvalues]
    rep = HotSpotsReport(cert, mesh.h, mu, size, cluster_width, cert.square, cert.rectangle, strict=strict)
    rep.claims["mu2_simple"] = size == 1 or cert.square
    if size > 1:
        rep.skipped = True
        if cert.square:
            rep.claims["square_degeneracy"] = size == 2
        return rep

    psi = neumann.functions[:, 1].copy()
    v0, u0, v1, u1 = geometry.extreme_points(spec)
    rep.v0, rep.v1, rep.v0_unique, rep.v1_unique = tuple(v0), tuple(v1), u0, u1
    i0, i1 = _nearest_node(mesh, v0), _nearest_node(mesh, v1)
    if psi[i1] < psi[i0]:
        psi = -psi
        rep.sign_flipped = True
    rep.sign_gap = float(psi[i1] - psi[i0])
    rep.claims["sign_normalization"] = bool(rep.sign_gap > 1e-8 * np.abs(psi).max())

    g = scalar_gradient(mesh, psi)
    mask = interior_mask(mesh, 2 * mesh.h)
    rep.tested_points = int(mask.sum())
    dp, dm = g[mask] @ DIAG_PLUS, g[mask] @ DIAG_MINUS
    rep.min_deriv_plus = float(dp.min()) if dp.size else float("nan")
    rep.min_deriv_minus = float(dm.min()) if dm.size else float("nan")
    if cert.rectangle or not strict:
        rep.claims["monotone"] = bool(dp.size) and bool(min(rep.min_deriv_plus, rep.min_deriv_minus) >= -1e-8)
    else:
        rep.claims["monotone"] = bool(dp.size) and bool(min(rep.min_deriv_plus, rep.min_deriv_minus) > 0)

    bnodes = set(mesh.boundary_nodes.tolist())
    imin, imax = int(np.argmin(psi)), int(np.argmax(psi))
    rep.argmin, rep.argmax = tuple(mesh.nodes[imin]), tuple(mesh.nodes[imax])
    rep.argmin_on_boundary, rep.argmax_on_boundary = imin in bnodes, imax in bnodes
    rep.dist_min_v0 = float(np.linalg.norm(mesh.nodes[imin] - v0))
    rep.dist_max_v1 = float(np.linalg.norm(mesh.nodes[imax] - v1))
    rep.claims["extrema_on_boundary"] = rep.argmin_on_boundary and rep.argmax_on_boundary
    rep.corollary_applicable = bool(u0 and u1 and not geometry.has_diagonal_pieces(spec))
    rep.extrema_at_v0_v1 = bool(rep.argmin_on_boundary and rep.argmax_on_boundary
                                and rep.dist_min_v0 <= mesh.h and rep.dist_max_v1 <= mesh.h)
    if rep.corollary_applicable:
        # only asserted when the extreme points are forced by the geometry
        rep.claims["extrema_at_v0_v1"] = rep.extrema_at_v0_v1
    return rep


@dataclass(frozen=True)
class AbsMinimizerVerdict:
    passed: bool
    mu2: float
    rayleigh_gradient: float
    rayleigh_abs: float
    rel_dev: float
    min_boundary_product: float
    delta: float

    def to_dict(self):
        return dict(self.__dict__)


def diagonal_components(u):
    """Components along (1, -1)/sqrt 2 and (1, 1)/sqrt 2.

    These are the coordinates after rotating the plane by pi/4, the frame in
    which lip-domain normals lie in the second and fourth quadrants.
    """
    u = np.asarray(u)
    return np.stack([u @ DIAG_MINUS, u @ DIAG_PLUS], axis=-1)


def from_diagonal_components(w):
    w = np.asarray(w)
    return w[..., 0:1] * DIAG_MINUS + w[..., 1:2] * DIAG_PLUS


def abs_minimizer_check(spec: geometry.DomainSpec, h: float, delta: float = 0.05,
                        cluster_width: float = CLUSTER_WIDTH, mesh: Mesh | None = None,
                        neumann: ScalarEigenpairs | None = None) -> AbsMinimizerVerdict:
    """Replace the gradient of psi_2 by its componentwise absolute value.

    Components are taken in the rotated frame above.  Passes when the
    Rayleigh quotient of the absolute-value field stays within ``delta``
    (relative) of mu_2 and ``w1 w2 >= -1e-8`` at all boundary Gauss points.
    """
    if not geometry.check_lip(spec).is_lip:
        raise NotLipError("domain is not a lip domain")
    mesh = mesh if mesh is not None else triangulate(spec, h)
    if neumann is None:
        neumann, size = _second_neumann(mesh, cluster_width)
    else:
        size = len(clusters(neumann.eigenvalues[1:], cluster_width)[0])
    if size != 1:
        raise MultiplicityError(f"mu_2 is not simple (cluster of {size})")
    mu2 = float(neumann.eigenvalues[1])
    system = vector_system(mesh)
    cm = system.constraint
    u = recover_gradient(mesh, neumann.functions[:, 1], constrain=False)
    u = constrain_field(mesh, u, cm)
    w = diagonal_components(u)
    v = constrain_field(mesh, from_diagonal_components(np.abs(w)), cm)
    r_u = rayleigh(u, mesh, system)
    r_v = rayleigh(v, mesh, system)
    uq, _, _ = boundary_traces(mesh, u)
    wq = diagonal_components(uq)
    prod = float((wq[..., 0] * wq[..., 1]).min())
    dev = abs(r_v - mu2) / mu2
    return AbsMinimizerVerdict(bool(dev <= delta and prod >= -1e-8), mu2, r_u, r_v, dev, prod, delta)


# -- extrapolation -----------------------------------------------------------

def extrapolate(coarse: float, fine: float, order: int = 2) -> float:
    """Richardson extrapolation for a refinement factor of two."""
    return fine + (fine - coarse) / (2 ** order - 1)


def convergence_table(values, hs, exact=None):
    """Rows ``{h, value, extrapolated, ratio}`` for a sequence of halved meshes."""
    rows = []
    for i, (h, v) in enumerate(zip(hs, values)):
        row = {"h": float(h), "value": float(v)}
        if i > 0:
            row["extrapolated"] = extrapolate(values[i - 1], v)
        if exact is not None:
            row["error"] = float(v - exact)
            if i > 0 and v != exact:
                row["ratio"] = float((values[i - 1] - exact) / (v - exact))
        elif i > 1:
            d1, d0 = v - values[i - 1], values[i - 1] - values[i - 2]
            if d1 != 0:
                row["ratio"] = float(d0 / d1)
        rows.append(row)
    return rows
