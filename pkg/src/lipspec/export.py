"""File formats: JSON reports, CSV tables and legacy VTK for nodal fields."""

from __future__ import annotations

import hashlib
import json
import math
import os

import numpy as np

from . import __version__


def clean(obj):
    """Convert numpy scalars/arrays and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(clean(report), sort_keys=True, indent=2) + "\n"


def content_name(prefix, text, ext="json"):
    return f"{prefix}-{hashlib.sha256(text.encode()).hexdigest()[:16]}.{ext}"


def write_artifact(directory, prefix, text, ext="json"):
    """Write ``text`` under a content-addressed name; never overwrites different content."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, content_name(prefix, text, ext))
    if not os.path.exists(path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return path


def eigen_report(pairs) -> dict:
    """``{bc, h, eigenvalues[], residuals[]}`` for scalar eigenpairs."""
    return pairs.to_dict()


def scalar_csv(mesh, values) -> str:
    lines = ["node,x,y,value"]
    for i, ((x, y), v) in enumerate(zip(mesh.nodes, values)):
        lines.append(f"{i},{x:.17g},{y:.17g},{float(v):.17g}")
    return "\n".join(lines) + "\n"


def vector_csv(mesh, u) -> str:
    lines = ["node,x,y,u1,u2"]
    for i, ((x, y), (a, b)) in enumerate(zip(mesh.nodes, np.asarray(u))):
        lines.append(f"{i},{x:.17g},{y:.17g},{a:.17g},{b:.17g}")
    return "\n".join(lines) + "\n"


def table_csv(rows, columns) -> str:
    lines = [",".join(columns)]
    for r in rows:
        vals = []
        for c in columns:
            v = r.get(c, "")
            vals.append(f"{v:.17g}" if isinstance(v, float) else str(v))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def vtk(mesh, point_data: dict, title="lipspec field") -> str:
    """Legacy ASCII VTK unstructured grid; arrays of shape (N,) or (N, 2)."""
    n, t = mesh.n_nodes, mesh.n_triangles
    out = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {n} double"]
    out += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.nodes]
    out.append(f"CELLS {t} {4 * t}")
    out += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    out.append(f"CELL_TYPES {t}")
    out += ["5"] * t
    if point_data:
        out.append(f"POINT_DATA {n}")
        for name, arr in point_data.items():
            arr = np.asarray(arr, dtype=float)
            ncomp = 1 if arr.ndim == 1 else arr.shape[1]
            out.append(f"SCALARS {name} double {ncomp}")
            out.append("LOOKUP_TABLE default")
            if ncomp == 1:
                out += [f"{v:.17g}" for v in arr]
            else:
                out += [" ".join(f"{v:.17g}" for v in row) for row in arr]
    return "\n".join(out) + "\n"


def verification_report(spec, mesh, neumann=None, dirichlet=None, vector=None, match=None,
                        hotspots=None, verdicts=None, tolerances=None, extra=None) -> dict:
    """Assemble the verification report dictionary."""
    report = {
        "version": __version__,
        "domain_hash": spec.hash,
        "h": mesh.h if mesh is not None else None,
        "spectra": {
            "neumann": [] if neumann is None else list(neumann.eigenvalues),
            "dirichlet": [] if dirichlet is None else list(dirichlet.eigenvalues),
            "vector": [] if vector is None else list(vector.eigenvalues),
        },
        "matches": [] if match is None else match.matches,
        "classifications": [] if vector is None or not vector.tags else [t.to_dict() for t in vector.tags],
        "hotspots": {} if hotspots is None else hotspots.to_dict(),
        "verdicts": verdicts or {},
        "tolerances": tolerances or {},
    }
    if extra:
        report.update(extra)
    return clean(report)
