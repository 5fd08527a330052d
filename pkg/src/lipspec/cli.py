"""Command line front end.

Every command prints its report (JSON, or a CSV table with ``--format csv``)
to standard output and stores the report and any field/table files in the
output directory under content-hash names.  Errors are written to standard
error as a JSON object ``{"error": ..., "message": ...}``.

Exit codes: 0 success, 1 a checked claim failed, 2 usage/config/domain
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analysis, export, geometry, meshing
from .fem_scalar import DIRICHLET, NEUMANN, solve_scalar
from .fem_vector import ConstraintError, solve_vector
from .linalg import SolverError

OUTPUT_ENV = "LIPSPEC_OUTPUT_DIR"
EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# option name -> (type, default); every entry may be given in a config file
OPTIONS = {
    "h": (float, 0.05),
    "k": (int, 4),
    "tol": (float, 0.02),
    "solver_tol": (float, 1e-8),
    "levels": (int, 2),
    "seed": (int, 0),
    "trials": (int, 200),
    "bc": (str, NEUMANN),
    "method": (str, "auto"),
    "format": (str, "json"),
    "strict": (bool, False),
    "search": (bool, False),
    "max_nodes": (int, meshing.MAX_NODES),
    "out": (str, None),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    domain: str
    h: float
    k: int
    tol: float
    solver_tol: float
    levels: int
    seed: int
    trials: int
    bc: str
    method: str
    format: str
    strict: bool
    search: bool
    max_nodes: int
    out: str
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("h", "tol", "solver_tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.k < 1:
            raise UsageError("k must be at least 1")
        if self.levels < 0:
            raise UsageError("levels must be nonnegative")
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if self.max_nodes < 3:
            raise UsageError("max_nodes must be at least 3")
        if self.bc not in (NEUMANN, DIRICHLET):
            raise UsageError("bc must be neumann or dirichlet")
        if self.method not in ("auto", "dense", "lanczos"):
            raise UsageError("method must be auto, dense or lanczos")
        if self.format not in ("json", "csv"):
            raise UsageError("format must be json or csv")
        return self

    def tolerances(self):
        return {"match_rel_tol": self.tol, "solver_tol": self.solver_tol,
                "residual_threshold": analysis.RESIDUAL_THRESHOLD,
                "cluster_width": analysis.CLUSTER_WIDTH}


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path):
    """Parse a ``key = value`` file; blank lines and ``#`` comments are ignored."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    values = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        typ = OPTIONS[key][0]
        try:
            values[key] = _bool(val) if typ is bool else typ(val)
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}: {val!r}") from exc
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value file; command line flags take precedence")
    common.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./lipspec-out)")
    common.add_argument("--format", choices=["json", "csv"], help="stdout format")
    common.add_argument("--seed", type=int)
    common.add_argument("--method", choices=["auto", "dense", "lanczos"], help="eigensolver")
    common.add_argument("--solver-tol", dest="solver_tol", type=float)
    common.add_argument("--max-nodes", dest="max_nodes", type=int)

    def with_domain(p, h=True):
        p.add_argument("domain", help="domain file (line/arc statements)")
        if h:
            p.add_argument("--h", type=float, help="target mesh size")
        return p

    parser = _Parser(prog="lipspec", description="Laplacian spectra and hot spots checks on planar domains.")
    parser.add_argument("--version", action="version", version=f"lipspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = with_domain(sub.add_parser("validate", parents=[common], help="geometry checks and lip certificate"), h=False)
    p.add_argument("--search", action="store_true", default=None, help="also search rotations")

    p = with_domain(sub.add_parser("mesh", parents=[common], help="triangulate a domain"))
    p.add_argument("--refine", type=int, default=0, help="uniform refinements after meshing")

    solve = sub.add_parser("solve", help="eigenpairs").add_subparsers(dest="target", required=True,
                                                                        parser_class=_Parser)
    p = with_domain(solve.add_parser("scalar", parents=[common], help="Neumann or Dirichlet Laplacian"))
    p.add_argument("--bc", choices=[NEUMANN, DIRICHLET])
    p.add_argument("--k", type=int)
    p = with_domain(solve.add_parser("vector", parents=[common], help="tangential vector form"))
    p.add_argument("--k", type=int)

    verify = sub.add_parser("verify", help="checks").add_subparsers(dest="target", required=True,
                                                                     parser_class=_Parser)
    p = with_domain(verify.add_parser("spectrum", parents=[common], help="vector vs scalar spectra"))
    p.add_argument("--k", type=int)
    p.add_argument("--tol", type=float, help="relative matching tolerance")
    p.add_argument("--trials", type=int, help="random subspaces per min-max check")
    p = with_domain(verify.add_parser("hotspots", parents=[common], help="hot spots checks on lip domains"))
    p.add_argument("--strict", action="store_true", default=None, help="require strictly positive derivatives")

    study = sub.add_parser("study", help="studies").add_subparsers(dest="target", required=True,
                                                                   parser_class=_Parser)
    p = with_domain(study.add_parser("convergence", parents=[common], help="eigenvalues under refinement"))
    p.add_argument("--levels", type=int)
    p.add_argument("--k", type=int)
    return parser


def make_config(ns) -> RunConfig:
    merged = {k: v for k, (_, v) in OPTIONS.items()}
    if getattr(ns, "config", None):
        merged.update(read_config(ns.config))
    for key in OPTIONS:
        val = getattr(ns, key, None)
        if val is not None:
            merged[key] = val
    if merged["out"] is None:
        merged["out"] = os.environ.get(OUTPUT_ENV) or "lipspec-out"
    command = ns.command + (f" {ns.target}" if getattr(ns, "target", None) else "")
    return RunConfig(command=command, domain=ns.domain, **merged).validate()


# -- commands ------------------------------------------------------------------

def _header(cfg, spec, h=None):
    return {"command": cfg.command, "version": __version__, "domain_hash": spec.hash,
            "h": h, "seed": cfg.seed, "tolerances": cfg.tolerances()}


def _mesh(cfg, spec):
    return meshing.triangulate(spec, cfg.h, max_nodes=cfg.max_nodes)


def _spectrum_rows(values, residuals, **extra):
    return [dict(index=i + 1, eigenvalue=float(v), residual=float(r), **extra)
            for i, (v, r) in enumerate(zip(values, residuals))]


def cmd_validate(cfg, spec):
    cert = geometry.check_lip(spec, search=cfg.search)
    report = _header(cfg, spec)
    report.update(cert.to_dict())
    report.update({"area": spec.area, "perimeter": spec.perimeter, "diameter": spec.diameter,
                   "segments": len(spec.segments), "corners": len(spec.corners),
                   "corner_angles": [c.angle for c in spec.corners]})
    return report, [], []


def cmd_mesh(cfg, spec):
    mesh = _mesh(cfg, spec)
    for _ in range(cfg.extra.get("refine") or 0):
        mesh = meshing.refine(mesh, cfg.max_nodes)
    meshing.check_mesh(mesh)
    text = meshing.write_mesh(mesh)
    ang = meshing.min_angles(mesh.nodes, mesh.triangles)
    rad = meshing.circumradii(mesh.nodes, mesh.triangles)
    report = _header(cfg, spec, mesh.h)
    report.update({"nodes": mesh.n_nodes, "triangles": mesh.n_triangles,
                   "boundary_edges": len(mesh.bnd_edges),
                   "min_angle_deg": float(np.degrees(ang.min())),
                   "max_circumradius_over_h": float(rad.max() / mesh.h)})
    return report, [("mesh", text, "mesh")], []


def cmd_solve_scalar(cfg, spec):
    mesh = _mesh(cfg, spec)
    pairs = solve_scalar(mesh, cfg.bc, min(cfg.k, mesh.n_nodes), tol=cfg.solver_tol, method=cfg.method)
    report = _header(cfg, spec, mesh.h)
    report.update(export.eigen_report(pairs))
    report["orthonormality_error"] = pairs.result.meta.get("orthonormality_error")
    files = [("field", export.scalar_csv(mesh, pairs.functions[:, j]), "csv")
             for j in range(pairs.functions.shape[1])]
    files.append(("fields", export.vtk(mesh, {f"psi{j + 1}": pairs.functions[:, j]
                                              for j in range(pairs.functions.shape[1])}), "vtk"))
    return report, files, _spectrum_rows(pairs.eigenvalues, pairs.residuals, bc=cfg.bc)


def cmd_solve_vector(cfg, spec):
    mesh = _mesh(cfg, spec)
    vec = analysis.classify_all(solve_vector(mesh, cfg.k, tol=cfg.solver_tol, method=cfg.method))
    report = _header(cfg, spec, mesh.h)
    report.update(vec.to_dict())
    files = [("vfield", export.vector_csv(mesh, f), "csv") for f in vec.fields]
    files.append(("vfields", export.vtk(mesh, {f"u{j + 1}": f for j, f in enumerate(vec.fields)}), "vtk"))
    rows = _spectrum_rows(vec.eigenvalues, vec.residuals)
    for r, t in zip(rows, vec.tags):
        r["kind"] = t.kind
    return report, files, rows


def cmd_verify_spectrum(cfg, spec):
    mesh = _mesh(cfg, spec)
    K = cfg.k
    kw = dict(tol=cfg.solver_tol, method=cfg.method)
    neu = solve_scalar(mesh, NEUMANN, K + 1, **kw)
    dirichlet = solve_scalar(mesh, DIRICHLET, K, **kw)
    # two spare vector pairs so that a cluster at position K is not cut
    vec = analysis.classify_all(solve_vector(mesh, K + 2, **kw))
    match = analysis.match_spectra(vec, neu, dirichlet, K, rel_tol=cfg.tol)
    order = analysis.order_check(neu, dirichlet)
    minmax = [analysis.minmax_bound_check(vec, j, trials=cfg.trials, seed=cfg.seed,
                                          tol=cfg.solver_tol).to_dict()
              for j in range(1, min(3, K) + 1)]
    verdicts = {"spectrum_match": match.passed, "classification_consistent": match.consistent,
                "order": order.to_dict(), "minmax": minmax}
    report = export.verification_report(
        spec, mesh, neu, dirichlet, vec, match, verdicts=verdicts, tolerances=cfg.tolerances(),
        extra={"command": cfg.command, "seed": cfg.seed, "match": match.to_dict()})
    ok = match.consistent and order.passed and all(m["passed"] for m in minmax)
    rows = [{"vector_index": m["vector_index"], "eta": m["eta"], "source": m["source"],
             "index": m["index"], "value": m["value"], "rel_gap": m["rel_gap"], "tag": m["tag"]}
            for m in match.matches]
    return report, [], rows, ok


def cmd_verify_hotspots(cfg, spec):
    if not geometry.check_lip(spec).is_lip:
        raise analysis.NotLipError("domain is not a lip domain")
    mesh = _mesh(cfg, spec)
    rep = analysis.hotspots_check(spec, cfg.h, strict=cfg.strict, mesh=mesh)
    verdicts = {"hotspots": rep.passed}
    extra = {"command": cfg.command, "seed": cfg.seed, "strict": cfg.strict}
    if not rep.skipped:
        neu = solve_scalar(mesh, NEUMANN, 2, tol=cfg.solver_tol, method=cfg.method)
        am = analysis.abs_minimizer_check(spec, cfg.h, mesh=mesh, neumann=neu)
        verdicts["abs_minimizer"] = am.to_dict()
    report = export.verification_report(spec, mesh, hotspots=rep, verdicts=verdicts,
                                        tolerances=cfg.tolerances(), extra=extra)
    report["spectra"]["neumann"] = rep.mu
    ok = rep.passed and verdicts.get("abs_minimizer", {}).get("passed", True)
    rows = [{"claim": k, "passed": bool(v)} for k, v in sorted(rep.claims.items())]
    return report, [], rows, ok


def cmd_study_convergence(cfg, spec):
    mesh = _mesh(cfg, spec)
    kw = dict(tol=cfg.solver_tol, method=cfg.method)
    levels = []
    for lev in range(cfg.levels + 1):
        if lev:
            mesh = meshing.refine(mesh, cfg.max_nodes)
        neu = solve_scalar(mesh, NEUMANN, cfg.k + 1, **kw)
        dirichlet = solve_scalar(mesh, DIRICHLET, cfg.k, **kw)
        vec = solve_vector(mesh, cfg.k, **kw)
        levels.append({"level": lev, "h": mesh.h, "nodes": mesh.n_nodes,
                       "neumann": [float(x) for x in neu.eigenvalues[1:]],
                       "dirichlet": [float(x) for x in dirichlet.eigenvalues],
                       "vector": [float(x) for x in vec.eigenvalues]})
    hs = [lv["h"] for lv in levels]
    tables = {}
    for name in ("neumann", "dirichlet", "vector"):
        for j in range(cfg.k):
            tables[f"{name}_{j + 1}"] = analysis.convergence_table([lv[name][j] for lv in levels], hs)
    report = _header(cfg, spec, hs[0])
    report.update({"levels": levels, "tables": tables})
    rows = []
    for key, tab in tables.items():
        for lev, r in enumerate(tab):
            rows.append({"quantity": key, "level": lev, "h": r["h"], "value": r["value"],
                         "extrapolated": r.get("extrapolated", ""), "ratio": r.get("ratio", "")})
    return report, [], rows


COMMANDS = {
    "validate": cmd_validate,
    "mesh": cmd_mesh,
    "solve scalar": cmd_solve_scalar,
    "solve vector": cmd_solve_vector,
    "verify spectrum": cmd_verify_spectrum,
    "verify hotspots": cmd_verify_hotspots,
    "study convergence": cmd_study_convergence,
}


def _emit_error(kind, message, stream):
    stream.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        cfg = make_config(ns)
        cfg.extra["refine"] = getattr(ns, "refine", 0)
        if cfg.extra["refine"] < 0:
            raise UsageError("refine must be nonnegative")
        spec = geometry.load_domain(cfg.domain)
        out = COMMANDS[cfg.command](cfg, spec)
        report, files, rows = out[:3]
        ok = out[3] if len(out) > 3 else True
        stem = cfg.command.replace(" ", "-")
        names = [os.path.basename(export.write_artifact(cfg.out, f"{stem}-{p}", text, ext))
                 for p, text, ext in files]
        if rows:
            columns = list(dict.fromkeys(c for r in rows for c in r))
            table = export.table_csv(rows, columns)
            names.append(os.path.basename(export.write_artifact(cfg.out, f"{stem}-table", table, "csv")))
        if names:
            report["artifacts"] = names
        report["passed"] = bool(ok)
        text = export.dumps(report)
        export.write_artifact(cfg.out, stem, text)
        if cfg.format == "csv":
            stdout.write(table if rows else "")
        else:
            stdout.write(text)
        if not ok:
            _emit_error("verification", f"{cfg.command}: a checked claim failed", stderr)
            return EXIT_VERIFY
        return EXIT_OK
    except UsageError as exc:
        _emit_error("usage", str(exc), stderr)
        return EXIT_USAGE
    except geometry.DomainError as exc:
        _emit_error("domain", str(exc), stderr)
        return EXIT_USAGE
    except meshing.MeshSizeError as exc:
        _emit_error("mesh_size", str(exc), stderr)
        return EXIT_USAGE
    except analysis.NotLipError as exc:
        _emit_error("not_lip", str(exc), stderr)
        return EXIT_USAGE
    except OSError as exc:
        _emit_error("io", f"{exc.filename}: {exc.strerror}", stderr)
        return EXIT_USAGE
    except (SolverError, meshing.MeshError, ConstraintError, analysis.MultiplicityError,
            np.linalg.LinAlgError) as exc:
        _emit_error("numerical", str(exc), stderr)
        return EXIT_NUMERIC


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
