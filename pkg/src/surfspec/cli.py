"""Command-line entry point.

Subcommands: mesh, spectrum, sweep, heightscan, maximize, verify. A JSON
config file mirrors every flag; flags given on the command line override it.
Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance, maximize, reports, surgery
from .config import RunConfig, config_hash, from_dict, to_dict
from .geometry import GeometryError, build_standard, save_json, write_off
from .spectral import SpectralError, assemble, solve_spectrum, write_spectrum

log = logging.getLogger("surfspec")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

SURFACES = {
    "flat-torus:equilateral": ("flat_torus", {"basis": "equilateral", "area": 1.0}, "equilateral_torus"),
    "flat-torus:square": ("flat_torus", {"basis": "square", "area": 4 * np.pi**2}, "square_torus"),
    "round-sphere": ("round_sphere", {}, "round_sphere"),
    "projective-plane": ("projective_plane", {}, None),
    "flat-klein-bottle": ("flat_klein_bottle", {}, None),
    "flat-rectangle": ("flat_rectangle", {}, None),
}
ATTACH = {"cross-cap": "cross_cap", "handle": "handle"}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- parsing

def parse_list(text: str) -> tuple:
    """``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) == 2:
                return tuple(float(p) for p in parts)
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            return tuple(float(x) for x in np.round(np.linspace(a, b, n), 12))
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError as err:
        raise UsageError(f"cannot parse number list {text!r}") from err


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--surface", choices=sorted(SURFACES))
    common.add_argument("--attach", choices=sorted(ATTACH))
    common.add_argument("--eps", help="radii, e.g. 0.08,0.04,0.02")
    common.add_argument("--h", help="heights, e.g. 0.1:0.5:9 or 0.15,0.3")
    common.add_argument("--k", type=int)
    common.add_argument("--res", type=int)
    common.add_argument("--tol", type=float, help="relative eigenvalue clustering tolerance")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--jobs", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="surfspec", description="Laplace spectra of surfaces and thin surgeries.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("mesh", parents=[common], help="build a surface (optionally surgered) and save it")
    sub.add_parser("spectrum", parents=[common], help="lowest eigenvalues as CSV and JSON")
    sw = sub.add_parser("sweep", parents=[common], help="deviation from the limit spectrum over (eps, h)")
    sw.add_argument("--fail-on-error", action="store_true", help="exit 3 if any grid point fails to solve")
    sub.add_parser("heightscan", parents=[common], help="locate the height of the eigenvalue crossing")
    mx = sub.add_parser("maximize", parents=[common], help="lambda_1 * area ascent in the conformal class")
    mx.add_argument("--max-iter", type=int)
    mx.add_argument("--resume", help="checkpoint JSON to continue from")
    vf = sub.add_parser("verify", parents=[common], help="run the acceptance suite and write a manifest")
    vf.add_argument("--suite", choices=sorted(acceptance.SUITES))
    return p


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config {args.config}: {err}") from err
    try:
        cfg = from_dict(RunConfig, data)
    except (TypeError, ValueError) as err:
        raise UsageError(str(err)) from err
    over = {"command": args.command}
    for name in ("surface", "k", "res", "tol", "seed", "out", "jobs"):
        v = getattr(args, name)
        if v is not None:
            over[name] = v
    if args.attach is not None:
        over["attach"] = args.attach
    if args.eps is not None:
        over["eps"] = parse_list(args.eps)
    if args.h is not None:
        over["h"] = parse_list(args.h)
    if getattr(args, "suite", None) is not None:
        over["suite"] = args.suite
    if getattr(args, "max_iter", None) is not None:
        over["maximize"] = dataclasses.replace(cfg.maximize, max_iter=args.max_iter)
    cfg = dataclasses.replace(cfg, **over)
    if cfg.surface not in SURFACES:
        raise UsageError(f"unknown surface {cfg.surface!r}")
    if cfg.attach is not None and cfg.attach not in ATTACH:
        raise UsageError(f"unknown attachment {cfg.attach!r}")
    if any(e <= 0 for e in cfg.eps) or any(h <= 0 for h in cfg.h):
        raise UsageError("eps and h values must be positive")
    if cfg.k < 2 or cfg.res < 1 or cfg.jobs < 1:
        raise UsageError("k must be >= 2, res and jobs >= 1")
    return cfg


# ---------------------------------------------------------------- helpers

def _solver(cfg: RunConfig) -> surgery.SolverConfig:
    return surgery.SolverConfig(k=cfg.k, seed=cfg.seed, cluster_tol=cfg.tol)


def _base(cfg: RunConfig) -> surgery.BaseSurface:
    name = SURFACES[cfg.surface][2]
    if name is None:
        raise UsageError(f"surgery is not available on {cfg.surface}")
    return surgery.standard_base(name, cfg.res, _solver(cfg))


def _surface(cfg: RunConfig):
    """Mesh and metric of the surface, surgered once if --attach is given."""
    if cfg.attach is None:
        kind, params, _ = SURFACES[cfg.surface]
        mesh, metric = build_standard(kind, cfg.res, **params)
        return mesh, metric, None
    base = _base(cfg)
    kind = ATTACH[cfg.attach]
    spec = surgery.SurgerySpec(kind, base.centers[kind], cfg.eps[0], cfg.h[0], cfg.surgery.n_angular)
    s = surgery.attach(base, spec, cfg.surgery)
    return s.mesh, s.metric, s


def _out(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_config(cfg: RunConfig, out: Path, h: str) -> None:
    reports.write_json(out / f"{cfg.command}.config.json", {"config": to_dict(cfg)}, h)


# ---------------------------------------------------------------- commands

def cmd_mesh(cfg: RunConfig) -> int:
    out, h = _out(cfg), config_hash(cfg)
    mesh, metric, s = _surface(cfg)
    save_json(out / "mesh.json", mesh, metric)
    if mesh.chart is not None and getattr(mesh.chart, "kind", "") == "round_sphere":
        pts = np.array([mesh.chart.vertex_position(mesh, v) for v in range(mesh.n_vertices)])
        write_off(out / "mesh.off", mesh, pts)
    info = {"vertices": mesh.n_vertices, "edges": mesh.n_edges, "faces": mesh.n_faces,
            "euler_characteristic": mesh.euler_characteristic(), "orientable": mesh.is_orientable,
            "closed": mesh.is_closed, "area": metric.area(mesh)}
    if s is not None:
        info["glue_epsilon"] = s.glue_epsilon
        info["glue_convention"] = "matched polygon perimeter"
    reports.write_json(out / "mesh.summary.json", info, h, {"area": "length^2"})
    print(json.dumps(reports.plain(info), sort_keys=True))
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    out, h = _out(cfg), config_hash(cfg)
    mesh, metric, _ = _surface(cfg)
    spec = solve_spectrum(assemble(mesh, metric), cfg.k, seed=cfg.seed, cluster_tol=cfg.tol)
    area = metric.area(mesh)
    rows = [(i, v, v * area, int(c)) for i, (v, c) in enumerate(zip(spec.eigenvalues, spec.clusters))]
    reports.write_csv(out / "spectrum.csv", f"spectrum of {cfg.surface}", h,
                      ("index", "eigenvalue", "lambda_area", "cluster"), rows,
                      {"index": "1", "eigenvalue": "1/length^2", "lambda_area": "1", "cluster": "1"})
    write_spectrum(out / "spectrum.json", spec, {"config_hash": h, "surface": cfg.surface})
    print(f"lambda_1 * area = {float(spec.eigenvalues[1] * area)!r} (multiplicity {spec.multiplicity(1)})")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, fail_on_error: bool = False) -> int:
    if cfg.attach is None:
        raise UsageError("sweep needs --attach")
    out, h = _out(cfg), config_hash(cfg)
    base = _base(cfg)
    kind = ATTACH[cfg.attach]
    res = surgery.convergence_sweep(base, kind, cfg.h, cfg.eps, k_max=min(cfg.k, 4), solver=_solver(cfg),
                                    surgery=cfg.surgery, jobs=cfg.jobs)
    rows = []
    for (e, hh) in res.grid:
        if (e, hh) not in res.eigenvalues:
            continue
        for k, (lam, nu, d, r) in enumerate(zip(res.eigenvalues[(e, hh)], res.limit[(e, hh)], res.deviations[(e, hh)],
                                                res.relative[(e, hh)])):
            rows.append((e, hh, k, lam, nu, d, r))
    cols = ("eps", "h", "k", "eigenvalue", "limit", "deviation", "relative")
    units = {"eps": "length", "h": "length", "k": "1", "eigenvalue": "1/length^2", "limit": "1/length^2",
             "deviation": "1/length^2", "relative": "1"}
    title = f"limit-spectrum deviations, {cfg.surface} + {cfg.attach}"
    reports.write_csv(out / "sweep.csv", title, h, cols, rows, units)
    reports.write_table(out / "sweep.dat", title, h, cols, rows, units)
    doc = {"kind": kind, "monotone": {str(k): v for k, v in res.monotone.items()},
           "failures": {f"{e},{hh}": msg for (e, hh), msg in res.failures.items()},
           "max_relative": {f"{e},{hh}": res.max_relative(e, hh) for (e, hh) in res.relative},
           "glue_convention": "matched polygon perimeter"}
    reports.write_json(out / "sweep.json", doc, h, units)
    for hh, ok in res.monotone.items():
        print(f"h={hh}: monotone={'yes' if ok else 'no'}")
    if res.failures and fail_on_error:
        return EXIT_SOLVER
    return EXIT_OK if all(res.monotone.values()) else EXIT_CHECK


def cmd_heightscan(cfg: RunConfig) -> int:
    if cfg.attach is None:
        raise UsageError("heightscan needs --attach")
    out, h = _out(cfg), config_hash(cfg)
    base = _base(cfg)
    h_range = cfg.h if len(cfg.h) == 2 else None
    try:
        res = surgery.height_scan(base, ATTACH[cfg.attach], cfg.eps[0], h_range, cfg.scan, _solver(cfg), cfg.surgery)
    except ValueError as err:
        raise UsageError(str(err)) from err
    rows = [(p.h, p.eigenvalues[1], p.eigenvalues[2], p.gap, p.branch_gap) for p in res.points]
    units = {"h": "length", "lambda_1": "1/length^2", "lambda_2": "1/length^2", "gap": "1", "branch_gap": "1"}
    reports.write_csv(out / "heightscan.csv", "height scan", h, tuple(units), rows, units)
    doc = {k: v for k, v in dataclasses.asdict(res).items() if k != "points"}
    reports.write_json(out / "heightscan.json", doc, h, units)
    print(f"h_eps={float(res.h_epsilon)!r} gap={res.gap:.3e} status={res.status}")
    return EXIT_OK if res.status == "CROSSED" else EXIT_CHECK


def cmd_maximize(cfg: RunConfig, resume: str | None = None) -> int:
    out, h = _out(cfg), config_hash(cfg)
    kind, params, _ = SURFACES[cfg.surface]
    mesh, metric = build_standard(kind, cfg.res, **params)
    mcfg = dataclasses.replace(cfg.maximize, seed=cfg.seed)
    phi0 = None
    if resume:
        phi0 = maximize.load_checkpoint(resume, mesh, metric).log_conformal_factor
    state = maximize.maximize_in_class(mesh, metric, mcfg, phi0)
    maximize.save_checkpoint(state, out / "maximizer.json", mcfg)
    keys, rows = maximize.trajectory_rows(state)
    reports.write_csv(out / "trajectory.csv", "conformal ascent trajectory", h, keys, rows,
                      {"value": "1", "step": "1", "stationarity": "1"})
    summary = {"value": state.value, "multiplicity": state.multiplicity, "status": state.status,
               "iterations": state.iterations, "stationarity": state.stationarity, "failed": state.failed,
               "message": state.message, "peak_ratio": state.peak_ratio if not state.failed else None}
    if not state.failed:
        hm = maximize.extract_harmonic_map(state)
        summary.update(sphericality_residual=hm.sphericality_residual, metric_residual=hm.metric_residual)
    reports.write_json(out / "maximize.json", summary, h, {"value": "1"})
    print(f"lambda_1 * area = {float(state.value)!r} status={state.status} multiplicity={state.multiplicity}")
    return EXIT_SOLVER if state.failed else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    out, h = _out(cfg), config_hash(cfg)
    try:
        manifest = acceptance.run_suite(cfg.suite, cfg.jobs, echo=print)
    except ValueError as err:
        raise UsageError(str(err)) from err
    reports.write_json(out / "manifest.json", {"suite": cfg.suite, "checks": manifest}, h)
    return EXIT_OK if all(v["passed"] for v in manifest.values()) else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        _write_config(cfg, _out(cfg), config_hash(cfg))
        if cfg.command == "mesh":
            return cmd_mesh(cfg)
        if cfg.command == "spectrum":
            return cmd_spectrum(cfg)
        if cfg.command == "sweep":
            return cmd_sweep(cfg, args.fail_on_error)
        if cfg.command == "heightscan":
            return cmd_heightscan(cfg)
        if cfg.command == "maximize":
            return cmd_maximize(cfg, args.resume)
        return cmd_verify(cfg)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"surfspec: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as err:
        print(f"surfspec: geometry error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (SpectralError, np.linalg.LinAlgError) as err:
        print(f"surfspec: solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
