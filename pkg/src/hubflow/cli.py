"""Command-line entry point: ``hubflow validate | solve | report``.

Exit codes: 0 success, 1 fatal diagnostics (or a fatal audit finding),
2 unreadable/corrupt input, 3 infeasible, 4 unbounded, 5 iteration limit,
6 numerical breakdown. Verbosity follows ``HUBFLOW_LOG`` (error, info, debug).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .builder import PAPER, PHYSICAL, build
from .lp import kernels
from .lp.mps import FORMATS, export_lp
from .lp.problem import INFEASIBLE, ITERATION_LIMIT, NUMERICAL_ERROR, OPTIMAL, UNBOUNDED, SolverOptions
from .lp.simplex import solve
from .model import FATAL
from .report import BundleError, audit, emit_report, extract_schedules, read_bundle, render_table
from .scenario_io import ScenarioError, load_scenario

log = logging.getLogger("hubflow")

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_UNBOUNDED = 4
EXIT_ITERATION_LIMIT = 5
EXIT_NUMERICAL = 6

STATUS_EXIT = {
    OPTIMAL: EXIT_OK,
    INFEASIBLE: EXIT_INFEASIBLE,
    UNBOUNDED: EXIT_UNBOUNDED,
    ITERATION_LIMIT: EXIT_ITERATION_LIMIT,
    NUMERICAL_ERROR: EXIT_NUMERICAL,
}

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = LOG_LEVELS.get(os.environ.get("HUBFLOW_LOG", "error").strip().lower(), logging.ERROR)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("hubflow").setLevel(level)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fail(code: int, reason: str) -> int:
    print(f"hubflow: {reason}", file=sys.stderr)
    return code


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        return _fail(EXIT_INPUT, f"{exc.code}: {exc}")
    for d in scenario.diagnostics:
        print(d)
    fatal = sum(d.severity == FATAL for d in scenario.diagnostics)
    print(f"{len(scenario.diagnostics)} diagnostics, {fatal} fatal")
    return EXIT_FATAL if fatal else EXIT_OK


def _reason(sol, constraints) -> str:
    if sol.status == INFEASIBLE and sol.worst_row is not None:
        key = constraints.keys[sol.worst_row]
        return (f"infeasible row={key.name} tag={key.tag} hub={key.hub or '-'} carrier={key.carrier or '-'} "
                f"t={key.t} infeasibility={sol.infeasibility:.6g}")
    return f"{sol.status} iterations={sol.iterations} {sol.message}".strip()


def cmd_solve(args) -> int:
    t_start = time.perf_counter()
    out = Path(args.out_dir)
    manifest = {
        "tool": "hubflow",
        "version": __version__,
        "command": "solve",
        "scenario": {"path": str(args.scenario), "sha256": None},
        "options": {
            "loss_orientation": args.loss_orientation,
            "max_iterations": args.max_iterations,
            "tolerance": args.tolerance,
            "seed": args.seed,
            "kernels": kernels.active_name(args.kernels),
            "export_mps": None if args.export_mps is None else str(args.export_mps),
            "mps_format": args.mps_format,
        },
        "timing": {},
        "status": None,
        "objective": None,
        "reason": "",
        "exit_status": None,
        "outputs": {},
    }
    timing = manifest["timing"]

    def finish(code, reason=""):
        manifest["exit_status"] = code
        manifest["reason"] = reason
        timing["wall"] = time.perf_counter() - t_start
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
        except OSError as exc:
            log.error("cannot write manifest: %s", exc)
        if reason:
            print(f"hubflow: {reason}", file=sys.stderr if code else sys.stdout)
        return code

    try:
        manifest["scenario"]["sha256"] = _sha256(args.scenario)
        t0 = time.perf_counter()
        scenario = load_scenario(args.scenario)
        timing["load"] = time.perf_counter() - t0
    except OSError as exc:
        return finish(EXIT_INPUT, f"UNREADABLE: {args.scenario}: {exc.strerror}")
    except ScenarioError as exc:
        return finish(EXIT_INPUT, f"{exc.code}: {exc}")
    fatal = [d for d in scenario.diagnostics if d.severity == FATAL]
    for d in scenario.diagnostics:
        log.info("%s", d)
    if fatal:
        for d in fatal:
            print(d, file=sys.stderr)
        return finish(EXIT_FATAL, f"fatal diagnostics: {', '.join(sorted({d.code for d in fatal}))}")

    t0 = time.perf_counter()
    lp, variables, constraints = build(scenario, args.loss_orientation)
    timing["build"] = time.perf_counter() - t0
    log.info("built LP with %d rows, %d columns, %d nonzeros", lp.m, lp.n, lp.nnz)
    manifest["lp"] = {"rows": lp.m, "columns": lp.n, "nonzeros": lp.nnz}

    if args.export_mps is not None:
        path = Path(args.export_mps)
        path.parent.mkdir(parents=True, exist_ok=True)
        export_lp(lp, (variables, constraints), args.mps_format, path)
        manifest["outputs"]["mps"] = {"path": str(path), "format": args.mps_format, "sha256": _sha256(path)}

    opts = SolverOptions(max_iterations=args.max_iterations, kernels=args.kernels)
    if args.tolerance is not None:
        opts.feasibility_tol = args.tolerance
    t0 = time.perf_counter()
    sol = solve(lp, opts)
    timing["solve"] = time.perf_counter() - t0
    manifest["status"] = sol.status
    manifest["iterations"] = sol.iterations
    log.info("solver: %s in %d iterations (%.2fs)", sol.status, sol.iterations, timing["solve"])
    if sol.status != OPTIMAL:
        return finish(STATUS_EXIT[sol.status], _reason(sol, constraints))
    manifest["objective"] = sol.objective
    manifest["max_residual"] = sol.max_residual
    manifest["max_bound_violation"] = sol.max_bound_violation

    t0 = time.perf_counter()
    report = extract_schedules(sol, (variables, constraints), scenario, args.loss_orientation)
    findings = audit(report, scenario)
    files = emit_report(report, "csv", out)
    timing["report"] = time.perf_counter() - t0
    manifest["outputs"]["bundle"] = files
    print(render_table(report, findings), end="")
    if findings.fatal:
        return finish(EXIT_FATAL, "audit: hub closure violated")
    return finish(EXIT_OK, f"optimal objective={sol.objective!r}")


def cmd_report(args) -> int:
    try:
        report = read_bundle(args.solution_dir)
    except (BundleError, OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_INPUT, f"BUNDLE: {exc}")
    findings = audit(report)
    print(render_table(report, findings), end="")
    return EXIT_FATAL if findings.fatal else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hubflow", description="Linear scheduling of networked multi-carrier hubs.")
    p.add_argument("--version", action="version", version=f"hubflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario and print diagnostics")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="build, solve and write the result bundle")
    s.add_argument("scenario")
    s.add_argument("out_dir")
    s.add_argument("--export-mps", metavar="PATH", help="also write the LP to PATH")
    s.add_argument("--mps-format", choices=FORMATS, default="free-mps",
                   help="file format for --export-mps (default: free-mps, lossless)")
    s.add_argument("--loss-orientation", choices=(PHYSICAL, PAPER), default=PHYSICAL)
    s.add_argument("--max-iterations", type=int, default=None, metavar="N")
    s.add_argument("--tolerance", type=float, default=None, metavar="X", help="feasibility tolerance")
    s.add_argument("--seed", type=int, default=0, metavar="N", help="recorded in the manifest only")
    s.add_argument("--kernels", choices=("compiled", "python"), default=None)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("report", help="re-render totals and audit from a result bundle")
    r.add_argument("solution_dir")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
