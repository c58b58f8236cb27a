"""Command-line front end tying the modules into reproducible runs.

Every command writes its artifacts plus a manifest (resolved
parameters, input hashes, seed, versions) into the output directory,
which is enough to reproduce the run bit-identically. Exit codes:
0 success, 2 validation, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys

import numpy as np
import scipy
import shapely

from . import __version__
from .errors import NumericalError, ValidationError
from .fileio import sha256_file, write_csv, write_json, write_jsonl
from .geometry import (
    AdmissibleClassSpec,
    ConvexDomain,
    area,
    eventually_contains,
    hausdorff_distance,
    load_domain,
    save_domain,
)
from .plate import (
    LoadSpec,
    assemble,
    discretize,
    report_json_dict,
    solve_plate,
    write_field_csv,
)
from .positivity import (
    PositivityConfig,
    estimate_gamma_f,
    report_json_dict as gamma_f_json_dict,
    scan_csv_rows,
)
from .search import (
    SearchConfig,
    diagnostics,
    optimize,
    symmetry_report,
    trace_records,
)
from .spectral import buckling_load, result_json_dict

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _add_common(p, domain_required=True):
    p.add_argument("--domain", required=domain_required,
                   help="domain file (JSON with R and vertices)")
    p.add_argument("--h", type=float, help="grid spacing")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, help="seed recorded in the manifest")
    p.add_argument("--config", help="JSON config file; explicit flags win")


def _add_load(p):
    p.add_argument("--f-const", type=float, dest="f_const",
                   help="constant load amplitude")
    p.add_argument("--f-bump", dest="f_bump",
                   help="gaussian bump load: x0,y0,width,amplitude")
    p.add_argument("--f-grid", dest="f_grid",
                   help="CSV file with i,j,value rows of node samples")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="platelab",
        description="clamped plate with tension on convex domains: solve, "
                    "buckling load, positivity threshold, shape search",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve (A + gamma B) u = f")
    _add_common(p)
    _add_load(p)
    p.add_argument("--gamma", type=float, help="tension coefficient")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("buckling", help="smallest buckling eigenvalue")
    _add_common(p)
    p.add_argument("--tol", type=float, help="eigen-residual tolerance")
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--write-field", action="store_true", dest="write_field",
                   help="also write the eigenvector field CSV")
    p.set_defaults(func=cmd_buckling)

    p = sub.add_parser("gamma-f", help="estimate the positivity threshold")
    _add_common(p)
    _add_load(p)
    p.add_argument("--gamma-max", type=float, dest="gamma_max")
    p.add_argument("--scan-points", type=int, dest="scan_points")
    p.add_argument("--tol-pos", type=float, dest="tol_pos")
    p.add_argument("--bisection-tol", type=float, dest="bisection_tol")
    p.add_argument("--raw-min", action="store_true", dest="raw_min",
                   help="use the raw minimum instead of the interior one")
    p.set_defaults(func=cmd_gamma_f)

    p = sub.add_parser("optimize", help="anneal gamma_f over the class")
    _add_common(p)
    _add_load(p)
    p.add_argument("--iterations", type=int)
    p.add_argument("--vertices", type=int)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--t0", type=float)
    p.add_argument("--area", type=float,
                   help="class area c1 (default: area of the start domain)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("diag", help="geometry diagnostics on domain files")
    _add_common(p, domain_required=False)
    p.add_argument("--other", help="second domain file for a Hausdorff distance")
    p.add_argument("--sequence", nargs="+",
                   help="domain files forming a convergent sequence")
    p.add_argument("--limit", help="limit domain file for containment")
    p.add_argument("--compact", help="compact test-set domain file")
    p.set_defaults(func=cmd_diag)
    return ap


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the optional JSON config; flags win."""
    if not args.config:
        return args
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.config}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{args.config}: expected a JSON object")
    known = vars(args)
    for key, value in raw.items():
        attr = key.replace("-", "_")
        if attr in ("command", "func", "config") or attr not in known:
            raise ValidationError(f"{args.config}: unknown key {key!r}")
        # only fill flags the user left unset (identity check: 0.0 is a
        # legitimate explicit value)
        if known[attr] is None or known[attr] is False:
            setattr(args, attr, value)
    return args


def _resolve_load(args) -> LoadSpec:
    given = [x for x in (args.f_const, args.f_bump, args.f_grid) if x not in (None,)]
    if len(given) > 1:
        raise ValidationError("give exactly one of --f-const, --f-bump, --f-grid")
    if args.f_const is not None:
        return LoadSpec.constant(args.f_const)
    if args.f_bump is not None:
        parts = str(args.f_bump).split(",")
        if len(parts) != 4:
            raise ValidationError("--f-bump wants x0,y0,width,amplitude")
        try:
            x0, y0, width, amp = (float(p) for p in parts)
        except ValueError as exc:
            raise ValidationError(f"--f-bump: {exc}") from exc
        return LoadSpec.gaussian_bump((x0, y0), width, amp)
    if args.f_grid is not None:
        samples = {}
        with open(args.f_grid, "r", encoding="utf-8") as fh:
            for ln, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("i,"):
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise ValidationError(f"{args.f_grid}:{ln}: want i,j,value")
                try:
                    samples[(int(parts[0]), int(parts[1]))] = float(parts[2])
                except ValueError as exc:
                    raise ValidationError(f"{args.f_grid}:{ln}: {exc}") from exc
        return LoadSpec.grid_samples(samples)
    raise ValidationError("a load is required: --f-const, --f-bump or --f-grid")


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValidationError(f"--{name.replace('_', '-')} is required")


def _load_descriptor(args) -> dict:
    desc = {"f_const": args.f_const, "f_bump": args.f_bump, "f_grid": args.f_grid}
    if args.f_grid:
        desc["f_grid_sha256"] = sha256_file(args.f_grid)
    return desc


def _manifest(args, out_dir, extra_params=None) -> None:
    params = {
        k: v for k, v in vars(args).items()
        if k not in ("func", "config") and not k.startswith("_")
    }
    if extra_params:
        params.update(extra_params)
    manifest = {
        "command": args.command,
        "parameters": params,
        "inputs": {},
        "seed": getattr(args, "seed", None),
        "versions": {
            "platelab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "shapely": shapely.__version__,
        },
    }
    if getattr(args, "domain", None):
        manifest["inputs"]["domain"] = {
            "path": args.domain,
            "sha256": sha256_file(args.domain),
        }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_solve(args) -> int:
    _require(args, "h", "gamma")
    domain = load_domain(args.domain)
    load = _resolve_load(args)
    out = _outdir(args)
    ops = assemble(discretize(domain, args.h))
    report = solve_plate(ops, args.gamma, load)
    write_json(os.path.join(out, "report.json"), report_json_dict(report))
    write_field_csv(os.path.join(out, "field.csv"), ops.grid, report.u)
    _manifest(args, out, {"load": _load_descriptor(args)})
    return EXIT_OK


def cmd_buckling(args) -> int:
    _require(args, "h")
    domain = load_domain(args.domain)
    out = _outdir(args)
    ops = assemble(discretize(domain, args.h))
    kwargs = {}
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.max_iterations is not None:
        kwargs["max_iterations"] = args.max_iterations
    result = buckling_load(ops, **kwargs)
    write_json(os.path.join(out, "buckling.json"), result_json_dict(result, ops))
    if args.write_field:
        write_field_csv(os.path.join(out, "eigenvector.csv"), ops.grid,
                        result.eigenvector)
    _manifest(args, out)
    return EXIT_OK


def cmd_gamma_f(args) -> int:
    _require(args, "h")
    domain = load_domain(args.domain)
    load = _resolve_load(args)
    out = _outdir(args)
    cfg = PositivityConfig(
        gamma_max=args.gamma_max,
        scan_points=args.scan_points if args.scan_points is not None else 33,
        tol_pos=args.tol_pos if args.tol_pos is not None else 1e-8,
        bisection_tol=args.bisection_tol,
        use_interior_min=not args.raw_min,
    )
    report = estimate_gamma_f(domain, load, args.h, cfg)
    write_json(os.path.join(out, "gamma_f.json"), gamma_f_json_dict(report))
    write_csv(os.path.join(out, "scan.csv"),
              ("gamma", "min_u", "min_u_interior", "positive"),
              scan_csv_rows(report.scan))
    _manifest(args, out, {"load": _load_descriptor(args)})
    return EXIT_OK


def cmd_optimize(args) -> int:
    _require(args, "h")
    start = load_domain(args.domain)
    load = _resolve_load(args)
    out = _outdir(args)
    target = args.area if args.area is not None else area(start)
    cfg = SearchConfig(
        class_spec=AdmissibleClassSpec(ball_radius=start.ball_radius,
                                       target_area=target),
        h=args.h,
        vertex_count=args.vertices if args.vertices is not None else 16,
        iterations=args.iterations if args.iterations is not None else 200,
        sigma0=args.sigma0,
        t0=args.t0,
        seed=args.seed if args.seed is not None else 0,
        start=start,
    )
    trace = optimize(cfg, load)
    write_jsonl(os.path.join(out, "trace.jsonl"), trace_records(trace))
    save_domain(trace.incumbent.domain, os.path.join(out, "incumbent.json"))
    if len(trace.accepted()) >= 2:
        diag = diagnostics(trace)
        write_json(os.path.join(out, "diagnostics.json"), {
            "steps": [vars(s) for s in diag.steps],
            "addendum_lhs": diag.addendum_lhs,
            "addendum_rhs": diag.addendum_rhs,
            "addendum_holds": diag.addendum_holds,
            "tail_max_step": diag.tail_max_step,
            "containment_tail_size": diag.containment_tail_size,
            "containment_start": diag.containment_start,
        })
    sym = symmetry_report(trace, load)
    write_json(os.path.join(out, "symmetry.json"), vars(sym))
    _manifest(args, out, {"load": _load_descriptor(args),
                          "target_area": target})
    return EXIT_OK


def cmd_diag(args) -> int:
    out = _outdir(args)
    result: dict = {}
    if args.other is not None:
        if args.domain is None:
            raise ValidationError("--other needs --domain as well")
        a = load_domain(args.domain)
        b = load_domain(args.other)
        result["hausdorff_distance"] = hausdorff_distance(a, b)
    elif args.sequence is not None:
        if args.limit is None or args.compact is None:
            raise ValidationError("--sequence needs --limit and --compact")
        seq = [load_domain(p) for p in args.sequence]
        limit = load_domain(args.limit)
        compact = load_domain(args.compact)
        result["eventually_contains"] = eventually_contains(seq, limit, compact)
    else:
        raise ValidationError("diag wants either --other or --sequence")
    write_json(os.path.join(out, "diag.json"), result)
    print(json.dumps(result, sort_keys=True))
    _manifest(args, out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports flag errors with code 2
        return int(exc.code) if exc.code else 0
    try:
        args = _merge_config(args)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
