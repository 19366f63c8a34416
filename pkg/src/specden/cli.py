"""Command line front door.

Subcommands:
  rho             closed-form and polar-form density on a field spec
  oracle-compare  battery of random fields, closed form vs integral oracle
  torus           lattice eigenvalue sweep writing CSV and JSON
  identities      residual table of the exact-calculus identity suite
  selfcheck       identity suite plus a one-field cross-route check

Exit codes: 0 success, 2 config error, 3 numerical-invariant failure,
4 eigensolver convergence failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .errors import (ConfigError, ConvergenceError, ResolutionError,
                     SpecdenError)
from .fields import chart_from_json, random_field
from .frame import build_frame, q_coefficients
from .geometry import covariant_jet, endos_at
from .oracle import rho_oracle
from .rho import rho_closed, rho_polar
from .selfcheck import format_table, run_checks
from .torus import TorusConfig, density_compare, flux_field, reports_to_csv


def _config_digest(path):
    if path is None:
        return None
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _report_header(args):
    return {
        "tool": f"specden {__version__}",
        "config_sha256": _config_digest(args.config),
        "seed": args.seed,
        "tolerance": args.tol,
    }


def _emit(report, args, name):
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text + "\n")
    if not args.quiet:
        print(text)


def _jet_from_config(args):
    if args.config is None:
        raise ConfigError("this command needs --config pointing at a field spec")
    chart = chart_from_json(args.config)
    frame = build_frame(endos_at(chart, chart.x0))
    return covariant_jet(chart, frame)


def cmd_rho(args):
    jet = _jet_from_config(args)
    closed = rho_closed(jet)
    polar = rho_polar(jet)
    diff = abs(closed.rho - polar.rho)
    report = _report_header(args)
    report.update({
        "a": list(jet.a),
        "closed": closed.to_dict(),
        "polar": polar.to_dict(),
        "closed_polar_diff": diff,
    })
    _emit(report, args, "rho.json")
    if diff > args.tol * (1.0 + abs(closed.rho)):
        return 3
    return 0


def cmd_oracle_compare(args):
    battery = {1: 20, 2: 10, 3: 10}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        battery = {int(k): int(v) for k, v in doc.get("battery", battery).items()}
    rng = np.random.default_rng(args.seed)
    rows = []
    skipped = 0
    worst = 0.0
    for n in sorted(battery):
        for trial in range(battery[n]):
            field = random_field(n, rng)
            try:
                jet = covariant_jet(field, build_frame(endos_at(field, field.x0)))
                q = q_coefficients(jet)
                closed = rho_closed(jet)
                oracle = rho_oracle(jet, q)
            except SpecdenError as exc:
                skipped += 1
                rows.append({"n": n, "trial": trial, "skipped": str(exc)})
                continue
            rel = abs(closed.rho - oracle.rho) / (1.0 + abs(oracle.rho))
            worst = max(worst, rel)
            rows.append({
                "n": n, "trial": trial,
                "closed": closed.to_dict(),
                "oracle": {"A0": oracle.A0, "A1": oracle.A1, "A2": oracle.A2,
                           "A3": oracle.A3, "rho": oracle.rho},
                "rel_discrepancy": rel,
            })
    report = _report_header(args)
    report.update({"fields": rows, "skipped": skipped,
                   "max_rel_discrepancy": worst})
    _emit(report, args, "oracle_compare.json")
    return 0 if worst <= args.tol else 3


def cmd_torus(args):
    if args.config is None:
        raise ConfigError("torus needs --config with lattice parameters")
    with open(args.config) as fh:
        doc = json.load(fh)
    try:
        b = flux_field(tuple(doc["L"]), doc["n_flux"],
                       [tuple(m) for m in doc.get("modes", [])])
        config = TorusConfig(
            N=int(doc["N"]), L=tuple(doc["L"]), b=b,
            n_flux=int(doc["n_flux"]), p_list=tuple(doc["p_list"]),
            k_extra=int(doc.get("k_extra", 12)),
            solver_tol=float(doc.get("solver_tol", 1e-8)),
            quad_stride=int(doc.get("quad_stride", 4)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad torus config: {exc}") from exc
    schedule = doc.get("n_schedule")
    reports = density_compare(config, seed=args.seed,
                              n_schedule=schedule and {int(k): int(v)
                                                       for k, v in schedule.items()})
    report = _report_header(args)
    report["runs"] = [r.to_dict() for r in reports]
    _emit(report, args, "torus.json")
    if args.out:
        with open(os.path.join(args.out, "torus.csv"), "w") as fh:
            fh.write(reports_to_csv(reports))
    elif not args.quiet:
        print(reports_to_csv(reports))
    return 0


def cmd_identities(args):
    results = run_checks(seed=args.seed)
    table = format_table(results, args.tol)
    ok = all(r.passed(args.tol) for r in results)
    report = _report_header(args)
    report["checks"] = [{"name": r.name, "residual": r.residual,
                         "pass": r.passed(args.tol)} for r in results]
    report["all_pass"] = ok
    _emit(report, args, "identities.json")
    if not args.quiet:
        print(table, file=sys.stderr)
    return 0 if ok else 3


def cmd_selfcheck(args):
    rc = cmd_identities(args)
    rng = np.random.default_rng(args.seed)
    field = random_field(2, rng)
    jet = covariant_jet(field, build_frame(endos_at(field, field.x0)))
    q = q_coefficients(jet)
    closed = rho_closed(jet)
    polar = rho_polar(jet)
    oracle = rho_oracle(jet, q)
    spread = max(abs(closed.rho - oracle.rho), abs(polar.rho - oracle.rho))
    if not args.quiet:
        status = "pass" if spread <= args.tol * (1.0 + abs(oracle.rho)) else "FAIL"
        print(f"cross-route spread             {spread:10.3e}  {status}",
              file=sys.stderr)
    if spread > args.tol * (1.0 + abs(oracle.rho)):
        return 3
    return rc


_COMMANDS = {
    "rho": cmd_rho,
    "oracle-compare": cmd_oracle_compare,
    "torus": cmd_torus,
    "identities": cmd_identities,
    "selfcheck": cmd_selfcheck,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="specden",
        description="spectral density of the renormalized magnetic Laplacian")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ResolutionError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 4
    except SpecdenError as exc:
        print(f"numerical invariant failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
