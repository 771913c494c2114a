"""Command line entry point: batch verification runs and report tables.

Subcommands::

    bksverify verify <identity|all>   run identity checks, write reports
    bksverify table pairing-factors   numeric vs closed-form factor table
    bksverify calibrate               unit-volume normalization constants
    bksverify convergence             backend error vs resolution sweeps

Exit status is 0 only when every check passed; failures are listed on
stderr.  A config file (--config) supplies defaults; the remaining
flags override it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import fields

from . import pairing, quadrature
from .config import (
    FORMATS,
    GROUP_KINDS,
    IDENTITY_FAMILIES,
    ConfigError,
    RunConfig,
    default_config,
    load_config,
)
from .groups import calibrate_scale, group_spec, make_irrep
from .heat import a_s
from .suite import (
    emit_factor_table,
    emit_table,
    pairing_factor_rows,
    run_suite,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value config file")
    p.add_argument("--group", choices=GROUP_KINDS)
    p.add_argument("--hbar0", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--tolerance-scale", type=float, dest="tolerance_scale")
    p.add_argument("--out", metavar="DIR", help="report directory")
    p.add_argument("--format", choices=FORMATS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bksverify",
        description="Numerical verification of BKS pairing identities "
                    "on compact Lie groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run identity checks")
    p.add_argument("identity", choices=(*IDENTITY_FAMILIES, "all"))
    _add_common(p)

    p = sub.add_parser("table", help="emit a report table")
    p.add_argument("name", choices=("pairing-factors",))
    _add_common(p)

    p = sub.add_parser("calibrate", help="emit normalization constants")
    _add_common(p)

    p = sub.add_parser("convergence", help="emit backend convergence data")
    _add_common(p)
    return parser


def _make_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for name, attr in (
        ("group", "group"),
        ("hbar0", "hbar0"),
        ("seed", "seed"),
        ("tolerance_scale", "tolerance_scale"),
        ("out", "out_dir"),
        ("format", "format"),
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[attr] = value
    if not overrides:
        return cfg
    merged = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    merged.update(overrides)
    return default_config(**merged)


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _make_config(args)
    if args.identity != "all":
        merged = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
        merged["identities"] = (args.identity,)
        cfg = default_config(**merged)
    report = run_suite(cfg)
    paths = emit_table(report, cfg.format, cfg.out_dir)
    for key, rep in report.reports:
        print(f"{key:<58} {rep.abs_residual:10.3e}  tol {rep.tolerance:8.1e}  "
              f"{'PASS' if rep.passed else 'FAIL'}")
    s = report.summary
    print(f"{s['passed']}/{s['total']} passed, {s['failed']} failed "
          f"({s['errors']} errors) in {report.wall_clock:.1f}s")
    for path in paths:
        print(f"wrote {path}")
    if s["failed"]:
        for key, rep in report.reports:
            if not rep.passed:
                print(f"FAIL {key}", file=sys.stderr)
        return 1
    return 0


def _cmd_table(args: argparse.Namespace) -> int:
    cfg = _make_config(args)
    rows = pairing_factor_rows(cfg)
    path = emit_factor_table(rows, cfg.format, cfg.out_dir)
    bar = (1e-10 if cfg.group == "torus" else 1e-6) * cfg.tolerance_scale
    worst = max((row["residual"] for row in rows), default=0.0)
    for row in rows:
        print(f"{row['irrep']:<10} s={row['s']:<5g} s'={row['s_prime']:<5g} "
              f"numeric {row['numeric_factor']:.12e}  "
              f"closed {row['closed_factor']:.12e}  "
              f"residual {row['residual']:.2e}")
    print(f"wrote {path} ({len(rows)} rows, worst residual {worst:.2e})")
    return 0 if worst <= bar else 1


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _make_config(args)
    rows = []
    for kind in GROUP_KINDS:
        group = group_spec(kind, normalization=cfg.normalization)
        rows.append({
            "group": group.describe(),
            "dim": group.dim,
            "rank": group.rank,
            "scale": group.scale,
            "unit_volume_scale": calibrate_scale(kind),
            "rho_norm_sq": group.rho_norm_sq,
            "density_prefactor": (math.pi * cfg.hbar0) ** (group.dim / 2.0),
            "a_s_at_1": a_s(group, cfg.hbar0, 1.0),
        })
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"calibrate.{cfg.format}")
    with open(path, "w", encoding="utf-8") as fh:
        if cfg.format == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(rows[0]))
            for row in rows:
                writer.writerow(list(row.values()))
    for row in rows:
        print(f"{row['group']:<8} scale {row['scale']:.12g}  "
              f"|rho|^2 {row['rho_norm_sq']:.12g}  "
              f"a_s(1) {row['a_s_at_1']:.12g}")
    print(f"wrote {path}")
    return 0


def _convergence_rows(cfg: RunConfig) -> list:
    group = group_spec(cfg.group, n=cfg.torus_rank, normalization=cfg.normalization)
    if group.kind == "torus":
        label = (1,) + (0,) * (group.dim - 1)
    elif group.kind == "su2":
        label = (1,)
    else:
        label = (1, 0)
    irrep = make_irrep(group, label)
    t = 1.0
    closed_log = (
        math.log(irrep.dim)
        + (group.dim / 2.0) * math.log(math.pi * cfg.hbar0)
        + 0.5 * t * cfg.hbar0 * (irrep.casimir + group.rho_norm_sq)
    )
    rows = []

    def record(backend, resolution, quad):
        logv, est = pairing.char_gaussian_log(group, cfg.hbar0, t, irrep, quad)
        rows.append({
            "backend": backend,
            "resolution": resolution,
            "rel_error": abs(math.expm1(logv - closed_log)),
            "error_estimate": est,
        })

    if group.kind == "torus":
        for pts in (8, 12, 16, 24, 32):
            record("gauss-hermite", pts, pairing.char_gaussian_quadrature(
                group, cfg.hbar0, t, irrep, points=pts))
    else:
        for panels in (2, 4, 6, 8, 10):
            record("cartan-reduced", panels, pairing.char_gaussian_quadrature(
                group, cfg.hbar0, t, irrep,
                points_per_panel=cfg.points_per_panel, panels=panels))
        if group.kind == "su2":
            sigma = math.sqrt(cfg.hbar0 / t)
            for pts in (32, 44, 56, 64):
                record("gauss-hermite-full", pts,
                       quadrature.hermite_quadrature(group, pts, scale=sigma))
        for samples in (10_000, 100_000):
            quad = quadrature.algebra_montecarlo(group, samples, cfg.seed)
            record("monte-carlo", samples, quad)
    return rows


def _cmd_convergence(args: argparse.Namespace) -> int:
    cfg = _make_config(args)
    rows = _convergence_rows(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"convergence.{cfg.format}")
    with open(path, "w", encoding="utf-8") as fh:
        if cfg.format == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["backend", "resolution", "rel_error",
                             "error_estimate"])
            for row in rows:
                writer.writerow([row["backend"], row["resolution"],
                                 row["rel_error"], row["error_estimate"]])
    for row in rows:
        print(f"{row['backend']:<18} {row['resolution']:>8}  "
              f"rel_error {row['rel_error']:.3e}")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "table":
            return _cmd_table(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_convergence(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
