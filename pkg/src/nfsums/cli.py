"""Command-line entry point: suite orchestration and report emission."""

from __future__ import annotations

import argparse
import sys
import time

from . import audits
from .fieldfile import BUNDLED, load_field
from .nf import FieldError
from .report import emit_report, has_failure, sort_records

SUITE_ORDER = [
    "units", "gauss", "kloosterman", "correlate", "boxcorr",
    "whittaker", "arch", "keyid", "omega", "optimize",
]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="q",
                        help=f"bundled field name or a field file path (default q; "
                             f"bundled: {', '.join(BUNDLED)})")
    common.add_argument("--out", default="reports", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for all sampling")
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the suite's default tolerance")
    common.add_argument("--no-plots", dest="plots", action="store_false",
                        help="skip figure rendering next to the CSV/JSON output")
    p = argparse.ArgumentParser(
        prog="nfsums",
        description="Desk-scale audits of exponential sums, local identities "
                    "and the exponent program over small number fields.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("units", parents=[common],
                   help="unit lattice: product formula, box counts, balancing")
    g = sub.add_parser("gauss", parents=[common],
                       help="exhaustive Gauss sum magnitude law")
    g.add_argument("--cap", type=int, default=3000, help="max ring size q^l")
    k = sub.add_parser("kloosterman", parents=[common],
                       help="square-root cancellation sweep")
    k.add_argument("--pmax", type=int, default=13)
    k.add_argument("--lmax", type=int, default=3)
    k.add_argument("--cap", type=int, default=3000)
    c = sub.add_parser("correlate", parents=[common],
                       help="correlation sums: stationary phase vs brute force")
    c.add_argument("--pmax", type=int, default=7)
    c.add_argument("--lmax", type=int, default=3)
    b = sub.add_parser("boxcorr", parents=[common],
                       help="smooth-box correlation: direct vs Poisson")
    b.add_argument("--configs", type=int, default=4)
    b.add_argument("--scale", type=float, default=40.0)
    w = sub.add_parser("whittaker", parents=[common],
                       help="local zeta / Bessel / Hecke checks")
    w.add_argument("--alpha", default=None,
                   help="comma-separated Satake parameters (complex), else random draws")
    w.add_argument("--order", type=int, default=40)
    w.add_argument("--draws", type=int, default=50)
    w.add_argument("--rankin-x", type=float, default=None,
                   help="run the Rankin-Selberg slope fit up to this X")
    a = sub.add_parser("arch", parents=[common],
                       help="Mellin, Bessel decay, gamma bounds, AFE kernels")
    a.add_argument("--deep", action="store_true", help="include the large-y decay sweep")
    kid = sub.add_parser("keyid", parents=[common],
                         help="the Poisson key identity for black-box periods")
    kid.add_argument("--q", type=int, default=None,
                     help="rational prime under the conductor")
    kid.add_argument("--trials", type=int, default=25)
    sub.add_parser("omega", parents=[common],
                   help="Omega-vanishing separation criterion")
    o = sub.add_parser("optimize", parents=[common],
                       help="exponent min-max program")
    o.add_argument("--resolution", type=int, default=1800)
    v = sub.add_parser("verify-all", parents=[common],
                       help="run every suite at reduced desk settings")
    v.add_argument("--fast", action="store_true", help="smallest grids everywhere")
    return p


def run_command(args):
    records = []
    field = None
    if args.command not in ("optimize",):
        field = load_field(args.field)
    tol = args.tolerance

    if args.command == "units":
        records += audits.audit_units(field, seed=args.seed, out_dir=args.out,
                                      make_plots=args.plots)
    elif args.command == "gauss":
        records += audits.audit_gauss(field, cap=args.cap, tolerance=tol or 1e-10)
    elif args.command == "kloosterman":
        records += audits.audit_kloosterman(field, pmax=args.pmax, lmax=args.lmax,
                                            cap=args.cap, out_dir=args.out,
                                            make_plots=args.plots)
    elif args.command == "correlate":
        records += audits.audit_correlate(field, pmax=args.pmax, lmax=args.lmax,
                                          tolerance=tol or 1e-9, seed=args.seed)
    elif args.command == "boxcorr":
        records += audits.audit_boxcorr(field, n_configs=args.configs,
                                        tolerance=tol or 1e-8, seed=args.seed,
                                        out_dir=args.out, make_plots=args.plots,
                                        scale=args.scale)
    elif args.command == "whittaker":
        if args.alpha:
            from .whittaker import SatakeParams, local_zeta_check

            alphas = tuple(complex(x) for x in args.alpha.split(","))
            p = SatakeParams(alphas)
            resid = local_zeta_check(p, 1.0, args.order)
            from .report import ReportRecord

            records.append(ReportRecord.check("whittaker", "local_zeta_alpha",
                                              resid, tol or 1e-12))
        records += audits.audit_whittaker(field, n_draws=args.draws, order=args.order,
                                          seed=args.seed, rankin_x=args.rankin_x,
                                          tolerance=tol or 1e-12, out_dir=args.out,
                                          make_plots=args.plots)
    elif args.command == "arch":
        records += audits.audit_arch(seed=args.seed, deep=args.deep,
                                     out_dir=args.out, make_plots=args.plots)
    elif args.command == "keyid":
        records += audits.audit_keyid(args.field, trials=args.trials,
                                      tolerance=tol or 1e-8, seed=args.seed,
                                      q_override=args.q, out_dir=args.out,
                                      make_plots=args.plots)
    elif args.command == "omega":
        records += audits.audit_omega(args.field, seed=args.seed)
    elif args.command == "optimize":
        records += audits.audit_optimize(resolution=args.resolution)
    elif args.command == "verify-all":
        fast = args.fast
        records += audits.audit_units(field, seed=args.seed,
                                      n_boxes=20 if fast else 50,
                                      n_balanced=30 if fast else 100,
                                      out_dir=args.out, make_plots=args.plots)
        records += audits.audit_gauss(field, cap=500 if fast else 1000)
        records += audits.audit_kloosterman(field, pmax=5 if fast else 7, lmax=2,
                                            cap=400, out_dir=args.out,
                                            make_plots=args.plots)
        records += audits.audit_correlate(field, pmax=5, lmax=2, seed=args.seed)
        records += audits.audit_boxcorr(field, n_configs=2 if fast else 3,
                                        seed=args.seed, out_dir=args.out,
                                        make_plots=args.plots, scale=30.0)
        records += audits.audit_whittaker(field, n_draws=10 if fast else 25,
                                          seed=args.seed,
                                          rankin_x=None if fast else 2000.0,
                                          out_dir=args.out, make_plots=args.plots)
        records += audits.audit_arch(seed=args.seed, deep=False,
                                     out_dir=args.out, make_plots=args.plots)
        records += audits.audit_keyid(args.field, trials=5 if fast else 10,
                                      seed=args.seed, out_dir=args.out,
                                      make_plots=args.plots)
        records += audits.audit_omega(args.field, seed=args.seed,
                                      min_tuples=2000 if fast else 10**4)
        records += audits.audit_optimize(resolution=360 if fast else 1800)
    return records


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.time()
    try:
        records = run_command(args)
    except FieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = sort_records(records)
    csv_path, json_path = emit_report(records, args.out,
                                      basename=f"{args.command.replace('-', '_')}")
    n_fail = sum(1 for r in records if r.verdict == "fail")
    for r in records:
        mark = {"pass": "ok  ", "fail": "FAIL", "measured": "meas"}[r.verdict]
        print(f"[{mark}] {r.suite}/{r.case}: {r.value} {r.reference}")
    print(f"-- {len(records)} records, {n_fail} failures, "
          f"{time.time() - t0:.1f}s -> {csv_path}, {json_path}")
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
