"""Command-line driver.

Subcommands: run, convergence, scaling, perturb, invariants.
Exit codes: 0 ok, 1 usage/I-O error, 2 discrete blow-up, 3 an invariant or
study acceptance check failed. BWM_THREADS caps worker parallelism.
"""

import argparse
import sys
from dataclasses import replace

from .config import parse_config
from .errors import BiwaveError, ConfigError, DiscreteBlowup
from .runner import invariants_suite, run, study_convergence, study_perturbation, study_scaling

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_VIOLATION = 3


def _load_config(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def cmd_run(args):
    cfg = _load_config(args)
    result = run(cfg, out_dir=args.out, quiet=args.quiet)
    if result.csv_path:
        _say(args, f"wrote {result.csv_path}")
    if result.exit_code == EXIT_BLOWUP:
        _say(args, f"discrete blow-up at t={result.error.time:.6g} ({result.error.cause})")
        return EXIT_BLOWUP
    rec = result.records[-1]
    _say(
        args,
        f"completed t={rec.time:g}: energy={rec.energy:.12g} drift={rec.energy_rel_drift:.3e} "
        f"cal_E={rec.cal_E:.6g}",
    )
    return EXIT_OK


def cmd_convergence(args):
    cfg = _load_config(args)
    report = study_convergence(cfg)
    _say(args, report.format_table())
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "convergence.txt"), "w", encoding="utf-8") as fh:
            fh.write(report.format_table() + "\n")
    if not report.temporal:
        return EXIT_OK
    wanted = 1.9 if cfg.scheme.scheme == "strang" else 3.5
    at_floor = all(err <= 1e-10 for _, err in report.temporal)
    ok = at_floor or report.fitted_order >= wanted
    # spatial refinement must bottom out at the temporal floor, not grow with M
    data_band = max(abs(cfg.initial.params["k"]), 1)
    floor = max(1e-10, 2.0 * min(err for _, err in report.temporal))
    ok &= all(err <= floor for M, err in report.spatial if M > 2 * data_band)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_scaling(args):
    cfg = _load_config(args)
    report = study_scaling(cfg, args.lam)
    ec = report.energy_check
    _say(args, f"E_original={ec.E_original:.12g} E_scaled={ec.E_scaled:.12g}")
    _say(
        args,
        f"measured ratio={ec.measured_ratio:.12g} fixed-box prediction={ec.predicted_ratio_fixed_box:g} "
        f"whole-space prediction={ec.predicted_ratio_rn:g}",
    )
    _say(args, f"trajectory correspondence: max sup error {report.max_error:.3e}")
    ok = report.max_error <= args.tol
    ok &= abs(ec.measured_ratio - ec.predicted_ratio_fixed_box) <= 1e-10 * ec.predicted_ratio_fixed_box
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_perturb(args):
    cfg = _load_config(args)
    deltas = [float(d) for d in args.deltas.split(",")]
    report = study_perturbation(cfg, deltas)
    for row in report.rows:
        if row.error:
            _say(args, f"delta={row.delta:g}: {row.error}")
        else:
            _say(args, f"delta={row.delta:g}: Ew0={row.ew0:.6e} growth={row.growth:.6g}")
    spread = report.growth_spread
    _say(args, f"growth spread: {spread:.6g}")
    clean = [r for r in report.rows if r.error is None and r.delta > 0]
    ok = bool(clean) and spread <= 2.0
    slopes = [r.ew0 / r.delta for r in clean]
    if slopes:
        ok &= (max(slopes) - min(slopes)) <= 0.01 * max(slopes)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_invariants(args):
    checks = invariants_suite()
    width = max(len(name) for name, _, _ in checks)
    failed = 0
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        failed += not passed
        _say(args, f"{name:<{width}}  {status}  {detail}")
    _say(args, f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


def build_parser():
    ap = argparse.ArgumentParser(prog="biwave", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to key = value config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--quiet", action="store_true")

    common(sub.add_parser("run", help="execute one simulation"))
    common(sub.add_parser("convergence", help="temporal/spatial order study"))
    p = sub.add_parser("scaling", help="parabolic rescaling correspondence study")
    common(p)
    p.add_argument("--lam", type=int, default=2, help="integer scaling factor")
    p.add_argument("--tol", type=float, default=1e-4, help="trajectory correspondence tolerance")
    p = sub.add_parser("perturb", help="two-trajectory perturbation study")
    common(p)
    p.add_argument("--deltas", default="1e-2,1e-3,1e-4", help="comma-separated perturbation sizes")
    common(sub.add_parser("invariants", help="run geometry/grid property checks"), needs_config=False)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {
        "run": cmd_run,
        "convergence": cmd_convergence,
        "scaling": cmd_scaling,
        "perturb": cmd_perturb,
        "invariants": cmd_invariants,
    }[args.command]
    try:
        return handler(args)
    except DiscreteBlowup as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BiwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
