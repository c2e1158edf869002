"""Command line entry point.

    inls simulate <config.json> [--output-dir DIR]
    inls exponents --d D --b B --alpha A [--mu M] [--lemma local|scattering|weighted|all] [--strict]
    inls report <run_dir> --kind {virial,pseudoconformal,decay,gdecay,scatter,strichartz}
    inls sweep <dir-of-configs> [--jobs N] [--output-root DIR]

simulate and sweep exit 0 on success, 1 on configuration errors and 2 when
a numerical guard stopped a run.  report exits 0 when the verdict passes,
3 when it fails and 1 when the run directory is unusable.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import InlsError, SchemaError
from .exponents import (LEMMAS, ProblemParams, alpha_thresholds, critical_sobolev, fmt_exponent,
                        lwp_regime, strauss_exponent)
from .runner import EXIT_CONFIG, REPORT_KINDS, run_report, simulate_path, sweep

EXIT_REPORT_FAIL = 3


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def cmd_simulate(args) -> int:
    res = simulate_path(args.config, args.output_dir)
    _dump({"run_dir": str(res.run_dir) if res.run_dir else None, "exit_code": res.exit_code,
           "outcome": res.manifest.get("outcome")})
    return res.exit_code


def cmd_exponents(args) -> int:
    try:
        params = ProblemParams(args.d, args.b, args.alpha, args.mu)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    lo, hi = alpha_thresholds(params)
    doc = {
        "params": {"d": params.d, "b": fmt_exponent(params.b), "alpha": fmt_exponent(params.alpha),
                   "mu": params.mu},
        "critical_sobolev": fmt_exponent(critical_sobolev(params)),
        "alpha_mass_critical": fmt_exponent(lo),
        "alpha_energy_critical": fmt_exponent(hi),
        "strauss_exponent": strauss_exponent(params.d, params.b),
        "regime": lwp_regime(params).to_dict(),
        "lemmas": {},
    }
    names = list(LEMMAS) if args.lemma == "all" else [args.lemma]
    any_infeasible = False
    for name in names:
        rep = LEMMAS[name](params)
        any_infeasible |= not rep.feasible
        doc["lemmas"][name] = rep.to_dict()
    _dump(doc)
    return EXIT_REPORT_FAIL if (args.strict and any_infeasible) else 0


def cmd_report(args) -> int:
    opts = {}
    if args.window:
        opts["window"] = tuple(args.window)
    if args.q:
        opts["q"] = args.q
    try:
        verdict = run_report(args.run_dir, args.kind, **opts)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InlsError as exc:
        _dump({"kind": args.kind, "passed": False, "error": type(exc).__name__, "message": str(exc)})
        return EXIT_REPORT_FAIL
    _dump(verdict)
    return 0 if verdict.get("passed") else EXIT_REPORT_FAIL


def cmd_sweep(args) -> int:
    results = sweep(args.config_dir, args.jobs, args.output_root)
    _dump(results)
    return max((r["exit_code"] for r in results), default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inls", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configuration")
    s.add_argument("config")
    s.add_argument("--output-dir", default=None)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("exponents", help="thresholds, regime and exponent constructions")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--b", required=True, help='rational, e.g. 1/2')
    e.add_argument("--alpha", required=True)
    e.add_argument("--mu", type=int, default=-1)
    e.add_argument("--lemma", choices=list(LEMMAS) + ["all"], default="all")
    e.add_argument("--strict", action="store_true", help="exit 3 if any construction is infeasible")
    e.set_defaults(func=cmd_exponents)

    r = sub.add_parser("report", help="judge a finished run")
    r.add_argument("run_dir")
    r.add_argument("--kind", choices=REPORT_KINDS, required=True)
    r.add_argument("--window", nargs=2, type=float, metavar=("T_A", "T_B"))
    r.add_argument("--q", action="append", help="restrict decay/strichartz to these q (repeatable)")
    r.set_defaults(func=cmd_report)

    w = sub.add_parser("sweep", help="run every *.json in a directory")
    w.add_argument("config_dir")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--output-root", default=None)
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
