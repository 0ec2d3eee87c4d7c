"""Command-line interface: batch verification, classification, the exact
polynomial pipeline, and ODE branch runs with CSV export."""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, catalog, classify, constants, groebner, ode, weighted
from .errors import WefeError
from .sampling import resolve_seed, sample_box

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_EVAL = 3
EXIT_BAD_INPUT = 4


def _round_floats(obj):
    """12 significant digits everywhere so reports are byte-stable."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.floating):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _emit(report: dict, args) -> None:
    report = _round_floats(report)
    if args.format == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        lines = []

        def walk(prefix, val):
            if isinstance(val, dict):
                for k in sorted(val):
                    walk(f"{prefix}{k}.", val[k])
            elif isinstance(val, list):
                lines.append(f"{prefix[:-1]}: {val}")
            else:
                lines.append(f"{prefix[:-1]}: {val}")

        walk("", report)
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _probe_point(spec) -> np.ndarray:
    # deterministic generic interior point (box centers can be degenerate)
    return sample_box(spec.box, 1, resolve_seed())[0]


def _entry_specs(args):
    if args.manifest:
        entries = [catalog.load_manifest(args.manifest)]
    elif args.entry:
        entries = [catalog.get_entry(e) for e in args.entry]
    else:
        entries = catalog.list_entries()
    return sorted(entries, key=lambda e: e.entry_id)


def cmd_verify(args) -> int:
    atol = args.tol_atol if args.tol_atol is not None else constants.ATOL
    rtol = args.tol_rtol if args.tol_rtol is not None else constants.RTOL
    entries = _entry_specs(args)
    report = {"version": __version__, "command": "verify", "entries": {}}
    status = EXIT_OK
    for entry in entries:
        t0 = time.perf_counter()
        try:
            spec = catalog.build(entry)
            wrep = weighted.verify(spec, samples=args.samples, atol=atol, rtol=rtol)
            item = wrep.as_dict()
            try:
                crep = classify.classify(spec, _probe_point(spec))
                item["classification"] = crep.as_dict()
                for flag, got in (("ricci_type", crep.type_tag),
                                  ("causal_character", crep.causal_character)):
                    want = spec.flags.get(flag)
                    if want is not None and want != got:
                        item["mismatches"].append(
                            f"{flag}: expected {want}, computed {got}")
            except WefeError as exc:
                item["classification"] = {"error": str(exc)}
            if item["mismatches"]:
                status = max(status, EXIT_MISMATCH)
        except WefeError as exc:
            item = {"error": {"type": type(exc).__name__, "message": str(exc)}}
            status = max(status, EXIT_EVAL)
        item["seconds"] = time.perf_counter() - t0
        report["entries"][entry.entry_id] = item
    _emit(report, args)
    return status


def cmd_classify(args) -> int:
    try:
        spec = catalog.build(args.entry[0])
    except WefeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_INPUT
    if args.point:
        p = np.array([float(x) for x in args.point.split(",")])
        if p.shape != (spec.n,):
            sys.stderr.write(f"error: point needs {spec.n} coordinates\n")
            return EXIT_BAD_INPUT
    else:
        p = _probe_point(spec)
    try:
        crep = classify.classify(spec, p)
    except WefeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    report = {"version": __version__, "command": "classify",
              "entry": spec.name, "report": crep.as_dict()}
    _emit(report, args)
    expected = spec.flags.get("ricci_type")
    if expected is not None and expected != crep.type_tag:
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_groebner(args) -> int:
    t0 = time.perf_counter()
    try:
        table = groebner.generator_table()
        matches = {name: not diff for name, _, _, diff in table}
        gens = [groebner.P1_EXPECTED, groebner.P2_EXPECTED] + \
            [comp for _, comp, _, _ in table]
        basis = groebner.buchberger(gens)
        nf = groebner.normal_form(groebner.G_TARGET, basis)
        cert = groebner.alpha_equals_a_branch()
    except WefeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    report = {
        "version": __version__,
        "command": "groebner",
        "generator_match": matches,
        "basis_size": len(basis),
        "normal_form_of_target": str(nf),
        "target_in_ideal": not nf,
        "branch_certificate_zero": all(
            not cert[k] for k in ("combination_residual", "jh_residual",
                                  "derivative_residual")),
        "seconds": time.perf_counter() - t0,
    }
    _emit(report, args)
    ok = all(matches.values()) and not nf and report["branch_certificate_zero"]
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_ode(args) -> int:
    params = {}
    for kv in args.param or []:
        k, _, v = kv.partition("=")
        if not _:
            sys.stderr.write(f"error: bad --param {kv!r}, expected key=value\n")
            return EXIT_BAD_INPUT
        params[k] = int(v) if k == "n" else float(v)
    try:
        t0, t1 = (float(x) for x in args.span.split(":"))
    except ValueError:
        sys.stderr.write(f"error: bad --span {args.span!r}, expected t0:t1\n")
        return EXIT_BAD_INPUT
    try:
        state = ode.closed_form(args.branch, params, t0)
        traj = ode.integrate(state, t1)
    except WefeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EVAL
    drift_gamma, drift_kappa = traj.max_drift()
    dev = max(
        max(abs(st.h - ode.closed_form(args.branch, params, st.t).h),
            abs(st.phi - ode.closed_form(args.branch, params, st.t).phi))
        for st in traj.states)
    report = {
        "version": __version__,
        "command": "ode",
        "branch": args.branch,
        "params": params,
        "span": [t0, t1],
        "steps": len(traj.states) - 1,
        "terminated_early": traj.terminated_early,
        "closed_form_deviation": dev,
        "gamma_drift": drift_gamma,
        "kappa_drift": drift_kappa,
    }
    if args.csv:
        traj.to_csv(args.csv)
        report["csv"] = args.csv
    _emit(report, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wefe",
        description="verification toolkit for weighted vacuum field equations")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="write report to this path")
        p.add_argument("--format", choices=("json", "text"), default="json")

    pv = sub.add_parser("verify", help="check catalog entries against flags")
    pv.add_argument("--entry", action="append", help="catalog entry id")
    pv.add_argument("--manifest", default=None, help="external manifest path")
    pv.add_argument("--samples", type=int, default=constants.DEFAULT_SAMPLES)
    pv.add_argument("--tol-atol", type=float, default=None)
    pv.add_argument("--tol-rtol", type=float, default=None)
    common(pv)
    pv.set_defaults(fn=cmd_verify)

    pc = sub.add_parser("classify", help="Ricci operator type at a point")
    pc.add_argument("--entry", action="append", required=True)
    pc.add_argument("--point", default=None, help="comma-separated coordinates")
    common(pc)
    pc.set_defaults(fn=cmd_classify)

    pg = sub.add_parser("groebner", help="exact ideal-membership pipeline")
    common(pg)
    pg.set_defaults(fn=cmd_groebner)

    po = sub.add_parser("ode", help="integrate a closed-form branch")
    po.add_argument("--branch", choices=sorted(ode.BRANCHES), required=True)
    po.add_argument("--param", action="append",
                    help="key=value, repeatable (eps, tau, kappa, c1, c2, A)")
    po.add_argument("--span", default="0:1", help="t0:t1")
    po.add_argument("--csv", default=None, help="trajectory CSV path")
    common(po)
    po.set_defaults(fn=cmd_ode)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; remap to the bad-input code
        if exc.code not in (0, None):
            return EXIT_BAD_INPUT
        return 0
    try:
        return args.fn(args)
    except WefeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
