"""Command-line interface: ``bwpinch <command> [options]``.

Exit codes: 0 when every assertion holds, 1 when a violation is found, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bochner as bw
from .curvature import CoshCylinder, curvature_of_model, ricci_decompose
from .dsl import DSLError, parse_model
from .exterior import set_max_dim
from .reports import EQUALITY, THEOREMS, VIOLATED, PinchReport, evaluate_theorem, \
    reports_to_csv, sweep_equality_family
from .selftest import run_all
from .yamabe import YamabeUnavailable, cosh_cylinder_C, modified_yamabe_probe, yamabe_of


class UsageError(Exception):
    pass


def _table_md(rows: list[dict]) -> str:
    if not rows:
        return "(empty)"
    keys = list(rows[0])
    out = ["| " + " | ".join(keys) + " |", "|" + "---|" * len(keys)]
    for r in rows:
        out.append("| " + " | ".join(_cell(r[k]) for k in keys) + " |")
    return "\n".join(out)


def _cell(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return "n/a" if v is None else str(v)


def _table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(rows: list[dict], fmt: str, title: str = "") -> str:
    if fmt == "json":
        return json.dumps(rows if len(rows) != 1 else rows[0], indent=2, sort_keys=True)
    if fmt == "csv":
        return _table_csv(rows)
    head = f"## {title}\n\n" if title else ""
    return head + _table_md(rows)


def _emit_reports(reports: list[PinchReport], fmt: str) -> str:
    if fmt == "json":
        if len(reports) == 1:
            return reports[0].to_json()
        return json.dumps([r.to_dict() for r in reports], sort_keys=True)
    if fmt == "csv":
        return reports_to_csv(reports)
    return "\n\n".join(r.to_markdown() for r in reports)


def _model(text):
    try:
        return parse_model(text)
    except DSLError as exc:
        raise UsageError(f"model parse error: {exc}") from None


# --------------------------------------------------------------------------


def cmd_constants(args) -> int:
    n, k = args.n, args.k
    try:
        pc = bw.pinch_constants(n, k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    row = {"n": n, "k": k, "a": str(pc.a), "a_float": float(pc.a), "b": str(pc.b),
           "b_float": float(pc.b), "a_mid": None if pc.a_mid is None else str(pc.a_mid),
           "a_mid_float": None if pc.a_mid is None else float(pc.a_mid),
           "theorem_constant": str(pc.theorem_constant),
           "theorem_constant_float": float(pc.theorem_constant),
           "excluded_k_eq_(n-1)/2": pc.excluded}
    # the Y-coefficient of a single-norm pinching, squared so it stays rational
    if k == 1:
        row["ricci_constant_squared"] = str(pc.theorem_constant ** 2 / pc.b)
    if pc.a_mid is not None:
        row["weyl_constant_squared"] = str(pc.theorem_constant ** 2 / pc.a_mid)
    print(_emit([row], args.format, f"constants n={n}, k={k}"))
    return 0


def cmd_spectrum(args) -> int:
    model = _model(args.model)
    if isinstance(model, CoshCylinder) and args.t is None:
        raise UsageError("cosh cylinder spectra need --t")
    rm = curvature_of_model(model, t=args.t) if isinstance(model, CoshCylinder) \
        else curvature_of_model(model)
    dec = ricci_decompose(rm)
    if not 1 <= args.k <= rm.n - 1:
        raise UsageError(f"--k must lie in [1, {rm.n - 1}]")
    op = bw.build_bw(dec, args.k)
    spec = bw.r_k_of(op)
    rows = [{"eigenvalue": v, "multiplicity": m} for v, m in spec.eigenvalues]
    if args.format == "json":
        print(json.dumps({"model": model.dsl(), "k": args.k, "r_k": spec.r_k,
                          "eigenvalues": rows,
                          "traceless": [{"eigenvalue": v, "multiplicity": m}
                                        for v, m in spec.traceless_eigenvalues]},
                         indent=2, sort_keys=True))
    else:
        title = f"R_{args.k} on {model.dsl()}; r_{args.k} = {spec.r_k:.12g}"
        print(_emit(rows, args.format, title))
    return 0


def cmd_verify(args) -> int:
    model = _model(args.model)
    try:
        rep = evaluate_theorem(args.theorem, model, args.k, args.tol, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(_emit_reports([rep], args.format))
    return 1 if rep.verdict == VIOLATED or rep.contradiction else 0


def cmd_sweep(args) -> int:
    try:
        reps = sweep_equality_family(args.n, args.k, args.tol, args.max_n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(_emit_reports(reps, args.format))
    bad = [r for r in reps if r.verdict != EQUALITY or r.contradiction]
    return 1 if bad else 0


def cmd_yamabe(args) -> int:
    model = _model(args.model)
    rows, status = [], 0
    if isinstance(model, CoshCylinder):
        c = cosh_cylinder_C(model.base, model.alpha)
        rows.append({"model": model.dsl(), "Y": c.yamabe.value, "provenance": c.yamabe.provenance,
                     "closed_form": c.yamabe.detail["closed_form"], "C": c.C,
                     "C_is_lower_bound": c.lower_bound})
    else:
        try:
            y = yamabe_of(model)
        except YamabeUnavailable as exc:
            print(f"yamabe: {exc}", file=sys.stderr)
            return 1
        rows.append({"model": model.dsl(), "Y": y.value, "provenance": y.provenance})
        if args.beta is not None:
            if not 0 <= args.beta <= 1:
                raise UsageError("--beta must lie in [0, 1]")
            pr = modified_yamabe_probe(model, args.beta, args.trials,
                                       np.random.default_rng(args.seed))
            rows[0].update({"beta": args.beta, "beta_Y": args.beta * y.value,
                            "probe_min": pr.sampled_min, "probe_constant": pr.constant_value,
                            "probe_provenance": pr.provenance, "probe_violations": pr.violations})
            status = 1 if pr.violations else 0
    print(_emit(rows, args.format, "Yamabe"))
    return status


def cmd_selftest(args) -> int:
    results = run_all(args.seed, args.trials)
    rows = [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
             "seconds": round(r.elapsed, 3)} for r in results]
    if args.format == "md":
        print("\n".join(r.line() for r in results))
    else:
        print(_emit(rows, args.format))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "md", "csv"), default="md")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--max-n", type=int, default=12)

    p = argparse.ArgumentParser(prog="bwpinch", description="Bochner-Weitzenböck pinching toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", parents=[common], help="pinching constants a_{n,k}, b_{n,k}")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("spectrum", parents=[common], help="spectrum of R_k on a model")
    s.add_argument("--model", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--t", type=float, default=None, help="cylinder parameter")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("verify", parents=[common], help="evaluate one pinching theorem")
    s.add_argument("--theorem", required=True, choices=THEOREMS)
    s.add_argument("--model", required=True)
    s.add_argument("--k", type=int, default=None)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="Einstein product equality family")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("yamabe", parents=[common], help="Yamabe invariant and beta probe")
    s.add_argument("--model", required=True)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(func=cmd_yamabe)

    s = sub.add_parser("selftest", parents=[common], help="run every acceptance check")
    s.add_argument("--trials", type=int, default=None)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_max_dim(args.max_n)
        return args.func(args)
    except UsageError as exc:
        print(f"bwpinch: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

