"""Command-line front end: ``alphadiv {div,bound,verify,tightness}``.

Exit codes: 0 ok, 2 bad input, 3 outside a mathematical domain,
4 certification failure, 5 no feasible point.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from datetime import datetime, timezone

from . import __version__
from . import errors as E
from .bounds import ALPHA_TIGHT, alpha_lower_bound, renyi_lower_bound
from .divergences import alpha_divergence, renyi_divergence
from .measures import MeasurePair, MomentSpec, make_measure, make_pair
from .oracle import SearchConfig, counterexample_alpha_lt_minus1, min_search
from .relations import (
    check_diff_relation_bwd,
    check_diff_relation_fwd,
    check_integral_relation,
    check_integral_relation_bwd,
    small_t_order,
)
from .serialize import dumps, fmt, parse_number

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_CERT, EXIT_INFEASIBLE = 0, 2, 3, 4, 5
DOMINANCE_TOL = 1e-9

STANDARD_PAIR = {"p": {"points": [0.0, 1.0], "weights": [0.7, 0.3]},
                 "q": {"points": [0.0, 1.0], "weights": [0.5, 0.5]}}


class InputError(ValueError):
    pass


_INPUT_ERRORS = (E.LengthMismatch, E.WeightSumInvalid, E.NegativeWeight,
                 E.NonFinitePoint, E.TOutOfRange, E.StepTooLarge, E.SingularSystem,
                 InputError, json.JSONDecodeError, OSError, KeyError)
_DOMAIN_ERRORS = (E.InvalidOrder, E.EqualMeans, E.InfiniteDivergence,
                  E.DegeneratePath, E.DeltaInvalid, E.JTooSmall)
_CERT_ERRORS = (E.QuadratureNonConvergence, E.InternalConsistencyError)
_INFEASIBLE_ERRORS = (E.NoFeasiblePoint, E.ScanFailed)


# ---------------------------------------------------------------------------
# manifest and output
# ---------------------------------------------------------------------------

def _timestamp(explicit):
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch
            else datetime.now(timezone.utc))
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def run_manifest(command, parameters, seed=0, timestamp=None):
    return {"command": command, "parameters": parameters,
            "tool_version": __version__, "seed": int(seed),
            "timestamp": _timestamp(timestamp)}


def _emit_json(out, manifest, results):
    out.write(dumps({"manifest": manifest, "results": results}, indent=2))
    out.write("\n")


def _cell(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (int,)):
        return str(v)
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def _emit_csv(out, rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    out.write(buf.getvalue())


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _num_list(text):
    if text is None:
        return []
    try:
        return [parse_number(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse number list {text!r}") from None


def _load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _inline_measure(points, weights, which):
    if points is None and weights is None:
        return None
    if points is None or weights is None:
        raise InputError(f"--{which}-points and --{which}-weights go together")
    return make_measure(_num_list(points), _num_list(weights))


def _measure_pair(args, default=None) -> MeasurePair:
    p = _inline_measure(args.p_points, args.p_weights, "p")
    q = _inline_measure(args.q_points, args.q_weights, "q")
    if p is None and args.p:
        p = make_measure(**_points_weights(_load_json(args.p)))
    if q is None and args.q:
        q = make_measure(**_points_weights(_load_json(args.q)))
    if (p is None or q is None) and args.pair:
        obj = _load_json(args.pair)
        p = p or make_measure(**_points_weights(obj["p"]))
        q = q or make_measure(**_points_weights(obj["q"]))
    if p is None or q is None:
        if default is None:
            raise InputError("both P and Q are required (inline, --p/--q or --pair)")
        p = p or make_measure(**_points_weights(default["p"]))
        q = q or make_measure(**_points_weights(default["q"]))
    return make_pair(p, q)


def _points_weights(obj):
    if not isinstance(obj, dict) or "points" not in obj or "weights" not in obj:
        raise InputError("a measure needs 'points' and 'weights'")
    return {"points": [parse_number(x) for x in obj["points"]],
            "weights": [parse_number(x) for x in obj["weights"]]}


def _add_measure_args(sp):
    g = sp.add_argument_group("measures")
    g.add_argument("--p-points", help="comma-separated support of P")
    g.add_argument("--p-weights", help="comma-separated weights of P")
    g.add_argument("--q-points", help="comma-separated support of Q")
    g.add_argument("--q-weights", help="comma-separated weights of Q")
    g.add_argument("--p", metavar="FILE", help="JSON file {points, weights} for P")
    g.add_argument("--q", metavar="FILE", help="JSON file {points, weights} for Q")
    g.add_argument("--pair", metavar="FILE", help="JSON file {p: {...}, q: {...}}")


def _add_output_args(sp, default):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json")
    g.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    sp.set_defaults(fmt=default)
    sp.add_argument("--timestamp", help="manifest timestamp (default: SOURCE_DATE_EPOCH or now)")


def _add_spec_args(sp):
    for name in ("mean_p", "sigma_p", "mean_q", "sigma_q"):
        sp.add_argument(name, type=float)


def _spec(args):
    try:
        return MomentSpec(args.mean_p, args.sigma_p, args.mean_q, args.sigma_q)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _alphas(args):
    alphas = _num_list(args.alpha)
    if not alphas:
        raise InputError("the alpha list is empty")
    return alphas


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_div(args, out):
    pair = _measure_pair(args)
    alphas = _alphas(args)
    func = renyi_divergence if args.kind == "renyi" else alpha_divergence
    rows = [{"alpha": a, "kind": args.kind, "value": func(pair, a)} for a in alphas]
    if args.fmt == "json":
        params = {"kind": args.kind, "alpha": alphas, "pair": pair.to_dict()}
        _emit_json(out, run_manifest("div", params, timestamp=args.timestamp), rows)
    elif args.fmt == "csv":
        _emit_csv(out, rows, ["alpha", "kind", "value"])
    else:
        for r in rows:
            out.write(fmt(r["value"]) + "\n")
    return EXIT_OK


def cmd_bound(args, out):
    spec = _spec(args)
    alphas = _alphas(args)
    func = renyi_lower_bound if args.kind == "renyi" else alpha_lower_bound
    reports = []
    for a in alphas:
        rep = func(spec, a).to_dict()
        reports.append({"alpha": a, "kind": args.kind, **rep})
    if args.fmt == "csv":
        cols = ["alpha", "kind", "bound", "tight_guaranteed", "equal_means"]
        _emit_csv(out, reports, cols)
    else:
        params = {"kind": args.kind, "alpha": alphas, "spec": spec.to_dict()}
        _emit_json(out, run_manifest("bound", params, timestamp=args.timestamp), reports)
    return EXIT_OK


_RELATIONS = {
    "diff-fwd": check_diff_relation_fwd,
    "diff-bwd": check_diff_relation_bwd,
    "int-fwd": check_integral_relation,
    "int-bwd": check_integral_relation_bwd,
}


def cmd_verify(args, out):
    pair = _measure_pair(args, default=STANDARD_PAIR)
    alphas = _alphas(args)
    rows, failed = [], False
    if args.relation == "order":
        for a in alphas:
            fit = small_t_order(pair, a)
            row = fit.to_dict()
            row["ok"] = abs(fit.slope - fit.expected_slope) <= args.slope_tol
            failed |= not row["ok"]
            rows.append(row)
        cols = ["alpha", "slope", "expected_slope", "limit_value",
                "neyman_constant", "pearson_constant", "limit_ratio", "ok"]
    else:
        ts = _num_list(args.t)
        if not ts:
            raise InputError("the t list is empty")
        is_diff = args.relation.startswith("diff")
        tol = args.tol if args.tol is not None else (1e-6 if is_diff else 1e-8)
        check = _RELATIONS[args.relation]
        for a in alphas:
            for t in ts:
                if is_diff:
                    res = check(pair, a, t, h=args.h, richardson=args.richardson,
                                precision=args.precision)
                else:
                    res = check(pair, a, t)
                row = res.to_dict()
                row["ok"] = res.rel_residual <= tol
                failed |= not row["ok"]
                rows.append(row)
        cols = ["relation", "alpha", "t", "lhs", "rhs", "abs_residual",
                "rel_residual", "method_detail", "ok"]
    if args.fmt == "json":
        params = {"relation": args.relation, "alpha": alphas, "t": _num_list(args.t),
                  "pair": pair.to_dict()}
        _emit_json(out, run_manifest("verify", params, timestamp=args.timestamp), rows)
    else:
        _emit_csv(out, rows, cols)
    return EXIT_CERT if failed else EXIT_OK


def cmd_tightness(args, out):
    spec = _spec(args)
    alphas = _alphas(args)
    cfg = SearchConfig(support_radius=args.radius, grid_points_per_axis=args.grid,
                       support_size=args.support_size,
                       random_restarts=args.restarts, seed=args.seed,
                       refine_iters=args.refine_iters)
    try:
        cfg.validate(spec)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows, failed = [], False
    for a in alphas:
        res = min_search(spec, a, cfg)
        row = dict(res.csv_row(), method="min_search")
        if ALPHA_TIGHT[0] <= a <= ALPHA_TIGHT[1] and res.gap < -DOMINANCE_TOL:
            failed = True
        rows.append(row)
        if args.counterexample and a < -1.0:
            pair, rep = counterexample_alpha_lt_minus1(
                spec.mean_p, spec.sigma_p, spec.mean_q, a,
                delta=args.delta, u3=args.u3)
            rows.append({"alpha": a, "mean_p": spec.mean_p, "sigma_p": spec.sigma_p,
                         "mean_q": spec.mean_q, "sigma_q": rep.sigma_q,
                         "best_value": rep.divergence, "bound": rep.bound,
                         "gap": rep.divergence - rep.bound, "evaluations": 1,
                         "feasibility_ratio": 1.0, "method": "counterexample",
                         "pair": pair.to_dict(), "report": rep.to_dict()})
    if args.fmt == "json":
        params = {"spec": spec.to_dict(), "alpha": alphas, "config": cfg.to_dict(),
                  "counterexample": bool(args.counterexample)}
        _emit_json(out, run_manifest("tightness", params, seed=args.seed,
                                     timestamp=args.timestamp), rows)
    else:
        cols = ["alpha", "mean_p", "sigma_p", "mean_q", "sigma_q", "best_value",
                "bound", "gap", "evaluations", "feasibility_ratio", "method"]
        _emit_csv(out, rows, cols)
    return EXIT_CERT if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="alphadiv",
        description="Alpha/Renyi divergences, moment-constrained lower bounds and their verifiers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("div", help="divergence between two finite measures")
    _add_measure_args(sp)
    sp.add_argument("--alpha", required=True, help="order or comma-separated orders")
    sp.add_argument("--kind", choices=("alpha", "renyi"), default="alpha")
    _add_output_args(sp, "text")
    sp.set_defaults(func=cmd_div)

    sp = sub.add_parser("bound", help="tight lower bound under moment constraints")
    _add_spec_args(sp)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--kind", choices=("alpha", "renyi"), default="alpha")
    _add_output_args(sp, "json")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("verify", help="check the alpha / alpha+1 relations on a pair")
    sp.add_argument("relation", choices=("diff-fwd", "diff-bwd", "int-fwd", "int-bwd", "order"))
    _add_measure_args(sp)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--t", default="0.5", help="comma-separated path parameters in (0, 1]")
    sp.add_argument("--h", type=float, default=None, help="finite-difference step")
    sp.add_argument("--richardson", action="store_true")
    sp.add_argument("--precision", choices=("extended", "double"), default="extended")
    sp.add_argument("--tol", type=float, default=None,
                    help="relative tolerance (default 1e-6 diff, 1e-8 int)")
    sp.add_argument("--slope-tol", type=float, default=0.05)
    _add_output_args(sp, "csv")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("tightness", help="brute-force dominance sweep against the bound")
    _add_spec_args(sp)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--radius", type=float, default=6.0)
    sp.add_argument("--grid", type=int, default=25)
    sp.add_argument("--support-size", type=int, choices=(3, 4), default=3)
    sp.add_argument("--restarts", type=int, default=200)
    sp.add_argument("--refine-iters", type=int, default=80)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--counterexample", action="store_true",
                    help="for alpha < -1 also emit the explicit below-bound construction")
    sp.add_argument("--delta", type=float, default=0.4)
    sp.add_argument("--u3", type=float, default=1e3)
    _add_output_args(sp, "csv")
    sp.set_defaults(func=cmd_tightness)
    return parser


_LIST_OPTS = ("--alpha", "--t", "--p-points", "--q-points")
_NEG_LIST = re.compile(r"^-(\d|\.\d|inf)")


def _join_negative_lists(argv):
    # argparse reads "-1,0.5" as an option; attach it as "--alpha=-1,0.5"
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LIST_OPTS and i + 1 < len(argv) and _NEG_LIST.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_lists(argv))
    try:
        return args.func(args, out)
    except _INPUT_ERRORS as exc:
        code, exc_ = EXIT_INPUT, exc
    except _DOMAIN_ERRORS as exc:
        code, exc_ = EXIT_DOMAIN, exc
    except _CERT_ERRORS as exc:
        code, exc_ = EXIT_CERT, exc
    except _INFEASIBLE_ERRORS as exc:
        code, exc_ = EXIT_INFEASIBLE, exc
    except ValueError as exc:
        code, exc_ = EXIT_INPUT, exc
    print(f"alphadiv: {type(exc_).__name__}: {exc_}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
