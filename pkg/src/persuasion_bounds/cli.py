"""Command-line front end.

Subcommands: ``bounds`` (identified intervals from cell probabilities),
``estimate`` (plug-in bounds with clustered inference from a CSV),
``coverage`` (Monte Carlo study) and ``advise`` (which method fits the
design). Exit codes: 0 success, 1 usage, 2 domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional, Sequence

from . import bounds, oracle, sim
from .errors import PersuasionBoundsError, SharesNotCovered
from .estimate import MicroSample, clustered_se
from .inference import one_sided_ci, shares_ci, spec_test_ci, stoye_ci
from .model import (
    AssumptionSet,
    Estimand,
    Interval,
    JointDistribution,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2

LABELS = {
    Estimand.APR: "APR",
    Estimand.R_APR: "R-APR",
    Estimand.PS: "PS",
    Estimand.PN: "PN",
    Estimand.PNS: "PNS",
    Estimand.ATE: "ATE",
    Estimand.SHARE_NP: "NP",
    Estimand.SHARE_AP: "AP",
    Estimand.SHARE_TP: "TP",
}
BOUNDS_DEFAULT = tuple(LABELS)
PANEL_A = (Estimand.ATE, Estimand.APR, Estimand.R_APR)
PANEL_B = (Estimand.SHARE_AP, Estimand.SHARE_NP)
JSON_FIELDS = ("estimand", "assumptions", "lower", "upper", "se_lower", "se_upper",
               "ci_lower", "ci_upper", "alpha", "n", "clusters", "empty")

ADVICE = (
    ("selection", "sample-selection bounds (external method)"),
    ("exogenous", "direct sample analogs: the bound formulas are point estimates"),
    ("iv", "IV persuasion methods (external)"),
    ("panel", "panel/DID persuasion methods (external)"),
    ("mts", "MTR+MTS bounds with one-sided confidence intervals (this package)"),
)
NO_ADVICE = "no covered method: consider collecting instruments or panel data"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- formatting -------------------------------------------------------------

def fmt_prob(x: float) -> str:
    """Four decimals with trailing zeros stripped: 0.5 -> '0.5', 0 -> '0'."""
    text = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def fmt_percent(x: float) -> str:
    """Probability rendered in percent, rounded half-even to two decimals."""
    if x is None or not math.isfinite(x):
        return "NA"
    value = (Decimal(repr(float(x))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
    return "0.00" if value.is_zero() else str(value)


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def render_json(rows: list) -> str:
    return json.dumps(rows, indent=2) + "\n"


# -- argument helpers -------------------------------------------------------

def _floats(text: str, k: int, what: str) -> list:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {k} comma-separated numbers, got {text!r}") from None
    if len(vals) != k:
        raise UsageError(f"{what}: expected {k} comma-separated numbers, got {text!r}")
    return vals


def _estimands(text: Optional[str], default) -> list:
    if not text:
        return list(default)
    try:
        return [Estimand.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _distribution(args) -> JointDistribution:
    conds = (args.p0, args.p1, args.q1)
    if args.cells is not None:
        if any(c is not None for c in conds):
            raise UsageError("give either --cells or --p0/--p1/--q1, not both")
        return JointDistribution(*_floats(args.cells, 4, "--cells"))
    if any(c is None for c in conds):
        raise UsageError("give --cells or all of --p0, --p1, --q1")
    return JointDistribution.from_conditionals(args.p0, args.p1, args.q1)


# -- bounds -----------------------------------------------------------------

def _bound_rows(dist, assumptions, estimands, use_oracle, grid):
    closed = {}
    for e in estimands:
        try:
            closed[e] = bounds.sharp_bounds(e, assumptions, dist)
        except SharesNotCovered:
            closed[e] = None
    check = {}
    if use_oracle or any(v is None for v in closed.values()):
        wanted = estimands if use_oracle else [e for e, v in closed.items() if v is None]
        ext = oracle.oracle_extrema(assumptions, dist, wanted, grid)
        check = {e: Interval(lo.value, hi.value) for e, (lo, hi) in ext.items()}
    return closed, check


def cmd_bounds(args) -> str:
    dist = _distribution(args)
    assumptions = AssumptionSet(args.mtr, args.mts)
    estimands = _estimands(args.estimands, BOUNDS_DEFAULT)
    closed, check = _bound_rows(dist, assumptions, estimands, args.oracle, args.grid)

    if args.format == "json":
        rows = []
        for e in estimands:
            iv = closed[e] if closed[e] is not None else check[e]
            row = {f: None for f in JSON_FIELDS}
            row.update(estimand=e.value, assumptions=assumptions.label,
                       lower=iv.lower, upper=iv.upper, empty=False)
            row["source"] = "closed_form" if closed[e] is not None else "oracle"
            if args.oracle:
                row["oracle_lower"], row["oracle_upper"] = check[e].lower, check[e].upper
            rows.append(row)
        return render_json(rows)

    lines = []
    for e in estimands:
        iv = closed[e]
        if iv is None:
            iv = check[e]
            lines.append(f"{LABELS[e]}: [{fmt_prob(iv.lower)}, {fmt_prob(iv.upper)}] (oracle)")
        else:
            lines.append(f"{LABELS[e]}: [{fmt_prob(iv.lower)}, {fmt_prob(iv.upper)}]")
    if args.oracle:
        gap = 0.0
        for e in estimands:
            o = check[e]
            lines.append(f"{LABELS[e]} oracle: [{fmt_prob(o.lower)}, {fmt_prob(o.upper)}]")
            if closed[e] is not None:
                gap = max(gap, abs(closed[e].lower - o.lower), abs(closed[e].upper - o.upper))
        lines.append(f"max discrepancy: {gap:.3e}")
    return "\n".join(lines) + "\n"


# -- estimate ---------------------------------------------------------------

def _parse_filter(items: Optional[Sequence[str]]) -> Optional[dict]:
    if not items:
        return None
    out = {}
    for item in items:
        col, sep, val = item.partition("=")
        if not sep or not col:
            raise UsageError(f"--filter expects col=value, got {item!r}")
        out[col] = val
    return out


def _estimate_rows(args):
    sample = MicroSample.from_csv(args.input, y=args.y, d=args.d,
                                  cluster=args.cluster, weight=args.weight)
    assumptions = AssumptionSet.parse(args.assume)
    ests = clustered_se(sample, _parse_filter(args.filter), assumptions)
    rows = []
    for e, est in ests.items():
        if e in PANEL_B:
            ci = shares_ci(est, args.alpha)
        elif e is Estimand.APR and assumptions.mtr and assumptions.mts:
            ci = spec_test_ci(est, args.alpha)
        elif est.lower_hat != 0.0:
            ci = stoye_ci(est, args.alpha, clamp=None)
        else:
            ci = one_sided_ci(est, args.alpha)
        rows.append({
            "estimand": e.value,
            "assumptions": assumptions.label,
            "lower": _json_number(est.lower_hat),
            "upper": _json_number(est.upper_hat),
            "se_lower": _json_number(est.se_lower),
            "se_upper": _json_number(est.se_upper),
            "ci_lower": _json_number(ci.lower),
            "ci_upper": _json_number(ci.upper),
            "alpha": args.alpha,
            "n": _json_number(est.n),
            "clusters": int(est.g),
            "empty": bool(ci.empty),
        })
    return rows


def render_estimate_text(rows: list) -> str:
    by = {Estimand(r["estimand"]): r for r in rows}
    r0 = rows[0]
    out = [f"assumptions: {r0['assumptions']}  n: {r0['n']:g}  clusters: {r0['clusters']}"
           f"  alpha: {r0['alpha']:g}", "",
           "Upper bounds (percent)",
           f"{'':<8}{'Est':>9}{'SE':>9}{'UCB':>9}"]
    for e in PANEL_A:
        if e in by:
            r = by[e]
            out.append(f"{LABELS[e]:<8}{fmt_percent(r['upper']):>9}"
                       f"{fmt_percent(r['se_upper']):>9}{fmt_percent(r['ci_upper']):>9}")
    shares = [e for e in PANEL_B if e in by]
    if shares:
        out += ["", "Type shares",
                f"{'':<8}{'CI-LB':>9}{'LB':>9}{'UB':>9}{'CI-UB':>9}"]
        for e in shares:
            r = by[e]
            out.append(f"{LABELS[e]:<8}" + "".join(
                f"{fmt_prob4(r[k]):>9}" for k in ("ci_lower", "lower", "upper", "ci_upper")))
    apr = by.get(Estimand.APR)
    if apr is not None and apr["assumptions"] == "mtr+mts" and apr["upper"] < 0:
        if apr["empty"]:
            out += ["", f"specification test: identified set empty at alpha={apr['alpha']:g}"]
        else:
            out += ["", f"specification test: not rejected at alpha={apr['alpha']:g}"
                        " (negative estimated upper bound)"]
    return "\n".join(out) + "\n"


def fmt_prob4(x) -> str:
    return "NA" if x is None else f"{x:.4f}"


def render_estimate_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=JSON_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r[k] is None else r[k]) for k in JSON_FIELDS})
    return buf.getvalue()


def cmd_estimate(args) -> str:
    if not 0.0 < args.alpha < 0.5:
        raise UsageError("--alpha must lie in (0, 0.5)")
    rows = _estimate_rows(args)
    if args.format == "json":
        return render_json(rows)
    if args.format == "csv":
        return render_estimate_csv(rows)
    return render_estimate_text(rows)


# -- coverage ---------------------------------------------------------------

def _spec_from_args(args) -> sim.DgpSpec:
    if args.spec_file:
        with open(args.spec_file, encoding="utf-8") as fh:
            return sim.DgpSpec(**json.load(fh))
    return sim.DgpSpec(
        shares=tuple(_floats(args.shares, 3, "--shares")),
        selection=tuple(_floats(args.selection, 3, "--selection")),
        defier_share=args.defier_share,
        defier_selection=args.defier_selection,
        per_cluster=args.per_cluster,
        rho=args.rho,
        outcome_rho=args.outcome_rho,
        break_mtr=args.break_mtr,
        break_mts=args.break_mts,
    )


def cmd_coverage(args) -> str:
    spec = _spec_from_args(args)
    targets = _estimands(args.targets, (Estimand.APR,))
    report = sim.run_coverage(spec, targets, n=args.n, R=args.reps, alpha=args.alpha,
                              seed=args.seed, n_jobs=args.jobs)
    text = report.to_json() + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# -- advise -----------------------------------------------------------------

def advise(selection=False, exogenous=False, iv=False, panel=False, mts=False) -> str:
    flags = dict(selection=selection, exogenous=exogenous, iv=iv, panel=panel, mts=mts)
    for key, text in ADVICE:
        if flags[key]:
            return text
    return NO_ADVICE


def cmd_advise(args) -> str:
    return advise(args.selection, args.exogenous, args.iv, args.panel, args.mts) + "\n"


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="persuasion-bounds", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="identified intervals from cell probabilities")
    b.add_argument("--cells", help="p00,p10,p01,p11 with p_yd = Pr(Y=y, D=d)")
    b.add_argument("--p0", type=float, help="Pr(Y=1 | D=0)")
    b.add_argument("--p1", type=float, help="Pr(Y=1 | D=1)")
    b.add_argument("--q1", type=float, help="Pr(D=1)")
    b.add_argument("--mtr", action="store_true")
    b.add_argument("--mts", action="store_true")
    b.add_argument("--estimands", help="comma list, e.g. apr,rapr,ps,pn,pns,ate,np,ap,tp")
    b.add_argument("--oracle", action="store_true", help="cross-check with the numerical oracle")
    b.add_argument("--grid", type=float, default=None, help="oracle grid step")
    b.add_argument("--format", choices=("text", "json"), default="text")
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("estimate", help="plug-in bounds with clustered inference from a CSV")
    e.add_argument("--input", required=True)
    e.add_argument("--y", default="y")
    e.add_argument("--d", default="d")
    e.add_argument("--cluster")
    e.add_argument("--weight")
    e.add_argument("--filter", action="append", metavar="COL=VAL")
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--assume", default="mtr+mts", choices=("mtr+mts", "mts", "mtr", "none"))
    e.add_argument("--format", choices=("text", "json", "csv"), default="text")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("coverage", help="Monte Carlo coverage study")
    c.add_argument("--spec-file", help="JSON object with DgpSpec fields")
    c.add_argument("--shares", default="0.2,0.7,0.1", help="NP,AP,TP type shares")
    c.add_argument("--selection", default="0.5,0.5,0.5", help="Pr(D=1 | type) for NP,AP,TP")
    c.add_argument("--defier-share", type=float, default=0.0)
    c.add_argument("--defier-selection", type=float, default=0.5)
    c.add_argument("--per-cluster", type=int, default=1)
    c.add_argument("--rho", type=float, default=0.0)
    c.add_argument("--outcome-rho", type=float, default=0.0)
    c.add_argument("--break-mtr", action="store_true")
    c.add_argument("--break-mts", action="store_true")
    c.add_argument("--targets", default="apr")
    c.add_argument("--n", type=int, default=5000)
    c.add_argument("--reps", type=int, default=1000)
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--output")
    c.set_defaults(func=cmd_coverage)

    a = sub.add_parser("advise", help="which estimation method suits the design")
    for flag, text in (("--selection", "sample selection is a concern"),
                       ("--exogenous", "treatment is exogenous"),
                       ("--iv", "an instrument is available"),
                       ("--panel", "panel data are available"),
                       ("--mts", "MTR and MTS are credible")):
        a.add_argument(flag, action="store_true", help=text)
    a.set_defaults(func=cmd_advise)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except UsageError as exc:
        print(f"persuasion-bounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"persuasion-bounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PersuasionBoundsError as exc:
        print(f"persuasion-bounds: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        # Malformed data values (non 0/1 codes, bad weights).
        print(f"persuasion-bounds: data error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
