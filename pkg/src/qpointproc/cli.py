"""Command-line front end.

Every subcommand writes a table (default), CSV or JSON report to stdout or to
``--out``.  Exit codes: 0 success, 1 mathematical-domain failure (for example
an inadmissible q/lambda pair) or a failed identity, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import checks, pointproc, qcomb, qdist
from .qcalc import QContext, QDomainError
from .qpoly import QPoly

DEFAULT_SEED = checks.DEFAULT_SEED
SUBCOMMANDS = ("stirling", "bell", "poisson", "operator-check", "simulate", "janossy", "identity-check")

DEFAULTS = {
    "q": "1",
    "lam": "1",
    "rmax": "4",
    "n": "10",
    "range": ["0,0.3"],
    "samples": "1000000",
    "seed": str(DEFAULT_SEED),
    "format": "table",
    "out": None,
    "density": "uniform",
    "support": "0,1",
    "bins": "10",
    "points": None,
}
COMMAND_DEFAULTS = {
    "stirling": {"q": "symbolic", "rmax": "6"},
    "bell": {"q": "symbolic", "rmax": "8"},
    "janossy": {"rmax": "3", "support": "0,2"},
}
# config keys as they appear in the file -> argparse destinations
CONFIG_KEYS = {
    "q": "q", "lambda": "lam", "rmax": "rmax", "n": "n", "range": "range",
    "samples": "samples", "seed": "seed", "format": "format", "out": "out",
    "density": "density", "support": "support", "bins": "bins", "points": "points",
}


class UsageError(Exception):
    pass


# -- argument handling -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help='deformation parameter: a number such as 0.5 or 1/2, or "symbolic"')
    common.add_argument("--lambda", dest="lam", help="q-Poisson mean lambda")
    common.add_argument("--rmax", help="maximum order r (h for janossy)")
    common.add_argument("--n", help="number of particles N (simulate)")
    common.add_argument("--range", action="append", metavar="A,B",
                        help="energy range; repeat for several (simulate)")
    common.add_argument("--samples", help="Monte Carlo sample count")
    common.add_argument("--seed", help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--format", choices=("csv", "json", "table"), help="output format (default table)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--config", help="flat 'key = value' file mirroring the flags")
    common.add_argument("--density", choices=("uniform", "tent"), help="one-particle density shape")
    common.add_argument("--support", metavar="LO,HI", help="density support")
    common.add_argument("--bins", help="bins for the f1/f2 estimates (simulate)")
    common.add_argument("--points", metavar="E1,E2,...", help="evaluation energies (janossy)")

    parser = argparse.ArgumentParser(
        prog="qpointproc",
        description="q-deformed product densities: q-Stirling/q-Bell tables, q-Poisson moments, "
        "Monte Carlo product-density estimates and q-Janossy reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "stirling": "triangle of q-Stirling coefficients C(r,s)",
        "bell": "q-Bell numbers, with the q-Dobinsky series for numeric q",
        "poisson": "q-Poisson moments: direct, Stirling expansion and Monte Carlo",
        "operator-check": "moments through (u D_q)^r on the generating series",
        "simulate": "classical Monte Carlo of N points (q = 1 only)",
        "janossy": "product densities rebuilt from q-Poisson Janossy weights",
        "identity-check": "run the full identity grid; exit 1 on any failure",
    }
    parser.subcommand_parsers = {
        name: sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
        for name in SUBCOMMANDS
    }
    return parser


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; ``range`` may hold ``a,b;c,d``."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        dest = CONFIG_KEYS[key]
        out[dest] = [v.strip() for v in value.split(";")] if dest == "range" else value
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags."""
    opts = dict(DEFAULTS)
    opts.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        opts.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    if opts["format"] not in ("csv", "json", "table"):
        raise UsageError(f"unknown format {opts['format']!r}")
    return opts


def _number(text: str, what: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{what}: not a number: {text!r}") from exc


def _int(text, what: str) -> int:
    try:
        value = int(str(text).strip())
    except ValueError as exc:
        raise UsageError(f"{what}: not an integer: {text!r}") from exc
    return value


def _pair(text: str, what: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{what}: expected A,B, got {text!r}")
    return _number(parts[0], what), _number(parts[1], what)


def _positive(value: int, what: str) -> int:
    if value < 1:
        raise UsageError(f"{what} must be positive")
    return value


def q_context(opts: dict, exact: bool = True) -> QContext:
    text = str(opts["q"]).strip()
    if text == "symbolic":
        return QContext.symbolic()
    q = _number(text, "--q")
    if q <= 0:
        raise QDomainError(f"q must be positive, got {text}")
    return QContext.exact(q) if exact else QContext.floating(float(q))


def numeric_q(opts: dict) -> QContext:
    ctx = q_context(opts, exact=False)
    if ctx.is_symbolic:
        raise UsageError("this subcommand needs a numeric --q")
    return ctx


# -- formatting ------------------------------------------------------------------------

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, QPoly):
        return value.to_string()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else repr(float(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, QPoly):
        return value.to_string()
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(rows: list[dict], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        doc = {k: _json_value(v) for k, v in (meta or {}).items()}
        doc["rows"] = [{k: _json_value(v) for k, v in row.items()} for row in rows]
        return json.dumps(doc, indent=2) + "\n"
    fields = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_cell(row[f]) for f in fields])
        return buf.getvalue()
    cells = [[_cell(row[f]) for f in fields] for row in rows]
    widths = [max([len(f)] + [len(c[i]) for c in cells]) for i, f in enumerate(fields)]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fields, widths)).rstrip(),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


# -- subcommands ------------------------------------------------------------------------

def cmd_stirling(opts):
    ctx = q_context(opts)
    r_max = _positive(_int(opts["rmax"], "--rmax"), "--rmax")
    table = qcomb.build_stirling_table(r_max, ctx)
    rows = [
        {"r": r, "s": s, "polynomial": p, "value": None if ctx.is_symbolic else v}
        for r, s, p, v in table.rows()
    ]
    return rows, {"command": "stirling", "q": opts["q"], "rmax": r_max}, 0


def cmd_bell(opts):
    ctx = q_context(opts)
    r_max = _positive(_int(opts["rmax"], "--rmax"), "--rmax")
    rows = []
    for r in range(1, r_max + 1):
        poly = qcomb.q_bell(r, QContext.symbolic())
        row = {"r": r, "polynomial": poly}
        if not ctx.is_symbolic:
            row["value"] = qcomb.q_bell(r, ctx)
            row["dobinsky"] = qcomb.q_bell_dobinsky(r, ctx)
        rows.append(row)
    return rows, {"command": "bell", "q": opts["q"], "rmax": r_max}, 0


def _model(opts) -> qdist.QPoissonModel:
    ctx = numeric_q(opts)
    lam = float(_number(str(opts["lam"]), "--lambda"))
    qdist.check_admissible(ctx.q, lam)
    return qdist.QPoissonModel(lam, ctx)


def cmd_poisson(opts):
    model = _model(opts)
    r_max = _positive(_int(opts["rmax"], "--rmax"), "--rmax")
    samples = _int(opts["samples"], "--samples")
    if samples < 10_000:
        raise UsageError("--samples must be at least 10000")
    seed = _int(opts["seed"], "--seed")
    reports = qdist.empirical_moment_report(model, r_max, samples, seed)
    doc = qdist.moment_report_dict(model, reports)
    rows = doc.pop("rows")
    return rows, doc, 0


def cmd_operator_check(opts):
    model = _model(opts)
    r_max = _positive(_int(opts["rmax"], "--rmax"), "--rmax")
    order = qdist.truncation_order(model, r_max)
    series = qdist.generating_series(model, order)
    rows = []
    for r in range(1, r_max + 1):
        direct = qdist.moment(model, r)
        stirling = qdist.moment_via_stirling(model, r)
        op = qdist.apply_u_dq_operator(series, r, model.ctx).evaluate_sum(1.0)
        defect = max(abs(direct - stirling), abs(direct - op), abs(stirling - op))
        rows.append({"r": r, "direct": direct, "via_stirling": stirling, "operator": op,
                     "max_defect": defect})
    meta = {"command": "operator-check", "q": model.q, "lambda": model.lam, "order": order}
    return rows, meta, 0


def _density(opts) -> pointproc.DensityModel:
    lo, hi = _pair(opts["support"], "--support")
    if opts["density"] == "tent":
        return pointproc.DensityModel.tent(lo, hi)
    if opts["density"] == "uniform":
        return pointproc.DensityModel.uniform(lo, hi)
    raise UsageError(f"unknown density {opts['density']!r}")


def cmd_simulate(opts):
    ctx = numeric_q(opts)
    if not ctx.is_classical:
        raise QDomainError("Monte Carlo sampling is defined for q = 1 only")
    density = _density(opts)
    ranges = [_pair(text, "--range") for text in opts["range"]]
    rep = pointproc.mc_estimate_classical(
        _positive(_int(opts["n"], "--n"), "--n"),
        density,
        ranges,
        _positive(_int(opts["rmax"], "--rmax"), "--rmax"),
        _int(opts["samples"], "--samples"),
        _int(opts["seed"], "--seed"),
        bins=_positive(_int(opts["bins"], "--bins"), "--bins"),
    )
    rows = [dict(zip(rep.CSV_FIELDS, row)) for row in rep.to_rows()]
    meta = {"command": "simulate", "N": rep.N, "samples": rep.samples, "seed": rep.seed,
            "bin_edges": list(rep.bin_edges)}
    return rows, meta, 0


def cmd_janossy(opts):
    ctx = numeric_q(opts)
    lam = float(_number(str(opts["lam"]), "--lambda"))
    qdist.check_admissible(ctx.q, lam)
    h_max = _positive(_int(opts["rmax"], "--rmax"), "--rmax")
    density = _density(opts)
    lo, hi = (float(v) for v in density.support)
    if opts["points"]:
        points = [float(_number(t, "--points")) for t in opts["points"].split(",")]
        if len(points) < h_max:
            raise UsageError(f"--points needs at least {h_max} energies")
    else:
        points = [lo + (hi - lo) * (k + 1) / (h_max + 1) for k in range(h_max)]
    family = pointproc.q_poisson_family(lam, ctx, density, h_max=h_max)
    norm = math.fsum(pointproc.janossy_normalizer(family, h) for h in range(family.N_max + 1))
    rows = []
    for h in range(1, h_max + 1):
        got = pointproc.janossy_to_product_density(family, h, points[:h])
        expected = lam ** h * math.prod(float(density(e)) for e in points[:h])
        rows.append({"h": h, "reconstructed": got, "expected": expected,
                     "defect": abs(got - expected)})
    meta = {"command": "janossy", "q": ctx.q, "lambda": lam, "N_max": family.N_max,
            "normalizer_sum": norm, "points": points[:h_max]}
    return rows, meta, 0


def cmd_identity_check(opts):
    samples = _int(opts["samples"], "--samples")
    if samples < 10_000:
        raise UsageError("--samples must be at least 10000")
    seed = _int(opts["seed"], "--seed")
    results = checks.run_all(samples=samples, seed=seed)
    rows = [
        {
            "identity": res.name,
            "max_defect": f"{res.defect:.3e}",
            "tolerance": f"{res.tolerance:.1e}",
            "status": "PASS" if res.passed else "FAIL",
            "note": res.note,
        }
        for res in results
    ]
    meta = {"command": "identity-check", "samples": samples, "seed": seed,
            "passed": all(res.passed for res in results)}
    return rows, meta, 0 if meta["passed"] else 1


COMMANDS = {
    "stirling": cmd_stirling,
    "bell": cmd_bell,
    "poisson": cmd_poisson,
    "operator-check": cmd_operator_check,
    "simulate": cmd_simulate,
    "janossy": cmd_janossy,
    "identity-check": cmd_identity_check,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on a usage error
    try:
        opts = resolve(args)
        rows, meta, status = COMMANDS[args.command](opts)
    except UsageError as exc:
        parser.subcommand_parsers[args.command].print_usage(sys.stderr)
        print(f"qpointproc: error: {exc}", file=sys.stderr)
        return 2
    except QDomainError as exc:
        print(f"qpointproc: domain error: {exc}", file=sys.stderr)
        return 1
    text = render(rows, opts["format"], meta)
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
