"""Command-line interface: ``genstab {eval,sample,fit,check,probe,tweedie}``.

Tables go to standard output (or ``--out``) as CSV with a header row or as
JSON ``{"meta": <flags>, "data": [<row objects>]}``.  Numbers are written with
17 significant digits.  Exit codes: 0 success, 1 numerical failure, 2 invalid
input or member.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from .chf import (
    GridSpec,
    balance_residual,
    chf_geometric,
    log_chf,
    member_chf,
    mixture_residual,
    probe,
    raw_chf,
    stability_residual,
    tilt_residual,
)
from .errors import GenstabError, InputError
from .family import FamilyParams, geometric, tilt, tweedie_power
from .fit import ingest, mle_fit
from .inversion import cdf_grid, pdf_grid
from .sampler import sample

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
CHECK_TOL = 1e-10


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(format(v, ".17g")) if math.isfinite(v) else None
    return v


def render(columns, rows, fmt: str, meta: dict) -> str:
    if fmt == "json":
        data = [{k: _json_value(v) for k, v in zip(columns, row)} for row in rows]
        return json.dumps({"meta": meta, "data": data}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# argument parsing


def _member_flags(p: argparse.ArgumentParser, geometric_flag: bool = True):
    g = p.add_argument_group("member")
    g.add_argument("--gamma", type=float, required=True)
    g.add_argument("--a", type=float, required=True)
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--theta", type=float, default=0.0)
    if geometric_flag:
        g.add_argument("--geometric", action="store_true", help="use the geometric extension 1/(1 - log f)")


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-", help="output file (default: standard output)")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="chf, pdf or cdf on an equispaced grid")
    _member_flags(p)
    p.add_argument("--what", choices=("chf", "pdf", "cdf"), required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=_positive_int, required=True)
    _common_flags(p)

    p = sub.add_parser("sample", help="random variates, one per row")
    _member_flags(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    _common_flags(p)

    p = sub.add_parser("fit", help="maximum-likelihood fit to a data file")
    p.add_argument("--input", required=True, help="text/CSV file, one value per row")
    p.add_argument("--column", default="0", help="column index or header name")
    _common_flags(p)

    p = sub.add_parser("check", help="maximum residual of an identity on a grid")
    _member_flags(p, geometric_flag=False)
    p.add_argument("--identity", choices=("stability", "tilt", "balance", "mixture"), required=True)
    p.add_argument("--from", dest="start", type=float, default=-20.0)
    p.add_argument("--to", dest="stop", type=float, default=20.0)
    p.add_argument("--points", type=_positive_int, default=401)
    _common_flags(p)

    p = sub.add_parser("probe", help="Bochner positive-definiteness probe")
    _member_flags(p)
    p.add_argument("--grid-size", type=_positive_int, default=64)
    p.add_argument("--trials", type=_positive_int, default=32)
    _common_flags(p)

    p = sub.add_parser("tweedie", help="Tweedie power p = 1 + 1/(1 - gamma)")
    p.add_argument("--gamma", type=float, required=True)
    _common_flags(p)
    return parser


# --------------------------------------------------------------------------
# commands


def _member(args):
    params = FamilyParams(args.gamma, args.a, args.c)
    if getattr(args, "geometric", False):
        return geometric(params, args.theta)
    return tilt(params, args.theta)


def _grid(args) -> np.ndarray:
    if args.points == 1:
        if args.start != args.stop:
            raise InputError("--points 1 needs --from equal to --to")
        return np.array([args.start])
    if not args.start < args.stop:
        raise InputError("--from must be below --to")
    return np.linspace(args.start, args.stop, args.points)


def cmd_eval(args):
    member = _member(args)
    x = _grid(args)
    if args.what == "chf":
        phi = member_chf(member) if not args.geometric else (lambda t: chf_geometric(member, t))
        vals = np.atleast_1d(phi(x))
        return ["t", "value_re", "value_im"], [(t, v.real, v.imag) for t, v in zip(x, vals)]
    member_chf(member)  # validity gate (raises with the report)
    pdf = pdf_grid(member, x)
    cdf = cdf_grid(member, x)
    return ["x", "pdf", "cdf"], list(zip(x, pdf, cdf))


def cmd_sample(args):
    batch = sample(_member(args), args.n, args.seed, workers=args.workers)
    return ["value"], [(v,) for v in batch.values]


def cmd_fit(args):
    column = int(args.column) if args.column.lstrip("-").isdigit() else args.column
    data = ingest(args.input, column)
    res = mle_fit(data)
    row = (
        res.params.gamma, res.params.a, res.params.c, res.case.letter, res.loglik,
        res.converged, res.n_evals, *res.stderr, res.message,
    )
    cols = ["gamma", "a", "c", "case", "loglik", "converged", "n_evals",
            "stderr_gamma", "stderr_a", "stderr_c", "message"]
    return cols, [row]


def cmd_check(args):
    params = FamilyParams(args.gamma, args.a, args.c)
    grid = GridSpec(args.start, args.stop, args.points)
    if args.identity == "stability":
        r = stability_residual(params, args.theta, grid)
    elif args.identity == "tilt":
        r = tilt_residual(params, args.theta, grid)
    elif args.identity == "balance":
        r = balance_residual(params, args.theta, grid)
    else:
        r = mixture_residual(tilt(params, args.theta).member, grid)
    passed = r <= CHECK_TOL
    return ["identity", "max_residual", "tolerance", "pass"], [(args.identity, r, CHECK_TOL, passed)], (
        EXIT_OK if passed else EXIT_NUMERIC
    )


def cmd_probe(args):
    member = _member(args)
    params = member.member
    if args.geometric:
        def phi(t):
            return 1.0 / (1.0 - log_chf(params, t))
    else:
        def phi(t):
            return raw_chf(params, t)
    rep = probe(phi, n_points=args.grid_size, n_trials=args.trials, seed=args.seed)
    return ["min_eigenvalue", "max_modulus", "verdict"], [(rep.min_eigenvalue, rep.max_modulus, rep.verdict)]


def cmd_tweedie(args):
    return ["gamma", "p"], [(args.gamma, tweedie_power(args.gamma))]


COMMANDS = {
    "eval": cmd_eval,
    "sample": cmd_sample,
    "fit": cmd_fit,
    "check": cmd_check,
    "probe": cmd_probe,
    "tweedie": cmd_tweedie,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    renames = {"start": "from", "stop": "to"}
    meta = {renames.get(k, k): v for k, v in vars(args).items()}
    try:
        result = COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GenstabError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    columns, rows, *code = result
    text = render(columns, rows, args.format, meta)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code[0] if code else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
