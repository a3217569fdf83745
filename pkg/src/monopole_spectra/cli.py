"""Command-line interface: ``monopole-spectra <command> [options]``.

Commands
--------
ymh-spectrum   Rayleigh-Ritz levels of the YMH fluctuation channel.
ah-metric      Tabulate the Atiyah-Hitchin radial geometry.
ah-spectrum    Bound states of one Atiyah-Hitchin channel.
taubnut        Closed-form Taub-NUT levels.
certify        Bound-state certificate and Hardy check for a potential.
reproduce-all  Recompute the published tables and compare within tolerances.

Exit status: 0 success, 1 numerical failure, 2 usage error, 3 tolerance
failure in ``reproduce-all``. JSON numbers are written as decimal strings
with 17 significant digits. Without ``--output`` the result goes to
``$MONOPOLE_SPECTRA_OUTPUT_DIR/<name>.<format>`` when that variable is set
and to standard output otherwise.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, published
from .ah_geometry import METRIC_COLUMNS, build_metric, integrate_abc
from .ah_spectra import (
    CHANNELS,
    Channel,
    agreement_report,
    channel_potential,
    solve_channel,
    solve_channel_weighted,
    taub_nut_eigs,
)
from .halfline import bound_state_certificate, coulomb_profile, hardy_witness
from .linalg import BACKEND, available_backends
from .specfun import DomainError
from .ymh import solve_table1, ymh_profile

OUTPUT_DIR_ENV = "MONOPOLE_SPECTRA_OUTPUT_DIR"

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2, 3

YMH_TOL = 5e-6
AH_TOL = 1e-5
TAUB_NUT_TOL = 1e-8


class UsageError(Exception):
    """Invalid option values detected before any computation."""


def fmt(x) -> str:
    """Decimal string with 17 significant digits."""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# commands; each returns (payload, csv_rows, exit_status)


def _spectrum_rows(res, extra=None):
    rows = [["index", "eigenvalue", "error", "reliable"] + list(extra or {})]
    for k, (v, e, ok) in enumerate(zip(res.eigenvalues, res.estimated_error, res.reliable)):
        rows.append([k + 1, fmt(v), fmt(e), int(ok)] + [col[k] for col in (extra or {}).values()])
    return rows


def cmd_ymh_spectrum(args):
    res = solve_table1(args.dim, args.n_eigs, bits=args.precision_bits,
                       extended_precision=args.extended_precision)
    payload = {
        "dim": args.dim,
        "eigenvalues": res.eigenvalues,
        "errors": res.estimated_error,
        "below_threshold": res.reliable,
        "precision_bits": res.metadata["precision_bits"],
    }
    return payload, _spectrum_rows(res), EXIT_OK


def cmd_ah_metric(args):
    grid = None
    if args.points:
        grid = np.linspace(math.pi + args.h_core, args.r_max, args.points)
    table = integrate_abc(args.r_max, step_control=args.step_control, h=args.h_core, grid=grid)
    cols = table.columns()
    payload = {"columns": {k: np.asarray(v) for k, v in cols.items()},
               "offset_error_single_h": max(table.metadata["offset_error_single_h"]),
               "rows": len(table)}
    rows = [list(METRIC_COLUMNS)]
    rows += [[fmt(x) for x in row] for row in zip(*(np.asarray(cols[n]) for n in METRIC_COLUMNS))]
    return payload, rows, EXIT_OK


def _solve_ah(channel, args):
    kw = dict(cutoff=args.cutoff, grid_size=args.grid, n_eigs=args.n_eigs,
              refinements=args.refinements, backend=args.backend)
    if args.weighted:
        return solve_channel_weighted(channel, **kw)
    return solve_channel(channel, dirichlet=args.dirichlet, core_offset=args.h_core, **kw)


def cmd_ah_spectrum(args):
    channel = args.channel
    if args.n_eigs is None:
        args.n_eigs = len(published.AH_LEVELS[(channel.j, channel.s)])
    res = _solve_ah(channel, args)
    report = agreement_report(channel, res)
    payload = {
        "channel": str(channel),
        "eigenvalues": res.eigenvalues,
        "errors": res.estimated_error,
        "reliable": res.reliable,
        "C0": channel.asymptotics.C0,
        "cutoff": res.domain_cutoff,
        "method": res.method,
        "taub_nut": [r["taub_nut"] for r in report],
        "signs": [r["sign"] for r in report],
        "relative_differences": [r["relative"] for r in report],
    }
    extra = {"taub_nut": [fmt(r["taub_nut"]) for r in report],
             "sign": [r["sign"] for r in report]}
    status = EXIT_OK if bool(np.all(res.reliable)) else EXIT_NUMERICAL
    return payload, _spectrum_rows(res, extra), status


def cmd_taubnut(args):
    j, s = args.channel_pair
    vals = taub_nut_eigs((j, s), args.count)
    payload = {"channel": f"{j},{s}", "n": list(range(j + 1, j + args.count + 1)),
               "eigenvalues": vals}
    rows = [["n", "eigenvalue"]] + [[j + 1 + k, fmt(v)] for k, v in enumerate(vals)]
    return payload, rows, EXIT_OK


def _certify_profile(args):
    if args.potential == "coulomb":
        return coulomb_profile(alpha=-1.0, l=0, C0=0.0)
    if args.potential == "ymh":
        return ymh_profile()
    top = 2.0 ** (args.n_max + 1) + 1.0
    return channel_potential(args.channel, build_metric(top), R_max=top).profile


def cmd_certify(args):
    profile = _certify_profile(args)
    cert = bound_state_certificate(profile, n_max=args.n_max)
    hardy = hardy_witness(profile)
    payload = {
        "potential": profile.description,
        "C0": profile.asymptotics.C0,
        "C1": profile.asymptotics.C1,
        "success": cert.success,
        "longest_negative_run": cert.longest_negative_run,
        "shifted_quotients": [q for _, q in cert.quotients],
        "dilation_levels": [n for n, _ in cert.quotients],
        "hardy_inf_W": hardy.inf_W,
        "hardy_min_quotient": hardy.min_quotient,
        "hardy_passed": hardy.passed,
    }
    rows = [["n", "shifted_quotient"]] + [[n, fmt(q)] for n, q in cert.quotients]
    status = EXIT_OK if cert.success and hardy.passed else EXIT_NUMERICAL
    return payload, rows, status


def reproduce_tables(backend=None):
    """Recompute the YMH levels, the channel levels and the Taub-NUT ladder.

    Returns a list of comparison rows ``(table, label, computed, reference,
    difference, tolerance, passed)`` and the raw results.
    """
    rows = []
    ymh = solve_table1(20, 11)
    for k, (v, ref) in enumerate(zip(ymh.eigenvalues, published.YMH_DIM20), start=1):
        if k == 10:
            rows.append(("ymh", f"lambda_{k} < 1", v, 1.0, v - 1.0, 0.0, bool(v < 1.0)))
        else:
            rows.append(("ymh", f"lambda_{k}", v, ref, v - ref, YMH_TOL, abs(v - ref) <= YMH_TOL))
    ah = {}
    for ch in CHANNELS:
        key = (ch.j, ch.s)
        refs = published.AH_LEVELS[key]
        res = solve_channel(ch, n_eigs=len(refs), backend=backend)
        ah[key] = res
        for k, (v, ref) in enumerate(zip(res.eigenvalues, refs), start=1):
            rows.append(("ah", f"({ch}) level {k}", v, ref, v - ref, AH_TOL,
                         abs(v - ref) <= AH_TOL))
        tn = taub_nut_eigs(ch, len(refs))
        for k, (v, ref) in enumerate(zip(tn, published.TAUB_NUT_LEVELS[key]), start=1):
            rows.append(("taub_nut", f"({ch}) level {k}", v, ref, v - ref, TAUB_NUT_TOL,
                         abs(v - ref) <= TAUB_NUT_TOL))
        signs = "".join(r["sign"] for r in agreement_report(ch, res))
        ref_signs = published.TAUB_NUT_SIGNS[key]
        rows.append(("signs", f"({ch}) {signs} vs {ref_signs}", float(signs == ref_signs), 1.0,
                     0.0, 0.0, signs == ref_signs))
    return rows, {"ymh": ymh, "ah": ah}


def cmd_reproduce_all(args):
    rows, raw = reproduce_tables(args.backend)
    payload = {
        "comparisons": [
            {"table": t, "label": lab, "computed": v, "reference": ref, "difference": d,
             "tolerance": tol, "passed": ok}
            for t, lab, v, ref, d, tol, ok in rows
        ],
        "ymh_errors": raw["ymh"].estimated_error,
        "ah_errors": {str(k): r.estimated_error for k, r in raw["ah"].items()},
        "failures": sum(not r[-1] for r in rows),
    }
    table = [["table", "label", "computed", "reference", "difference", "tolerance", "passed"]]
    table += [[t, lab, fmt(v), fmt(ref), fmt(d), fmt(tol), int(ok)]
              for t, lab, v, ref, d, tol, ok in rows]
    failed = [r for r in rows if not r[-1]]
    if failed:
        print(f"{len(failed)} of {len(rows)} comparisons outside tolerance:", file=sys.stderr)
        for t, lab, v, ref, d, tol, _ in failed:
            print(f"  {t:9s} {lab:32s} computed {fmt(v)} reference {fmt(ref)} diff {d:+.3e}",
                  file=sys.stderr)
    return payload, table, EXIT_TOLERANCE if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and validation


def _channel(text):
    try:
        return Channel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _pair(text):
    try:
        j, s = (int(x) for x in text.replace(" ", "").split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected j,s") from exc
    return j, s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="monopole-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--backend", choices=("compiled", "python"), default=None,
                        help="Sturm-count kernel (default: compiled when built)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ymh-spectrum", parents=[common], help="YMH Rayleigh-Ritz levels")
    p.add_argument("--dim", type=int, default=20)
    p.add_argument("--n-eigs", type=int, default=11)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--extended-precision", action="store_true",
                   help="solve the pencil in extended precision as well")
    p.set_defaults(func=cmd_ymh_spectrum)

    p = sub.add_parser("ah-metric", parents=[common], help="tabulate the radial geometry")
    p.add_argument("--r-max", type=float, default=20.0)
    p.add_argument("--h-core", type=float, default=1e-3, help="core offset of the start")
    p.add_argument("--step-control", type=float, default=1e-12)
    p.add_argument("--points", type=int, default=0, help="extra uniform rows in r")
    p.add_argument("--dump", help="write the table as CSV to this path")
    p.set_defaults(func=cmd_ah_metric)

    p = sub.add_parser("ah-spectrum", parents=[common], help="levels of one channel")
    p.add_argument("--channel", type=_channel, required=True, help="j,s in {1,1 2,1 3,2}")
    p.add_argument("--n-eigs", type=int, default=None)
    p.add_argument("--cutoff", type=float, default=None, help="proper-distance cutoff")
    p.add_argument("--grid", type=int, default=None, help="cells on the coarsest grid")
    p.add_argument("--refinements", type=int, default=2)
    p.add_argument("--weighted", action="store_true", help="use the weighted r-form solver")
    p.add_argument("--dirichlet", action="store_true",
                   help="Dirichlet condition at --h-core (sensitivity variant)")
    p.add_argument("--h-core", type=float, default=0.0)
    p.set_defaults(func=cmd_ah_spectrum)

    p = sub.add_parser("taubnut", parents=[common], help="Taub-NUT levels")
    p.add_argument("--channel", dest="channel_pair", type=_pair, required=True)
    p.add_argument("--count", type=int, default=6)
    p.set_defaults(func=cmd_taubnut)

    p = sub.add_parser("certify", parents=[common], help="bound-state certificate")
    p.add_argument("--potential", choices=("coulomb", "ymh", "ah"), required=True)
    p.add_argument("--channel", type=_channel, default=None, help="channel for --potential ah")
    p.add_argument("--n-max", type=int, default=10, help="largest dilation level")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("reproduce-all", parents=[common], help="recompute the published tables")
    p.set_defaults(func=cmd_reproduce_all)
    return parser


def validate(args) -> None:
    """Range checks run before any computation."""
    c = args.command
    if c == "ymh-spectrum":
        if not 1 <= args.dim <= 60:
            raise UsageError("--dim must be in [1, 60]")
        if not 1 <= args.n_eigs <= args.dim:
            raise UsageError("--n-eigs must be in [1, dim]")
        if args.precision_bits is not None and args.precision_bits < 53:
            raise UsageError("--precision-bits must be at least 53")
    elif c == "ah-metric":
        if not 0 < args.h_core < 0.1:
            raise UsageError("--h-core must be in (0, 0.1)")
        if not math.pi + args.h_core < args.r_max <= 1e4:
            raise UsageError("--r-max must be in (pi + h_core, 1e4]")
        if not 0 < args.step_control < 1e-3:
            raise UsageError("--step-control must be in (0, 1e-3)")
        if args.points < 0:
            raise UsageError("--points must be nonnegative")
        if args.dump:
            args.output, args.format = args.dump, "csv"
    elif c == "ah-spectrum":
        if args.n_eigs is not None and not 1 <= args.n_eigs <= 50:
            raise UsageError("--n-eigs must be in [1, 50]")
        if args.cutoff is not None and not 10 <= args.cutoff <= 5000:
            raise UsageError("--cutoff must be in [10, 5000]")
        if args.grid is not None and args.grid < 200:
            raise UsageError("--grid must be at least 200")
        if not 0 <= args.refinements <= 4:
            raise UsageError("--refinements must be in [0, 4]")
        if args.h_core < 0 or (args.dirichlet and args.h_core == 0):
            raise UsageError("--dirichlet needs a positive --h-core")
        if args.weighted and args.dirichlet:
            raise UsageError("--weighted and --dirichlet are exclusive")
    elif c == "taubnut":
        j, s = args.channel_pair
        if j < 0 or abs(s) > j:
            raise UsageError("taubnut needs j >= 0 and |s| <= j")
        if not 1 <= args.count <= 1000:
            raise UsageError("--count must be in [1, 1000]")
    elif c == "certify":
        if args.potential == "ah" and args.channel is None:
            raise UsageError("--potential ah needs --channel")
        if not 3 <= args.n_max <= 12:
            raise UsageError("--n-max must be in [3, 12]")
    if getattr(args, "backend", None) and args.backend not in available_backends():
        raise UsageError(f"backend {args.backend!r} is not available")


def _config_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        out[k] = str(v) if isinstance(v, Channel) else (list(v) if isinstance(v, tuple) else v)
    return out


def _default_name(args) -> str:
    tag = args.command
    ch = getattr(args, "channel", None) or getattr(args, "channel_pair", None)
    if ch is not None:
        j, s = (ch.j, ch.s) if isinstance(ch, Channel) else ch
        tag += f"-{j}-{s}"
    return f"{tag}.{args.format}"


def _render(args, payload, rows, wall) -> str:
    meta = {"version": __version__, "command": args.command, "config": _config_echo(args),
            "backend": args.backend or BACKEND, "wall_time_seconds": wall}
    if args.format == "json":
        doc = {"metadata": _jsonable(meta), "result": _jsonable(payload)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for k, v in _jsonable(meta).items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        validate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"monopole-spectra: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        payload, rows, status = args.func(args)
    except (ArithmeticError, DomainError, ValueError) as exc:
        print(f"monopole-spectra: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = _render(args, payload, rows, time.perf_counter() - start)
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        directory = os.environ[OUTPUT_DIR_ENV]
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, _default_name(args))
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
