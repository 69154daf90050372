"""Command-line front end.

Subcommands cover the library surface: `bracket` and `flow` print
symbolic results, `hierarchy` generates (and optionally verifies) the
commuting family, `classify` names the membership class of a frame
field, and `simulate` runs the grid solver and writes CSV files plus a
JSON run report.

Flow pairs on the command line are comma-separated expressions; frame
fields are semicolon-separated (f;h;g;l).  Exit codes: 0 success,
2 parse error (also argparse's own usage errors), 3 not exact,
4 verification failure, 5 numeric blow-up, 1 anything else (unbound
parameters, derivative-order cap, bad files).  The environment variable
NULLFLOW_MAX_ORDER caps the derivative order (default 12).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .diffalg import NonZeroConstantTerm, NotExact, OrderLimitError, lie_bracket_flows
from .expr import ParseError, parse_expr, parse_flow, render
from .hierarchy import commute_check, generate, seed, verify_reference_forms
from .nullcurve import LocalVectorField, classify
from .numsim import (
    BlowUp,
    SimConfig,
    UnboundParameter,
    compile_flow,
    evolve,
    nlie_run,
    reconstruct_curve,
    run_report,
    uniform_grid,
    write_curvature_csv,
    write_path_csv,
    write_report_json,
)


def _fmt(args) -> str:
    return "latex" if args.latex else "plain"


def _cmd_bracket(args) -> int:
    first = parse_flow(args.first)
    second = parse_flow(args.second)
    print(render(lie_bracket_flows(first, second), _fmt(args)))
    return 0


def _cmd_flow(args) -> int:
    entry = seed(args.seed, args.const)
    print(render(entry.flow, _fmt(args)))
    return 0


def _cmd_hierarchy(args) -> int:
    entries = generate(args.upto, args.constants)
    fmt = _fmt(args)
    for entry in entries:
        print("V%d field:" % entry.index)
        for name, comp in zip("fhgl", entry.field.components()):
            print("  %s = %s" % (name, render(comp, fmt)))
        print("V%d flow:" % entry.index)
        print("  k1_t = %s" % render(entry.flow.p1, fmt))
        print("  k2_t = %s" % render(entry.flow.p2, fmt))
    if not args.verify:
        return 0
    ok = True
    report = verify_reference_forms(entries)
    for check in report["checks"]:
        if check["ok"]:
            print("reference V%d %s: ok" % (check["index"], check["component"]))
        else:
            print(
                "reference V%d %s: FAIL (difference: %s)"
                % (check["index"], check["component"], check["difference"])
            )
    ok = ok and report["ok"]
    for i, left in enumerate(entries):
        for right in entries[i + 1 :]:
            if max(left.index, right.index) > 3 or left.index + right.index > 4:
                continue
            good = commute_check(left, right)
            print(
                "commute [V%d, V%d]: %s"
                % (left.index, right.index, "ok" if good else "FAIL")
            )
            ok = ok and good
    return 0 if ok else 4


def _cmd_classify(args) -> int:
    parts = args.field.split(";")
    if len(parts) != 4:
        raise ParseError("expected four components f;h;g;l", 0)
    f, h, g, l = (parse_expr(p.strip()) for p in parts)
    print(classify(LocalVectorField(f, h, g, l)))
    return 0


def _profiles(args, length: float):
    amp, amp2 = args.amplitude, args.k2_amplitude
    if args.profile == "soliton":
        width = math.sqrt(args.a * amp) / 2.0
        k1 = lambda s: amp / np.cosh(width * (s - length / 2)) ** 2
        k2 = lambda s: amp2 * np.sin(2 * np.pi * s / length)
    elif args.profile == "sine":
        k1 = lambda s: amp * np.sin(2 * np.pi * s / length)
        k2 = lambda s: amp2 * np.cos(2 * np.pi * s / length)
    else:
        k1, k2 = float(amp), float(amp2)
    return k1, k2


def _cmd_simulate(args) -> int:
    params = {}
    for binding in args.param:
        name, sep, value = binding.partition("=")
        if not sep or not name:
            raise ValueError("--param expects NAME=VALUE, got %r" % (binding,))
        params[name] = float(value)
    if args.profile is None:
        args.profile = "soliton" if args.flow == "nlie" else "sine"
    length = args.length if args.length else (
        60.0 if args.profile == "soliton" else 2 * math.pi
    )
    config = SimConfig(
        domain_length=length,
        grid_points=args.n,
        dt=args.dt,
        t_end=args.t_end,
        a=args.a,
        eps1=args.eps1,
        eps2=args.eps2,
        derivative_stencil=args.stencil,
        output_stride=args.stride,
    )
    k1, k2 = _profiles(args, length)
    os.makedirs(args.out, exist_ok=True)

    if args.flow == "nlie":
        history, paths = nlie_run(config, k1, k2, c=params.pop("c", 1.0))
        if params:
            raise ValueError("unused --param bindings: %s" % ", ".join(sorted(params)))
    else:
        if args.flow == "translation":
            flow = parse_flow("b*k1', b*k2'")
            params.setdefault("b", 1.0)
        else:
            if not args.flow_file:
                raise ValueError("--flow file requires --flow-file")
            with open(args.flow_file) as fh:
                flow = parse_flow(fh.read().strip())
        rhs = compile_flow(flow, params, config)
        history = evolve(uniform_grid(config, k1, k2), rhs, config)
        paths = [reconstruct_curve(history[-1], config)] if args.reconstruct else []

    written = []
    for variable in ("k1", "k2"):
        target = os.path.join(args.out, "%s.csv" % variable)
        write_curvature_csv(target, history, variable)
        written.append(target)
    if paths:
        target = os.path.join(args.out, "path_final.csv")
        write_path_csv(target, paths[-1])
        written.append(target)
    target = os.path.join(args.out, "report.json")
    write_report_json(target, run_report(config, history, paths))
    written.append(target)
    print("wrote %s" % ", ".join(written))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullflow",
        description="Differential-polynomial curvature flows of null curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", help="Lie bracket of two flow pairs")
    p.add_argument("first", help="flow pair, e.g. \"b*k1', b*k2'\"")
    p.add_argument("second", help="flow pair")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=_cmd_bracket)

    p = sub.add_parser("flow", help="curvature flow of a seed field")
    p.add_argument("--seed", type=int, choices=(0, 1), required=True)
    p.add_argument("--const", default=None, help="scale symbol (default b or c)")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("hierarchy", help="generate entries 0..N")
    p.add_argument("--upto", type=int, default=3)
    p.add_argument("--constants", choices=("fresh", "zero"), default="fresh")
    p.add_argument("--verify", action="store_true",
                   help="check reference forms and commutation; exit 4 on failure")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=_cmd_hierarchy)

    p = sub.add_parser("classify", help="membership class of a frame field")
    p.add_argument("field", help="semicolon-separated components f;h;g;l")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="evolve curvatures and write CSV/JSON")
    p.add_argument("--flow", choices=("nlie", "translation", "file"), default="nlie")
    p.add_argument("--flow-file", default=None,
                   help="file holding a flow pair (for --flow file)")
    p.add_argument("--n", type=int, default=512, help="grid points")
    p.add_argument("--dt", type=float, default=0.0,
                   help="time step (0: stability bound)")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--length", type=float, default=0.0,
                   help="domain length (0: profile default)")
    p.add_argument("--profile", choices=("soliton", "sine", "constant"), default=None)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--k2-amplitude", type=float, default=0.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--eps1", type=int, choices=(-1, 1), default=1)
    p.add_argument("--eps2", type=int, choices=(-1, 1), default=1)
    p.add_argument("--stencil", choices=("central4", "central6"), default="central4")
    p.add_argument("--stride", type=int, default=0,
                   help="save every Nth step (0: first and last)")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                   help="bind a flow parameter, repeatable")
    p.add_argument("--reconstruct", action="store_true",
                   help="also reconstruct the final curve (nlie always does)")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return 2
    except (NotExact, NonZeroConstantTerm) as exc:
        print("not exact: %s" % exc, file=sys.stderr)
        return 3
    except BlowUp as exc:
        print("blow-up: %s" % exc, file=sys.stderr)
        return 5
    except (OrderLimitError, UnboundParameter, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
