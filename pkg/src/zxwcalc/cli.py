"""Command line front end.

Subcommands: interpret, normalize, equal, verify-rules, render.  File
arguments take the canonical JSON diagram format; `-` reads stdin.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .interpret import interpret
from .io import parse_diagram, render_dot, serialize_diagram
from .normalform import decide_equal, emit_diagram, normalize
from .rules import verify_all


def _read_diagram(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_diagram(text)


def _fmt_complex(value: complex, tol: float) -> str:
    re = 0.0 if abs(value.real) <= tol else value.real
    im = 0.0 if abs(value.imag) <= tol else value.imag
    if im == 0.0:
        return f"{re:.12g}"
    return f"{re:.12g}{im:+.12g}j"


def _cmd_interpret(args) -> int:
    dia = _read_diagram(args.file)
    mat = interpret(dia)
    print(f"dimension={dia.dimension} outputs={dia.n_out} inputs={dia.n_in} "
          f"shape={mat.shape[0]}x{mat.shape[1]}")
    for row in mat:
        print(" ".join(_fmt_complex(x, args.tol) for x in row))
    return 0


def _cmd_normalize(args) -> int:
    dia = _read_diagram(args.file)
    nf = normalize(dia)
    print(f"dimension={nf.dimension} wires={nf.n_wires}")
    for idx, amp in enumerate(nf.amplitudes):
        print(f"{idx} {_fmt_complex(amp, 0.0)}")
    if args.emit_diagram is not None:
        text = serialize_diagram(emit_diagram(nf))
        if args.emit_diagram == "-":
            sys.stdout.write(text)
        else:
            Path(args.emit_diagram).write_text(text)
    return 0


def _cmd_equal(args) -> int:
    first = _read_diagram(args.first)
    second = _read_diagram(args.second)
    same = decide_equal(first, second, tol=args.tol)
    print("equal" if same else "different")
    return 0 if same else 1


def _cmd_verify_rules(args) -> int:
    dims = tuple(int(x) for x in args.dims.split(","))
    reports = verify_all(dimensions=dims, samples=args.samples, seed=args.seed)
    lines = []
    all_ok = True
    for rep in reports:
        status = "pass" if rep.passed else "FAIL"
        print(f"{status} {rep.rule} d={rep.dimension} samples={rep.samples} "
              f"max_dev={rep.max_deviation:.3e}")
        all_ok = all_ok and rep.passed
        lines.append(json.dumps({
            "rule": rep.rule,
            "d": rep.dimension,
            "samples": rep.samples,
            "max_dev": rep.max_deviation,
            "pass": rep.passed,
        }, sort_keys=True))
    print(("all rules sound" if all_ok else "UNSOUND rules present")
          + f" ({len(reports)} checks)")
    if args.report is not None:
        Path(args.report).write_text("".join(line + "\n" for line in lines))
    return 0 if all_ok else 1


def _cmd_render(args) -> int:
    dia = _read_diagram(args.file)
    if args.format != "dot":
        raise ValueError(f"unknown format {args.format!r}")
    sys.stdout.write(render_dot(dia))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zxwcalc",
        description="Qudit ZXW diagrams: interpret, normalize, compare, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpret", help="contract a diagram to its matrix")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=0.0,
                   help="display entries at or below this magnitude as 0")
    p.set_defaults(func=_cmd_interpret)

    p = sub.add_parser("normalize", help="reduce a diagram to its normal form")
    p.add_argument("file")
    p.add_argument("--emit-diagram", metavar="OUT", default=None,
                   help="also write the normal form as a diagram to this path")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("equal", help="decide semantic equality of two diagrams")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_equal)

    p = sub.add_parser("verify-rules", help="numerically check every rewrite rule")
    p.add_argument("--dims", default="2,3,4,5",
                   help="comma separated qudit dimensions (default 2,3,4,5)")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", metavar="OUT", default=None,
                   help="write one JSON record per check to this path")
    p.set_defaults(func=_cmd_verify_rules)

    p = sub.add_parser("render", help="emit Graphviz DOT for a diagram")
    p.add_argument("file")
    p.add_argument("--format", default="dot", choices=["dot"])
    p.set_defaults(func=_cmd_render)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
