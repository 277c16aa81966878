"""Command-line driver: check, compile, dot, sim, interp, fuzz.

`sim` and `interp` read and write the shared tick-trace format, so their
standard output can be compared byte for byte with each other and with the
binaries built from generated back-end code.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import codegen, fuzz, optimize, rewrite, semantics, simulate
from .frontend import CheckedAst, check_source, parse_source, validate
from .trace import TickTrace, TraceSyntaxError, format_trace, parse_trace


def _read_source(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _check_file(path: str) -> CheckedAst | None:
    """Validate a source file; on failure print diagnostics and return None."""
    source = _read_source(path)
    diags = check_source(source)
    for d in diags:
        print(d.render(path), file=sys.stderr)
    if any(d.severity == "error" for d in diags):
        return None
    return validate(parse_source(source))


def _compile_file(path: str, raw: bool = False):
    checked = _check_file(path)
    if checked is None:
        return None
    g, threads, frag = rewrite.rewrite_program(checked)
    if raw:
        return checked, g, threads, frag
    g2, threads2 = optimize.eliminate_dummies(g, threads)
    diags = optimize.check_determinism(g2)
    for d in optimize.hard_errors(diags):
        print(d.render(path), file=sys.stderr)
    if optimize.hard_errors(diags):
        return None
    return checked, g2, threads2, frag


def _load_trace(path: str | None, ticks: int | None) -> TickTrace:
    trace = TickTrace() if path is None else parse_trace(_read_source(path))
    if ticks is not None:
        trace = trace.extended_to(ticks)
    return trace


def cmd_check(args) -> int:
    return 0 if _check_file(args.file) is not None else 1


def cmd_compile(args) -> int:
    result = _compile_file(args.file)
    if result is None:
        return 1
    _, g, threads, _ = result
    opts = codegen.CodegenOptions(
        io_mode=args.io, constexpr_annotations=args.constexpr)
    source = codegen.emit_typestate(g, threads, opts)
    if args.output == "-":
        sys.stdout.write(source)
    else:
        Path(args.output).write_text(source, encoding="utf-8")
    return 0


def cmd_dot(args) -> int:
    from .fsmgraph import to_dot

    result = _compile_file(args.file, raw=args.raw)
    if result is None:
        return 1
    _, g, _, _ = result
    sys.stdout.write(to_dot(g))
    return 0


def cmd_sim(args) -> int:
    result = _compile_file(args.file)
    if result is None:
        return 1
    _, g, threads, _ = result
    trace = _load_trace(args.trace, args.ticks)
    out = simulate.run_trace_fsm(g, threads, trace)
    sys.stdout.write(format_trace(out))
    if out.terminated_at is not None:
        print(f"terminated at tick {out.terminated_at}", file=sys.stderr)
    return 0


def cmd_interp(args) -> int:
    checked = _check_file(args.file)
    if checked is None:
        return 1
    trace = _load_trace(args.trace, args.ticks)
    out = semantics.run_trace_sos(checked, trace)
    sys.stdout.write(format_trace(out))
    if out.terminated_at is not None:
        print(f"terminated at tick {out.terminated_at}", file=sys.stderr)
    return 0


def cmd_fuzz(args) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get("SYNKC_SEED", "0"))
    params = fuzz.GenParams(max_depth=args.depth, max_pars=args.max_pars,
                            max_signals=args.max_signals)
    found = fuzz.run_fuzz(seed, args.count, args.ticks, params)
    if found:
        for d in found:
            from .frontend import format_program

            print("discrepancy on program:", file=sys.stderr)
            print(format_program(d.program), file=sys.stderr)
            print(f"inputs: {format_trace(d.trace)}", file=sys.stderr)
            print(f"sos:    {format_trace(d.sos)}", file=sys.stderr)
            print(f"fsm:    {format_trace(d.fsm)}", file=sys.stderr)
        print(f"{len(found)} discrepancies in {args.count} programs",
              file=sys.stderr)
        return 1
    print(f"ok: {args.count} programs agree (seed {seed})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synkc",
        description="kernel synchronous language compiler and simulators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a program")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compile", help="emit type-state back-end code")
    p.add_argument("file")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--io", choices=["trace-stdio", "extern"],
                   default="trace-stdio")
    p.add_argument("--constexpr", action="store_true",
                   help="annotate transitions constexpr (needs a libstdc++ "
                        "with constexpr variant assignment)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("dot", help="print the FSM in DOT format")
    p.add_argument("file")
    p.add_argument("--raw", action="store_true",
                   help="before dummy elimination")
    p.set_defaults(func=cmd_dot)

    for name, help_text in [("sim", "execute the compiled FSM over a trace"),
                            ("interp", "run the reference interpreter over a trace")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file")
        p.add_argument("--trace", default=None)
        p.add_argument("--ticks", type=int, default=None,
                       help="truncate or zero-extend the input trace")
        p.set_defaults(func=cmd_sim if name == "sim" else cmd_interp)

    p = sub.add_parser("fuzz", help="differential-test the FSM against the "
                                    "reference interpreter on random programs")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--ticks", type=int, default=100)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--max-pars", type=int, default=3)
    p.add_argument("--max-signals", type=int, default=8)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to SYNKC_SEED or 0")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TraceSyntaxError as e:
        print(f"trace error: {e}", file=sys.stderr)
        return 1
    except (semantics.UnknownInputSignal,) as e:
        print(f"unknown input signal: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"cannot read {e.filename}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
