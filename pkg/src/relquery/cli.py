"""Command line entry points: REPL, script runner, HTTP service, heatmaps.

Exit codes: 0 ok, 1 query error, 2 system error.  The session seed comes
from --seed or the RELQUERY_SEED environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .baselines import MEASURES, heatmap_ordering, pairwise_matrix, write_heatmap
from .bql import format_result
from .errors import BqlError, RelqueryError
from .session import Session


def _default_seed():
    return int(os.environ.get("RELQUERY_SEED", "0"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="relquery",
        description="Probabilistic search over sparse tabular data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="session RNG seed")
    common.add_argument("--models", type=int, default=16, help="ensemble size when loading --data")
    common.add_argument("--data", type=str, default=None, help="CSV to load at startup")
    common.add_argument("--key", type=str, default=None, help="key column for --data")

    p_repl = sub.add_parser("repl", parents=[common], help="interactive query loop")

    p_run = sub.add_parser("run", parents=[common], help="run a BQL script")
    p_run.add_argument("script", type=str)
    p_run.add_argument("--output", choices=("table", "csv", "json"), default="table")
    p_run.add_argument("--keep-going", action="store_true",
                       help="continue past statement errors")

    p_serve = sub.add_parser("serve", parents=[common], help="HTTP service")
    p_serve.add_argument("--port", type=int, default=7777)
    p_serve.add_argument("--host", type=str, default="127.0.0.1")

    p_heat = sub.add_parser("heatmap", parents=[common], help="pairwise heatmap files")
    p_heat.add_argument("--measure", choices=MEASURES, required=True)
    p_heat.add_argument("--context", type=str, required=True)
    p_heat.add_argument("--k", type=int, default=10)
    p_heat.add_argument("--iterations", type=int, default=100)
    p_heat.add_argument("--out-csv", type=str, default=None)
    p_heat.add_argument("--out-png", type=str, default=None)
    return parser


def _make_session(args) -> Session:
    seed = args.seed if args.seed is not None else _default_seed()
    session = Session(seed=seed, default_models=args.models)
    if args.data:
        name = Path(args.data).stem
        session.create_table(name, args.data, key=args.key)
        pop = session.create_population(name, name)
        session.initialize_models(pop, args.models)
    return session


def _print_error(text, err, out=sys.stderr):
    print(f"error: {err.message if isinstance(err, BqlError) else err}", file=out)
    if isinstance(err, BqlError) and err.line is not None:
        lines = text.split("\n")
        if 1 <= err.line <= len(lines):
            print(f"  {lines[err.line - 1]}", file=out)
            print("  " + " " * (err.column - 1) + "^", file=out)


def _emit_warnings(session, out=sys.stderr):
    for w in session.warnings:
        print(f"note: {w}", file=out)


def _open_parens(lines):
    """Unclosed paren count across buffered lines, ignoring quoted text."""
    depth = 0
    quote = None
    for line in lines:
        for ch in line:
            if quote:
                if ch == quote:
                    quote = None
            elif ch in ("'", '"'):
                quote = ch
            elif ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
    return depth


def repl(session: Session, stdin=None, stdout=None):
    """Read statements terminated by ';' or a blank line; errors never
    terminate the loop."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    buffer = []

    def run(text):
        text = text.strip()
        if not text:
            return
        try:
            result = session.execute(text)
            print(format_result(result, "table"), file=stdout)
            _emit_warnings(session)
        except RelqueryError as err:
            _print_error(text, err)

    while True:
        if interactive:
            prompt = "relquery> " if not buffer else "      ... "
            stdout.write(prompt)
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        stripped = line.strip()
        if stripped.startswith("\\"):
            parts = stripped.split()
            if parts[0] in ("\\q", "\\quit"):
                break
            if parts[0] == "\\seed" and len(parts) == 2:
                session.seed = int(parts[1])
                print(f"seed set to {session.seed}", file=stdout)
            else:
                print(f"unknown meta command {parts[0]!r}", file=stdout)
            continue
        if stripped.startswith("..."):
            stripped = stripped[3:].strip()
        if not stripped:
            if buffer:
                run("\n".join(buffer))
                buffer = []
            continue
        buffer.append(stripped)
        if stripped.endswith(";") and _open_parens(buffer) == 0:
            run("\n".join(buffer))
            buffer = []
    if buffer:
        run("\n".join(buffer))
    return 0


def run_script(session: Session, path, output="table", keep_going=False, stdout=None):
    stdout = stdout or sys.stdout
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: cannot read script: {err}", file=sys.stderr)
        return 2
    from .bql import parse_script, to_bql

    try:
        statements = parse_script(text)
    except BqlError as err:
        _print_error(text, err)
        return 1
    from .bql.evaluate import execute as _execute

    failed = False
    for i, stmt in enumerate(statements):
        try:
            with session.lock:
                session.warnings = []
                result = _execute(stmt, session)
                session.history.append(to_bql(stmt))
            print(format_result(result, output), file=stdout)
            _emit_warnings(session)
        except RelqueryError as err:
            print(f"error in statement {i + 1}: {err}", file=sys.stderr)
            failed = True
            if not keep_going:
                return 1
    return 1 if failed else 0


def run_heatmap(session: Session, args):
    if not session.populations:
        print("error: heatmap needs --data", file=sys.stderr)
        return 2
    pop = next(iter(session.populations.values()))
    if pop.ensemble is not None and args.iterations > 0:
        session.analyze_population(pop, args.iterations, "iterations")
    matrix = pairwise_matrix(
        args.measure, pop.table, args.context,
        ensemble=pop.ensemble, cache=pop.cache, k=args.k,
    )
    order = heatmap_ordering(matrix)
    write_heatmap(matrix, pop.table.row_keys, csv_path=args.out_csv,
                  png_path=args.out_png, order=order)
    print(f"heatmap over {pop.table.n_rows} rows written"
          f" (csv={args.out_csv or '-'}, png={args.out_png or '-'})")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        session = _make_session(args)
    except RelqueryError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        if args.command == "repl":
            return repl(session)
        if args.command == "run":
            return run_script(session, args.script, args.output, args.keep_going)
        if args.command == "serve":
            import uvicorn

            from .server import create_app

            app = create_app(default_seed=session.seed)
            uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
            return 0
        if args.command == "heatmap":
            return run_heatmap(session, args)
    except RelqueryError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
