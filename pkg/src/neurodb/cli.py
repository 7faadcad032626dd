"""Command-line entry point: script runner and interactive REPL.

Exit codes: 0 ok, 1 script/statement error, 2 usage error.  In script mode
the first error aborts with its line number; the REPL reports errors and
keeps the session alive.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import NeuroDbError, OsqlSyntaxError
from .osql.lexer import tokenize
from .osql.parser import parse_script
from .session import Session
from .snapshot import load_snapshot, save_snapshot
from .values import FnRef, Ref, Stream


def format_value(db, v) -> str:
    if v is None:
        return "null"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, FnRef):
        return v.name
    if isinstance(v, Ref):
        name = db.name_of(v.oid)
        return name if name is not None else f"#{v.oid}"
    if isinstance(v, Stream):
        return format_rows(db, v.rows())
    if isinstance(v, tuple):
        return format_rows(db, [v])
    if isinstance(v, list):
        if v and all(isinstance(x, tuple) for x in v):
            return format_rows(db, v)
        return "\n".join(format_value(db, x) for x in v)
    return str(v)


def format_rows(db, rows) -> str:
    if not rows:
        return "(empty)"
    cells = [[format_value(db, v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


def run_script(session: Session, path: str, err=None) -> int:
    err = err if err is not None else sys.stderr
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=err)
        return 1
    try:
        statements = parse_script(text)
    except OsqlSyntaxError as exc:
        print(f"error: {path}: {exc}", file=err)
        return 1
    for stmt in statements:
        try:
            result = session.execute_statement(stmt)
            if result is not None:
                # streams evaluate lazily, so formatting can fail too
                print(format_value(session.db, result), file=session.out)
        except NeuroDbError as exc:
            line = getattr(stmt, "line", 0)
            print(f"error: {path}: line {line}: {exc}", file=err)
            return 1
    return 0


def _statement_complete(buffer: str) -> bool:
    """A buffer is runnable when it lexes, any begin/end blocks are closed,
    and the last token is ';'."""
    try:
        tokens = tokenize(buffer)
    except OsqlSyntaxError:
        return True     # surface the error immediately
    depth = 0
    last = None
    for tok in tokens:
        if tok.kind == "KEYWORD" and tok.value == "begin":
            depth += 1
        elif tok.kind == "KEYWORD" and tok.value == "end":
            depth -= 1
        if tok.kind != "EOF":
            last = tok
    return depth <= 0 and last is not None and last.kind == "SEMI"


def repl(session: Session, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    buffer = ""
    if interactive:
        print("neurodb -- end statements with ';', Ctrl-D exits", file=stdout)
    while True:
        if interactive:
            stdout.write("neurodb> " if not buffer else "    ...> ")
            stdout.flush()
        line = stdin.readline()
        if not line:
            break
        buffer += line
        if not buffer.strip() or not _statement_complete(buffer):
            continue
        text, buffer = buffer, ""
        try:
            for _stmt, result in session.execute(text):
                if result is not None:
                    print(format_value(session.db, result), file=stdout)
        except NeuroDbError as exc:
            print(f"error: {exc}", file=stderr)
    if buffer.strip():
        print("error: incomplete statement at end of input", file=stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neurodb",
        description="Object database with neural networks as stored objects, "
                    "scripted in an OSQL dialect.")
    parser.add_argument("--db", metavar="PATH",
                        help="snapshot file to load (if present) and save on exit")
    parser.add_argument("--script", metavar="PATH", help="run an .osql script")
    parser.add_argument("--mode", choices=("paper", "textbook"), default="paper",
                        help="backward-pass weight-read semantics (default: paper)")
    parser.add_argument("--report-interval", type=int, default=100, metavar="N",
                        help="print a training line every N epochs (default: 100)")
    parser.add_argument("--eval", metavar="STMT", dest="eval_stmt",
                        help="execute one statement and print its result")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    db = None
    if args.db and os.path.exists(args.db):
        try:
            db = load_snapshot(args.db)
        except NeuroDbError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    base_dir = os.path.dirname(os.path.abspath(args.script)) if args.script else os.getcwd()
    session = Session(db=db, mode=args.mode, report_interval=args.report_interval,
                      base_dir=base_dir)

    code = 0
    if args.script:
        code = run_script(session, args.script)
    if code == 0 and args.eval_stmt:
        try:
            for _stmt, result in session.execute(args.eval_stmt):
                if result is not None:
                    print(format_value(session.db, result))
        except NeuroDbError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = 1
    if code == 0 and not args.script and not args.eval_stmt:
        code = repl(session)
    if code == 0 and args.db:
        try:
            save_snapshot(session.db, args.db)
        except NeuroDbError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = 1
    return code


if __name__ == "__main__":
    sys.exit(main())
