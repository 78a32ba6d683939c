"""Command line: run a script, check it against a golden file, or start a REPL."""
from __future__ import annotations

import argparse
import difflib
import sys
from pathlib import Path

from .errors import EngineError
from .notation import split_script
from .session import DEFAULT_POST_PROCESS, Session


def _session(args) -> Session:
    return Session(args.format, () if args.no_postprocess else DEFAULT_POST_PROCESS)


def _run_file(path, args) -> list:
    text = Path(path).read_text(encoding="utf-8")
    return _session(args).run_text(text)


def cmd_run(args) -> int:
    try:
        lines = _run_file(args.script, args)
    except EngineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    return 0


def cmd_check(args) -> int:
    script, golden = args.check
    try:
        got = _run_file(script, args)
    except EngineError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    want = Path(golden).read_text(encoding="utf-8").splitlines()
    if got == want:
        print(f"ok: {script} matches {golden}")
        return 0
    sys.stdout.writelines(difflib.unified_diff(
        [w + "\n" for w in want], [g + "\n" for g in got], golden, script))
    return 1


def cmd_repl(args) -> int:
    sess = _session(args)
    buf = []
    while True:
        try:
            line = input("... " if buf else "> ")
        except EOFError:
            print()
            return 0
        buf.append(line)
        text = "\n".join(buf)
        try:
            chunks = split_script(text)
        except EngineError:
            continue  # statement not finished yet
        buf = []
        for chunk, n in chunks:
            try:
                out = sess.run_text(chunk)
            except EngineError as err:
                print(f"error: {err}")
                continue
            for o in out:
                print(o)


def _common_flags(parser, defaults=True) -> None:
    # subcommands repeat the flags without defaults so that values given
    # before the subcommand name are not overwritten
    fmt = "plain" if defaults else argparse.SUPPRESS
    flag = False if defaults else argparse.SUPPRESS
    parser.add_argument("--format", choices=("latex", "plain"), default=fmt,
                        help="output notation (default: plain)")
    parser.add_argument("--no-postprocess", action="store_true", default=flag,
                        help="start with an empty post-process pipeline")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensorscript",
                                description="Tensor algebra scripts in TeX-like notation.")
    _common_flags(p)
    p.add_argument("--check", nargs=2, metavar=("SCRIPT", "GOLDEN"),
                   help="run SCRIPT and compare its output with GOLDEN")
    sub = p.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run a script file")
    _common_flags(run, defaults=False)
    run.add_argument("script")
    repl = sub.add_parser("repl", help="interactive session")
    _common_flags(repl, defaults=False)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.check:
        return cmd_check(args)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "repl":
        return cmd_repl(args)
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
