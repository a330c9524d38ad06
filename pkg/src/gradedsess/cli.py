"""Command-line entry point: ``gradedsess check FILE`` and ``gradedsess run FILE``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .interpreter import CBN, CBV, EvalError, run_program
from .runtime.scheduler import DEFAULT_FUEL, DeadlockError, FuelExhausted, RuntimeFault
from .syntax import SyntaxError_, parse_program
from .typechecker import TypeCheckFailure, check_program

EXIT_OK, EXIT_TYPE, EXIT_INPUT, EXIT_DEADLOCK, EXIT_FUEL, EXIT_INTERNAL = 0, 1, 2, 3, 4, 5


@dataclass
class RunConfig:
    mode: str = CBV
    unsafe_promotion: bool = False
    trace: bool = False
    fuel: int = DEFAULT_FUEL
    entry: str = "main"

    def __post_init__(self):
        if self.mode == CBN:
            self.unsafe_promotion = True
        if self.fuel <= 0:
            raise ValueError("fuel must be positive")


def _load(path: str, err):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        print(f"{path}: cannot read file: {e}", file=err)
        return None
    try:
        return parse_program(text)
    except SyntaxError_ as e:
        print(f"{path}:{e.line}:{e.col}: syntax: {e.message}", file=err)
        return None


def _typecheck(path, program, unsafe, err):
    try:
        return check_program(program, unsafe_promotion=unsafe)
    except TypeCheckFailure as failure:
        for e in failure.errors:
            line, col = e.pos or (1, 1)
            print(f"{path}:{line}:{col}: {e.rule}: {e.message}", file=err)
        return None


def cmd_check(path: str, unsafe_promotion: bool = False, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    program = _load(path, err)
    if program is None:
        return EXIT_INPUT
    if _typecheck(path, program, unsafe_promotion, err) is None:
        return EXIT_TYPE
    print(f"{path}: ok", file=out)
    return EXIT_OK


def cmd_run(path: str, cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    program = _load(path, err)
    if program is None:
        return EXIT_INPUT
    typed = _typecheck(path, program, cfg.unsafe_promotion, err)
    if typed is None:
        return EXIT_TYPE
    if program.lookup(cfg.entry) is None:
        print(f"{path}: no definition named {cfg.entry!r}", file=err)
        return EXIT_INPUT
    try:
        result = run_program(
            program, entry=cfg.entry, mode=cfg.mode, fuel=cfg.fuel, trace=cfg.trace,
            strict=not cfg.unsafe_promotion, grades=typed.grades)
    except DeadlockError as e:
        print(str(e), file=out)
        return EXIT_DEADLOCK
    except FuelExhausted as e:
        print(str(e), file=err)
        return EXIT_FUEL
    except (EvalError, RuntimeFault) as e:
        print(f"internal error: {e}", file=err)
        return EXIT_INTERNAL
    if cfg.trace:
        for line in result.trace:
            print(line, file=err)
    print(result.output, file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gradedsess", description="Typecheck and run graded session-typed programs.")
    sub = ap.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="typecheck a program")
    chk.add_argument("file")
    chk.add_argument("--unsafe-promotion", action="store_true", help="disable the promotion guard")
    run = sub.add_parser("run", help="typecheck and execute a program")
    run.add_argument("file")
    run.add_argument("--mode", choices=[CBV, CBN], default=CBV)
    run.add_argument("--unsafe-promotion", action="store_true", help="disable the promotion guard")
    run.add_argument("--trace", action="store_true", help="print scheduler events to stderr")
    run.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="maximum scheduler steps")
    run.add_argument("--entry", default="main", help="definition to evaluate")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    if args.command == "check":
        return cmd_check(args.file, args.unsafe_promotion)
    if args.fuel <= 0:
        print("gradedsess: --fuel must be positive", file=sys.stderr)
        return EXIT_INPUT
    cfg = RunConfig(args.mode, args.unsafe_promotion, args.trace, args.fuel, args.entry)
    return cmd_run(args.file, cfg)


if __name__ == "__main__":
    sys.exit(main())
