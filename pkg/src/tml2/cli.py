"""Command-line entry point: check, sim, gen, and fmt subcommands.

Exit codes are part of the interface: 0 success, 1 parse/validation
errors, 2 usage errors, 3 simulation runtime errors, 4 I/O errors.
Diagnostics go to stderr; data (traces, formatted source, summaries) to
stdout or the requested file, never mixed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .codegen import CodegenError, generate, write_artifacts
from .interpreter import SimulationError, render_value, simulate, trace_to_jsonl
from .model import Model
from .parser import ParseError, parse
from .printer import pretty_print
from .validator import validate

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tml2", description="tml2 model compiler and simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and validate a model")
    p_check.add_argument("file")

    p_sim = sub.add_parser("sim", help="simulate a configuration deterministically")
    p_sim.add_argument("file")
    p_sim.add_argument("--config", required=True, help="configuration name")
    p_sim.add_argument(
        "--max-steps", required=True, type=_positive_int, help="global step budget"
    )
    p_sim.add_argument("--trace", help="write the JSON-lines trace here (default: stdout)")

    p_gen = sub.add_parser("gen", help="generate data-analytics scripts")
    p_gen.add_argument("file")
    p_gen.add_argument("--config", required=True, help="configuration name")
    p_gen.add_argument("--out", required=True, help="output directory")

    p_fmt = sub.add_parser("fmt", help="print the canonical formatting of a model")
    p_fmt.add_argument("file")
    return parser


def _load_model(path: str) -> Model:
    """Read + parse; raises OSError or ParseError."""
    with open(path, "r", encoding="utf-8") as fh:
        source = fh.read()
    return parse(source, path)


def _parse_and_validate(path: str) -> tuple[Model, int]:
    model = _load_model(path)
    report = validate(model)
    if report.diagnostics:
        print(report.render(), file=sys.stderr)
    return model, (EXIT_OK if report.ok else EXIT_DIAGNOSTICS)


def run(argv: list[str]) -> int:
    """Dispatch one invocation; never raises, always returns an exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:  # argparse exits 2 on usage errors, 0 on --help
        return int(e.code or 0)

    try:
        if args.command == "check":
            _, status = _parse_and_validate(args.file)
            return status

        if args.command == "fmt":
            model = _load_model(args.file)
            sys.stdout.write(pretty_print(model))
            return EXIT_OK

        if args.command == "sim":
            model, status = _parse_and_validate(args.file)
            if status != EXIT_OK:
                return status
            if model.configuration(args.config) is None:
                print(
                    f"{args.file}: error: configuration '{args.config}' not found",
                    file=sys.stderr,
                )
                return EXIT_DIAGNOSTICS
            base_dir = os.path.dirname(os.path.abspath(args.file))
            try:
                result = simulate(model, args.config, args.max_steps, base_dir=base_dir)
            except SimulationError as e:
                print(f"{args.file}: error{e}", file=sys.stderr)
                return EXIT_RUNTIME
            jsonl = trace_to_jsonl(result.trace)
            if args.trace:
                with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(jsonl)
            else:
                sys.stdout.write(jsonl)
            for snap in result.instances:
                props = "".join(
                    f" {name}={render_value(value)}"
                    for name, value in snap.properties.items()
                )
                print(
                    f"{snap.name}: state={snap.state or '-'} pending={snap.pending}{props}"
                )
            return EXIT_OK

        if args.command == "gen":
            model, status = _parse_and_validate(args.file)
            if status != EXIT_OK:
                return status
            if model.configuration(args.config) is None:
                print(
                    f"{args.file}: error: configuration '{args.config}' not found",
                    file=sys.stderr,
                )
                return EXIT_DIAGNOSTICS
            try:
                artifacts = generate(model, args.config)
            except CodegenError as e:
                print(f"{args.file}: error{e}", file=sys.stderr)
                return EXIT_DIAGNOSTICS
            try:
                write_artifacts(artifacts, args.out)
            except CodegenError as e:
                print(f"{args.file}: error{e}", file=sys.stderr)
                return EXIT_IO
            return EXIT_OK

        raise AssertionError(f"unhandled command {args.command!r}")
    except ParseError as e:
        for diag in e.diagnostics:
            print(diag.render(), file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
