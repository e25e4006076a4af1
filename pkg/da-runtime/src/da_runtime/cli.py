"""Integration runner CLI: train every generated script, compare its
decisions with the native engine, and emit one JSON report per entry."""

from __future__ import annotations

import argparse
import json
import sys

from .compare import agreement_report, compare_decisions
from .datasets import load_queries
from .manifest import ManifestError, load_manifest
from .native import native_predictions
from .runner import ScriptError, run_script


def run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="da-runtime",
        description="train generated analytics scripts and score their "
        "agreement with the native engine",
    )
    parser.add_argument("--gen-dir", required=True, help="directory with manifest.json")
    parser.add_argument("--dataset", required=True, help="training CSV")
    parser.add_argument("--queries", required=True, help="CSV of held-out feature rows")
    parser.add_argument("--out", help="write the JSON report here (default: stdout)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        entries = load_manifest(args.gen_dir)
        reports = []
        for entry in entries:
            queries = load_queries(args.queries, entry.features)
            script_preds = run_script(
                entry, args.dataset, queries, gen_dir=args.gen_dir
            )
            native_preds = native_predictions(entry, args.dataset, queries)
            agreement = compare_decisions(native_preds, script_preds)
            reports.append(agreement_report(entry, agreement, len(queries)))
    except (ManifestError, ScriptError, OSError, ValueError, RuntimeError) as e:
        print(f"da-runtime: error: {e}", file=sys.stderr)
        return 1

    text = json.dumps(reports, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
