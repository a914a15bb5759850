#!/usr/bin/env python3
"""Run every experiment with its documented defaults and summarize.

Writes one report per experiment into --out-dir (CSV rows plus a JSON
metadata sidecar, or single JSON documents with --format json) and exits
nonzero if any experiment's verdict is fail.  Pass --config to apply one
INI file to every run; per-experiment sections inside it still apply
only to their own experiment.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from bmklab.cli import EXPERIMENTS, main as run_cli


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reports")
    parser.add_argument("--config", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--only", nargs="*", choices=sorted(EXPERIMENTS),
                        help="run just these experiments")
    args = parser.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    names = args.only or sorted(EXPERIMENTS)
    failures = []
    for name in names:
        out = os.path.join(args.out_dir, name.replace("-", "_"))
        argv_one = [name, "--out", out, "--format", args.format]
        if args.config:
            argv_one += ["--config", args.config]
        print(f"== {name} ==")
        rc = run_cli(argv_one)
        if rc != 0:
            failures.append(name)
        print()
    if failures:
        print(f"failed: {', '.join(failures)}")
        return 1
    print(f"all {len(names)} experiments passed; reports in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
