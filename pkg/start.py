#!/usr/bin/env python3
"""
Startup script for Flagwave Experiments
=======================================

Convenience launcher: runs one suite, or every suite in order, against an
experiment file and writes each suite's artifacts under its own directory.

    python start.py                      # all suites, configs/default.ini, out/
    python start.py moments --out runs   # one suite

Author: Yourl.Cloud Inc.
"""

import argparse
import os
import sys

from flagwave.cli import EXIT_PASS, SUITE_NAMES, main as run_suite


def main():
    parser = argparse.ArgumentParser(description="Run flagwave suites")
    parser.add_argument("suites", nargs="*", help=f"Suites to run, from {', '.join(SUITE_NAMES)} (all when omitted)")
    parser.add_argument("--config", "-c", default=os.path.join("configs", "default.ini"))
    parser.add_argument("--out", "-o", default="out")
    parser.add_argument("--seed", type=int)
    args = parser.parse_args()

    suites = args.suites or list(SUITE_NAMES)
    unknown = [s for s in suites if s not in SUITE_NAMES]
    if unknown:
        parser.error(f"unknown suite(s): {', '.join(unknown)}")
    print("🚀 Flagwave suite launcher")
    print(f"📍 Config: {args.config}")
    print("=" * 50)

    failures = []
    for suite in suites:
        argv = [suite, "--config", args.config, "--out", os.path.join(args.out, suite)]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        code = run_suite(argv)
        if code != EXIT_PASS:
            failures.append((suite, code))

    print("=" * 50)
    if failures:
        for suite, code in failures:
            print(f"❌ {suite} exited with status {code}")
        sys.exit(max(code for _, code in failures))
    print(f"✅ All {len(suites)} suite(s) passed")


if __name__ == "__main__":
    main()
