"""Run the acceptance suite and write a manifest with the measured numbers."""

import argparse
import json
import sys
from pathlib import Path

from surfspec import acceptance, reports
from surfspec.config import RunConfig, config_hash


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--suite", default="full", choices=sorted(acceptance.SUITES))
    p.add_argument("--out", default="out/acceptance")
    args = p.parse_args(argv)
    manifest = acceptance.run_suite(args.suite, echo=print)
    path = Path(args.out) / "manifest.json"
    reports.write_json(path, {"suite": args.suite, "checks": manifest}, config_hash(RunConfig(suite=args.suite)))
    print(f"manifest: {path}")
    failed = [k for k, v in manifest.items() if not v["passed"]]
    if failed:
        print("failing: " + ", ".join(failed))
    return 0 if not failed else 1


if __name__ == "__main__":
    sys.exit(main())
