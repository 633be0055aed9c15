#!/usr/bin/env python3
"""Download the PhysioNet records used by the data-gated tests.

Usage:
    python3 scripts/fetch_physionet.py [--dest data/physionet]

Fetches the MIT-BIH Arrhythmia Database records 100, 103 and 119 plus
the Noise Stress Test records 118e06, 118e00, 118e_6 and 119e_6
(header, signal and reference-annotation files). Needs outbound HTTPS;
roughly 10 MB in total. The test suite looks for the files under
``data/physionet/`` or ``$BEATCLEAN_DATA``.
"""

import argparse
import os
import sys
import urllib.request

BASE = "https://physionet.org/files"

SOURCES = {
    "mitdb": ("mitdb/1.0.0", ["100", "103", "119"]),
    "nstdb": ("nstdb/1.0.0", ["118e06", "118e00", "118e_6", "119e_6"]),
}

EXTENSIONS = [".hea", ".dat", ".atr"]


def fetch(url: str, dest: str) -> bool:
    try:
        with urllib.request.urlopen(url, timeout=60) as response:
            payload = response.read()
    except Exception as exc:  # noqa: BLE001 - report and continue
        print(f"  failed: {url}: {exc}", file=sys.stderr)
        return False
    with open(dest, "wb") as fh:
        fh.write(payload)
    print(f"  {dest} ({len(payload)} bytes)")
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", default="data/physionet")
    args = parser.parse_args()

    failures = 0
    for db, (remote, records) in SOURCES.items():
        out_dir = os.path.join(args.dest, db)
        os.makedirs(out_dir, exist_ok=True)
        for record in records:
            print(f"{db}/{record}:")
            for ext in EXTENSIONS:
                dest = os.path.join(out_dir, record + ext)
                if os.path.exists(dest):
                    print(f"  {dest} already present")
                    continue
                if not fetch(f"{BASE}/{remote}/{record}{ext}", dest):
                    failures += 1
    if failures:
        print(f"{failures} downloads failed", file=sys.stderr)
        return 1
    print("done; run `pytest tests/test_acceptance.py -v -s` to score")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
