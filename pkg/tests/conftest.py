import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

#: Directory holding PhysioNet records for the data-gated tests
#: (see scripts/fetch_physionet.py). Layout: <root>/mitdb/100.dat ...
DATA_ENV = "BEATCLEAN_DATA"


def physionet_root() -> str | None:
    candidates = [
        os.environ.get(DATA_ENV),
        os.path.join(os.path.dirname(__file__), "..", "data", "physionet"),
    ]
    for root in candidates:
        if root and os.path.isdir(root):
            return os.path.abspath(root)
    return None


def require_record(db: str, name: str) -> str:
    root = physionet_root()
    if root is None:
        pytest.skip(
            f"PhysioNet data not present; run scripts/fetch_physionet.py "
            f"(or set ${DATA_ENV}) to enable this test"
        )
    stem = os.path.join(root, db, name)
    if not os.path.exists(stem + ".dat"):
        pytest.skip(f"record {db}/{name} not downloaded")
    return stem
