"""Builds the extension module, imports it and runs it on the bundled scenarios.

    python3 python/smoke_test.py

Set PYDYNEQ_SO to an already built library to skip the cargo build.
"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build():
    so = os.environ.get("PYDYNEQ_SO")
    if so:
        return Path(so)
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pydyneq", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    for name in ("libpydyneq.so", "libpydyneq.dylib", "pydyneq.dll"):
        path = target / "release" / name
        if path.exists():
            return path
    sys.exit("built library not found")


def labels_at(fn, x):
    """Evaluates a serialized piecewise-linear function at `x`."""
    pts = [(Fraction(a), Fraction(b)) for a, b in fn["points"]]
    if x <= pts[0][0]:
        return pts[0][1] + Fraction(fn["slope_before"]) * (x - pts[0][0])
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x <= x1:
            return y0 + (y1 - y0) / (x1 - x0) * (x - x0)
    return pts[-1][1] + Fraction(fn["slope_after"]) * (x - pts[-1][0])


def main():
    lib = build()
    tmp = tempfile.mkdtemp()
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy(lib, Path(tmp) / ("pydyneq" + suffix))
    sys.path.insert(0, tmp)
    import pydyneq

    scenario = (ROOT / "scenarios" / "example.json").read_text()
    traj = json.loads(pydyneq.solve(scenario))
    assert labels_at(traj["labels"]["r"], Fraction(1)) == 3
    assert json.loads(pydyneq.verify(json.dumps(traj))) == []

    loading = json.loads(pydyneq.load(scenario))
    assert json.loads(pydyneq.verify(json.dumps(loading))) == []

    traj["queues"]["a"]["points"][1][1] = "2"
    assert json.loads(pydyneq.verify(json.dumps(traj), cross=False)) != []

    sol = json.loads(pydyneq.ntf((ROOT / "scenarios" / "parallel-ntf.json").read_text()))
    assert sol["labels"]["t"] == "1"
    assert sol["flow"] == {"e1": "1", "e2": "2"}

    try:
        pydyneq.solve(scenario, horizon="1/0")
    except ValueError as e:
        assert "horizon" in str(e)
    else:
        raise AssertionError("bad horizon accepted")

    print("ok")


if __name__ == "__main__":
    main()
