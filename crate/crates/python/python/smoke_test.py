"""Smoke test for the pmlab extension module.

Build and run from the workspace root:

    cargo build -p pmlab-python --features extension-module --release
    python3 crates/python/python/smoke_test.py target/release
"""

import importlib.util
import json
import math
import os
import shutil
import sys
import tempfile


def load(build_dir):
    src = os.path.join(build_dir, "libpmlab.so")
    tmp = tempfile.mkdtemp()
    dst = os.path.join(tmp, "pmlab.so")
    shutil.copy(src, dst)
    spec = importlib.util.spec_from_file_location("pmlab", dst)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def main():
    pm = load(sys.argv[1] if len(sys.argv) > 1 else "target/debug")

    assert pm.wrap([1.25, -0.25]) == [0.25, 0.75]
    assert abs(pm.torus_distance([0.05, 0.0], [0.95, 0.0]) - 0.1) < 1e-12

    a = [[2, 4], [6, 8]]
    u, d, v = pm.smith_normal_form(a)
    assert matmul(matmul(u, a), v) == d == [[2, 0], [0, 4]], (u, d, v)

    verdict = pm.decide_affine([[1, 0], [0, 1]], ["1/2", "1/3"])
    assert verdict["verdict"] == "NotMinimal" and verdict["verified"]
    verdict = pm.decide_affine([[1, 0], [0, 1]], ["@a", "@b"], [("a", "sqrt(2)"), ("b", "sqrt(3)")])
    assert verdict["verdict"] == "TotallyMinimal"

    rot = pm.System.translation(["1/3", "1/7"])
    assert rot.dim == 2 and rot.kind == "translation"
    x = rot.apply([0.0, 0.0])
    assert abs(x[0] - 1 / 3) < 1e-15 and abs(x[1] - 1 / 7) < 1e-15
    assert rot.classify([0.0, 0.0], 1000)["period"] == 21

    irr = pm.System.translation(["@a", "@b"], [("a", "sqrt(2)-1"), ("b", "sqrt(3)-1")])
    fraction, curve = irr.coverage([0.0, 0.0], 100_000, 32)
    assert fraction == 1.0 and curve[-1][1] == 1.0

    flow = pm.System.slowed(["1", "@t"], [[0.0, 0.0]], 0.1, "1/20", [("t", "sqrt(2)")])
    assert flow.apply([0.0, 0.0]) == [0.0, 0.0]
    moved = flow.apply([0.5, 0.5])
    assert abs(moved[0] - 0.55) < 1e-9 and abs(moved[1] - (0.5 + math.sqrt(2) / 20)) < 1e-9

    out = tempfile.mkdtemp()
    code, path = pm.run_experiment('[system]\nkind = "translation"\na = ["1/2", "1/3"]\n', "decide-affine", out)
    with open(path) as f:
        report = json.load(f)
    assert code == 0 and report["results"]["verdict"] == "not_minimal"

    try:
        pm.run_experiment("[analysis]\nsteps = 1000000000000\n", "coverage", out)
    except ValueError:
        pass
    else:
        raise AssertionError("step cap not enforced")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
