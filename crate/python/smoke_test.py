"""Smoke test for the Python bindings.

Build first with `cargo build -p ca-consensus-py` (add `--release` and set
CA_CONSENSUS_PROFILE=release for an optimized library), then run
`python3 python/smoke_test.py`.
"""

import importlib.util
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    profile = os.environ.get("CA_CONSENSUS_PROFILE", "debug")
    built = ROOT / "target" / profile / "libca_consensus_py.so"
    if not built.exists():
        sys.exit(f"{built} not found; run `cargo build -p ca-consensus-py` first")
    tmp = pathlib.Path(tempfile.mkdtemp())
    target = tmp / "ca_consensus_py.so"
    shutil.copy(built, target)
    spec = importlib.util.spec_from_file_location("ca_consensus_py", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    ca = load()

    majority = ca.Rule("e232")
    assert majority.number == 232
    assert majority.table == [0, 0, 0, 1, 0, 1, 1, 1]
    assert majority.apply([1, 0, 1]) == 1

    gkl = ca.Rule("gkl")
    assert gkl.offsets == [-3, -1, 0, 1, 3]
    rows = gkl.evolve(ca.random_config(49, 0.7, 1), 60)
    assert len(rows) == 61 and rows[-1] == "1" * 49

    counts = ca.classify(gkl, 5)
    assert counts["wrong"] == 0 and counts["stuck"] == 0 and counts["correct"] == 32
    assert ca.classify(gkl, 11)["wrong"] == 22

    diagram = ca.phase(gkl, 59, 120, [0.0, 1.0], [0.0], 4)
    assert diagram == [[0.0], [1.0]]

    exact, agree = ca.score(gkl, "sync", 79, 160, 20, seed=3)
    assert 0.0 <= exact <= agree <= 1.0

    curve = ca.async_curve(ca.Rule("r2:4272826020"), 60, 60, [0.3, 0.7], 10)
    assert curve[0][1] < 0.5 < curve[1][1]

    assert ca.sort_terminals("1010") == ["0011"]
    assert ca.graph_success("regular", 30, 0.7, 60, seed=2) > ca.graph_success("ring", 30, 0.7, 60, seed=2)
    assert ca.attack(gkl, "1101011010110001011101110001000101001111111101111") == [3, 11]

    try:
        ca.Rule("e256")
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range rule accepted")
    try:
        ca.classify(gkl, 30)
    except MemoryError:
        pass
    else:
        raise AssertionError("oversized transition graph accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
