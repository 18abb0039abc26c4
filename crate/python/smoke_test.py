"""Smoke test for the Python bindings.

Builds the extension with cargo, loads it from a temporary directory and
checks a handful of known values.

    python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    subprocess.run(["cargo", "build", "--release", "-q", "-p", "epsfree-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libepsfree.so"
    tmp = pathlib.Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "epsfree.so")
    sys.path.insert(0, str(tmp))
    import epsfree

    return epsfree


def main():
    epsfree = load()
    Graph = epsfree.Graph

    # one letter: Catalan moments, norm 2
    g = Graph(1, [])
    assert g.sum_moments(8) == [1, 0, 1, 0, 2, 0, 5, 0, 14], g.sum_moments(8)

    # K_{2,2}: m_4 = 2 d^2 + 2 |E|
    k22 = Graph.family("complete_multipartite", ["2", "2"])
    assert k22.d == 4 and len(k22.edges()) == 4
    assert k22.sum_moments(4)[4] == 2 * 16 + 2 * 4
    omega, witness = k22.clique()
    assert omega == 2 and len(witness) == 2

    b = k22.bounds()
    assert abs(b["upper_eigen"] - 4 * math.sqrt(3)) < 1e-10, b["upper_eigen"]
    assert abs(b["upper_regular"] - 4 * math.sqrt(2)) < 1e-10
    assert b["lower_clique"] <= b["upper_regular"]

    # letters 0 and 2 commute, 1 commutes with neither
    p = Graph(3, [(0, 2)])
    assert p.normal_form([2, 0, 1]) == [0, 2, 1]
    assert p.trace_counts(2) == [1, 3, 8]

    # free case: truncated norms climb towards 2 sqrt(d)
    free = Graph(2, [])
    n6 = free.truncated_norm(6)
    assert n6 < 2 * math.sqrt(2) and free.truncated_norm(8) >= n6

    # round trip through JSON
    assert Graph.from_json(k22.to_json()).edges() == k22.edges()

    # scalar coefficients a_i = 1 reduce to the scalar norm bound
    check = Graph(2, [(0, 1)]).khintchine([[[1.0]], [[1.0]]], depth=6)
    assert check["satisfied"], check

    # complex coefficients go through the dilation
    check = free.khintchine([[[0, 1j], [0, 0]], [[1, 0], [0, -1]]], depth=6)
    assert check["satisfied"] and check["dilated"], check

    report = Graph.family("cycle", ["5"]).certify()
    assert all(c["passed"] for c in report["checks"]), report

    for bad in (lambda: Graph(3, [(0, 0)]), lambda: Graph(2, [(0, 5)]), lambda: g.normal_form([3])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"epsfree {epsfree.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
