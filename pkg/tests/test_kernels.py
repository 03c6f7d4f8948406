import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lengthlab import _kernels_py as pure
from lengthlab import kernels

compiled = pytest.importorskip("lengthlab._kernels")


def weights(n, rng):
    w = np.full((n, n), pure.INF, dtype=np.int64)
    np.fill_diagonal(w, 0)
    for i in range(1, n):
        j = int(rng.integers(i))
        w[i, j] = w[j, i] = int(rng.integers(1, 30))
    return w


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10**6))
def test_floyd_warshall_agree(n, seed):
    w = weights(n, np.random.default_rng(seed))
    a = np.array(pure.floyd_warshall(w.tolist()))
    b = np.asarray(compiled.floyd_warshall(w))
    assert np.array_equal(a, b)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10**6), st.booleans())
def test_gh_search_agree(n, m, seed, pointed):
    rng = np.random.default_rng(seed)
    dx = np.array(pure.floyd_warshall(weights(n, rng).tolist()), dtype=np.int64)
    dy = np.array(pure.floyd_warshall(weights(m, rng).tolist()), dtype=np.int64)
    order = [(0, i) for i in range(n)] + [(1, j) for j in range(m)]
    seeds = [(0, 0)] if pointed else []
    inc = int(max(dx.max(), dy.max())) + 1
    a = pure.gh_search(dx.tolist(), dy.tolist(), order, inc, seeds)
    b = compiled.gh_search(dx, dy, order, inc, seeds)
    assert a[0] == b[0]


def test_backend_selection():
    assert kernels.BACKEND == "compiled"
    env = dict(os.environ, LENGTHLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import lengthlab.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_pure_backend_end_to_end():
    code = (
        "from lengthlab.lab.corpus import gen_torus\n"
        "from lengthlab.spaces import build_metric\n"
        "from lengthlab.gh import gh_exact\n"
        "from lengthlab.spaces import FiniteMetricSpace as F\n"
        "X = build_metric(gen_torus(2, 2, '1/2').graph)\n"
        "print(X.dist('t0_0', 't2_2'))\n"
        "print(gh_exact(F.from_fractions('ab', [[0, 2], [2, 0]]), F.from_fractions('cd', [[0, 5], [5, 0]])).upper)\n"
    )
    env = dict(os.environ, LENGTHLAB_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["2", "3/2"]
