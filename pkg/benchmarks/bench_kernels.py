"""Compiled vs pure-Python kernels: timings and agreement.

    python benchmarks/bench_kernels.py [--repeat 3]

Floyd-Warshall runs on random sparse integer graphs; the branch-and-bound
GH search runs on random small integer metrics. Each row reports both
timings, the speed-up, and whether the outputs are identical.
"""

import argparse
import time

import numpy as np

from lengthlab import _kernels_py as pure

try:
    from lengthlab import _kernels as compiled
except ImportError:  # pragma: no cover
    compiled = None


def random_weights(n, rng, p=0.1):
    w = np.full((n, n), pure.INF, dtype=np.int64)
    np.fill_diagonal(w, 0)
    for i in range(1, n):  # spanning path keeps it connected
        j = int(rng.integers(i))
        w[i, j] = w[j, i] = int(rng.integers(1, 20))
    mask = np.triu(rng.random((n, n)) < p, 1)
    vals = rng.integers(1, 20, (n, n))
    w[mask] = np.minimum(w[mask], vals[mask])
    w.T[mask] = w[mask]
    return w


def random_metric(n, rng):
    return np.array(pure.floyd_warshall(random_weights(n, rng, 0.5)), dtype=np.int64)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def order_of(dx, dy):
    items = [(-int(dx[i].max()), 0, i) for i in range(len(dx))]
    items += [(-int(dy[j].max()), 1, j) for j in range(len(dy))]
    return [(s, i) for _, s, i in sorted(items)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'size':>8}{'pure s':>12}{'compiled s':>12}{'speed-up':>10}  same")
    for n in (50, 100, 200):
        w = random_weights(n, rng)
        tp, a = best_of(lambda: pure.floyd_warshall(w.tolist()), args.repeat)
        tc, b = best_of(lambda: compiled.floyd_warshall(w), args.repeat)
        same = np.array_equal(np.array(a), np.asarray(b))
        print(f"{'floyd_warshall':<22}{n:>8}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {same}")
    for n, m in ((5, 5), (6, 6), (7, 6)):
        dx, dy = random_metric(n, rng), random_metric(m, rng)
        order = order_of(dx, dy)
        inc = int(max(dx.max(), dy.max())) + 1
        tp, a = best_of(lambda: pure.gh_search(dx.tolist(), dy.tolist(), order, inc, []), args.repeat)
        tc, b = best_of(lambda: compiled.gh_search(dx, dy, order, inc, []), args.repeat)
        same = a[0] == b[0]
        print(f"{'gh_search':<22}{f'{n}x{m}':>8}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {same}")


if __name__ == "__main__":
    main()
