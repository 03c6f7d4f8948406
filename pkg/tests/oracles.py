"""Independent oracles used by the test-suite only."""

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np


def _common(X, Y):
    L = math.lcm(X.denom, Y.denom)
    return X.rescaled(L), Y.rescaled(L), L


def exhaustive_gh(X, Y, fixed=None):
    """Brute force over all map pairs ``f: X -> Y``, ``g: Y -> X``.

    Every correspondence contains ``graph(f) U graph(g)^T`` for some such
    pair and distortion is monotone under inclusion, so the minimum over
    map pairs is the minimum over correspondences. Vectorised over ``g``;
    intended for spaces of at most five points.
    """
    dx, dy, L = _common(X, Y)
    n, m = len(X), len(Y)
    gs = np.array(list(itertools.product(range(n), repeat=m)), dtype=np.int64)  # (G, m)
    yy = np.arange(m)
    # distortion among g-pairs: |dx[g_a, g_b] - dy[a, b]|
    dis_g = np.zeros(len(gs), dtype=np.int64)
    for a in range(m):
        for b in range(a + 1, m):
            dis_g = np.maximum(dis_g, np.abs(dx[gs[:, a], gs[:, b]] - dy[a, b]))
    if fixed is not None:
        fx, fy = fixed
        for a in range(m):
            dis_g = np.maximum(dis_g, np.abs(dx[gs[:, a], fx] - dy[a, fy]))
    best = None
    for f in itertools.product(range(m), repeat=n):
        f = np.array(f, dtype=np.int64)
        xs = list(range(n))
        ys = list(f)
        if fixed is not None:
            xs.append(fixed[0])
            ys.append(fixed[1])
        xs_a = np.array(xs)
        ys_a = np.array(ys)
        dis_f = int(np.abs(dx[np.ix_(xs_a, xs_a)] - dy[np.ix_(ys_a, ys_a)]).max())
        # cross[y, x'] = max over f-pairs (x, f(x)) of |dx[x, x'] - dy[f(x), y]|
        cross = np.abs(dx[xs_a][:, None, :] - dy[ys_a][:, :, None]).max(axis=0)  # (m, n)
        cross_g = cross[yy[None, :], gs].max(axis=1)
        total = np.maximum(np.maximum(dis_g, cross_g), dis_f).min()
        best = int(total) if best is None else min(best, int(total))
    return Fraction(best, 2 * L)


def dijkstra_fractions(g, source):
    """Single-source distances with Fraction arithmetic and a binary heap."""
    dist = {source: Fraction(0)}
    heap = [(Fraction(0), source)]
    done = set()
    while heap:
        d, i = heapq.heappop(heap)
        if i in done:
            continue
        done.add(i)
        for k, _, j in g.incidence(i):
            nd = d + g.length(k)
            if j not in dist or nd < dist[j]:
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    return dist


def random_metric_space(n, rng, denoms=(1, 2, 3)):
    """Random finite metric: shortest paths of a random complete weighted graph.

    Weights are small rationals; the closure is computed with Fractions, so
    the result never touches the library's kernels.
    """
    from lengthlab.spaces import FiniteMetricSpace

    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w[i][j] = w[j][i] = Fraction(int(rng.integers(1, 10)), int(rng.choice(denoms)))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if w[i][k] + w[k][j] < w[i][j]:
                    w[i][j] = w[i][k] + w[k][j]
    return FiniteMetricSpace.from_fractions([f"p{i}" for i in range(n)], w)


def full_ball_trivial(g, loop, delta):
    """Is the loop inside one open delta-ball centred at a vertex?

    Pointwise along edges: an edge of length L between u and v lies in the
    open ball at c iff d(c,u) + d(c,v) + L < 2*delta. (A constant loop is
    inside the ball at its own vertex.)
    """
    delta = Fraction(delta)
    for c in range(g.n):
        d = dijkstra_fractions(g, c)
        if not loop.steps:
            return True
        if all(d[a] + d[b] + g.length(k) < 2 * delta for a, b, k in
               ((*g.endpoints(k), k) for k, _ in loop.steps)):
            return True
    return False
