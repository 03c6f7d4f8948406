"""Pure-Python reference versions of the compiled kernels.

Both versions operate on integer-scaled distances so that every comparison
is exact. The compiled module in ``_kernels.pyx`` must return identical
results; ``lengthlab.kernels`` picks one at import time.
"""

INF = (1 << 62)


def floyd_warshall(w):
    """All-pairs shortest paths on a dense integer weight matrix.

    ``w`` is a square sequence of sequences; missing edges hold ``INF``.
    A new list-of-lists is returned.
    """
    n = len(w)
    d = [list(map(int, row)) for row in w]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik >= INF:
                continue
            di = d[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    return d


def gh_search(dx, dy, order, best, seed_pairs):
    """Branch and bound over minimal correspondences.

    ``order`` lists ``(side, index)`` with side 0 for X and 1 for Y.
    ``seed_pairs`` are pairs forced into every relation (pointed search).
    ``best`` is an incumbent distortion; only strictly better relations
    replace it. Returns ``(best, pairs)`` where ``pairs`` is ``None`` when
    nothing beat the incumbent.
    """
    n, m = len(dx), len(dy)
    ex = [max(row) if row else 0 for row in dx]
    ey = [max(row) if row else 0 for row in dy]
    cov_x = [0] * n
    cov_y = [0] * m
    pairs = []
    for x, y in seed_pairs:
        pairs.append((x, y))
        cov_x[x] += 1
        cov_y[y] += 1
    cur0 = 0
    for a in range(len(pairs)):
        xa, ya = pairs[a]
        for b in range(a):
            xb, yb = pairs[b]
            cur0 = max(cur0, abs(dx[xa][xb] - dy[ya][yb]))
    state = {"best": best, "pairs": None}

    def added(x, y, cur, bound):
        worst = cur
        for xp, yp in pairs:
            v = dx[x][xp] - dy[y][yp]
            if v < 0:
                v = -v
            if v > worst:
                worst = v
                if worst >= bound:
                    return worst
        return worst

    def rec(k, cur):
        while k < len(order):
            side, i = order[k]
            if (cov_x[i] if side == 0 else cov_y[i]) == 0:
                break
            k += 1
        if k == len(order):
            state["best"] = cur
            state["pairs"] = list(pairs)
            return
        side, i = order[k]
        if side == 0:
            for j in range(m):
                diff = abs(ex[i] - ey[j])
                if diff >= state["best"]:
                    continue
                new = added(i, j, max(cur, diff), state["best"])
                if new < state["best"]:
                    pairs.append((i, j))
                    cov_x[i] += 1
                    cov_y[j] += 1
                    rec(k + 1, new)
                    pairs.pop()
                    cov_x[i] -= 1
                    cov_y[j] -= 1
        else:
            for j in range(n):
                diff = abs(ex[j] - ey[i])
                if diff >= state["best"]:
                    continue
                new = added(j, i, max(cur, diff), state["best"])
                if new < state["best"]:
                    pairs.append((j, i))
                    cov_x[j] += 1
                    cov_y[i] += 1
                    rec(k + 1, new)
                    pairs.pop()
                    cov_x[j] -= 1
                    cov_y[i] -= 1

    if cur0 < state["best"]:
        rec(0, cur0)
    return state["best"], state["pairs"]
