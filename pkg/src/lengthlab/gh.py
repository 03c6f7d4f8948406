"""Gromov-Hausdorff distances between small finite metric spaces.

The distance is computed as half the least distortion of a correspondence.
Every result carries the witnessing correspondence so a reported upper bound
can always be re-checked with :func:`distortion`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import kernels
from .spaces import FiniteMetricSpace, ModelError, rational_str

EXACT_CAP = 64
_CHUNK = 512


class CorrespondenceError(ModelError):
    pass


class CapExceeded(ModelError):
    pass


@dataclass(frozen=True)
class Correspondence:
    """A relation between point ids of X and Y that covers both sides."""

    pairs: tuple
    distortion: Fraction

    def to_json(self) -> dict:
        return {
            "pairs": [[str(x), str(y)] for x, y in self.pairs],
            "distortion": rational_str(self.distortion),
        }


@dataclass(frozen=True)
class GHResult:
    lower: Fraction
    upper: Fraction
    witness: Correspondence
    exact: bool

    def to_json(self) -> dict:
        return {
            "lower": rational_str(self.lower),
            "upper": rational_str(self.upper),
            "exact": self.exact,
            "witness": self.witness.to_json(),
        }


def _common(X: FiniteMetricSpace, Y: FiniteMetricSpace):
    L = math.lcm(X.denom, Y.denom)
    return X.rescaled(L), Y.rescaled(L), L


def _index_pairs(pairs, X, Y):
    ix = np.array([X.index(x) for x, _ in pairs], dtype=np.int64)
    iy = np.array([Y.index(y) for _, y in pairs], dtype=np.int64)
    if set(ix.tolist()) != set(range(len(X))) or set(iy.tolist()) != set(range(len(Y))):
        raise CorrespondenceError("not a correspondence: relation is not total on both sides")
    return ix, iy


def _distortion_numer(dx, dy, ix, iy) -> int:
    worst = 0
    for s in range(0, len(ix), _CHUNK):
        a = dx[np.ix_(ix[s : s + _CHUNK], ix)]
        b = dy[np.ix_(iy[s : s + _CHUNK], iy)]
        worst = max(worst, int(np.abs(a - b).max()))
    return worst


def distortion(pairs: Iterable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Fraction:
    """Largest metric deviation over all pairs of related pairs."""
    if isinstance(pairs, Correspondence):
        pairs = pairs.pairs
    pairs = list(pairs)
    ix, iy = _index_pairs(pairs, X, Y)
    dx, dy, L = _common(X, Y)
    return Fraction(_distortion_numer(dx, dy, ix, iy), L)


def make_correspondence(pairs: Iterable, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Correspondence:
    pairs = tuple(dict.fromkeys((x, y) for x, y in pairs))
    return Correspondence(pairs, distortion(pairs, X, Y))


def _ecc(d: np.ndarray) -> np.ndarray:
    return d.max(axis=1)


def invariant_lower_bound(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Fraction:
    """Half the Hausdorff distance between eccentricity value sets.

    Related points have eccentricities within the distortion of each other,
    so this dominates the diameter bound.
    """
    dx, dy, L = _common(X, Y)
    ex = np.unique(_ecc(dx))
    ey = np.unique(_ecc(dy))
    diff = np.abs(ex[:, None] - ey[None, :])
    h = max(int(diff.min(axis=1).max()), int(diff.min(axis=0).max()))
    return Fraction(h, 2 * L)


def _greedy_pairs(dx, dy, fixed=None) -> list[tuple[int, int]]:
    ex, ey = _ecc(dx), _ecc(dy)
    pairs = [] if fixed is None else [fixed]
    for i in range(len(ex)):
        pairs.append((i, int(np.argmin(np.abs(ey - ex[i])))))
    for j in range(len(ey)):
        pairs.append((int(np.argmin(np.abs(ex - ey[j]))), j))
    return list(dict.fromkeys(pairs))


def _farthest_points(d, k: int, start: int = 0) -> list[int]:
    pts = [start]
    near = d[start].copy()
    while len(pts) < min(k, len(d)):
        nxt = int(np.argmax(near))
        if near[nxt] == 0:
            break
        pts.append(nxt)
        near = np.minimum(near, d[nxt])
    return pts


def _anchor_pairs(dx, dy, k: int = 3, tries: int = 8) -> list[list[tuple[int, int]]]:
    """Seeds from matching distance profiles to a few anchors.

    Anchors of X are chosen by farthest-point sampling; for each trial image
    of the first anchor the others are matched by their mutual distances,
    then every point goes to the point of the other space with the closest
    anchor profile. Useful where eccentricities carry no information
    (homogeneous spaces such as cycles).
    """
    ax = _farthest_points(dx, k)
    out = []
    for b0 in _farthest_points(dy, tries):
        bs = [b0]
        for a in ax[1:]:
            cost = sum(np.abs(dy[b] - dx[a0, a]) for a0, b in zip(ax, bs))
            bs.append(int(np.argmin(cost)))
        px, py = dx[ax].T, dy[bs].T  # profiles, one row per point
        f = [int(np.argmin(np.abs(py - row).sum(axis=1))) for row in px]
        g = [int(np.argmin(np.abs(px - row).sum(axis=1))) for row in py]
        pairs = [(i, j) for i, j in enumerate(f)] + [(i, j) for j, i in enumerate(g)]
        out.append(list(dict.fromkeys(pairs)))
    return out


def _local_search(dx, dy, f, g, fixed, rounds):
    """Coordinate descent over the maps ``f: X -> Y`` and ``g: Y -> X``."""
    n, m = len(f), len(g)

    def cost(f, g):
        ix = np.concatenate([np.arange(n), g])
        iy = np.concatenate([f, np.arange(m)])
        if fixed is not None:
            ix = np.append(ix, fixed[0])
            iy = np.append(iy, fixed[1])
        return _distortion_numer(dx, dy, ix, iy)

    best = cost(f, g)
    for _ in range(rounds):
        improved = False
        for i in range(n):
            for j in range(m):
                if j == f[i]:
                    continue
                f2 = f.copy()
                f2[i] = j
                c = cost(f2, g)
                if c < best:
                    best, f, improved = c, f2, True
        for j in range(m):
            for i in range(n):
                if i == g[j]:
                    continue
                g2 = g.copy()
                g2[j] = i
                c = cost(f, g2)
                if c < best:
                    best, g, improved = c, g2, True
        if not improved:
            break
    return best, f, g


def _order(X: FiniteMetricSpace, Y: FiniteMetricSpace, dx, dy):
    items = [(-int(e), str(X.points[i]), 0, i) for i, e in enumerate(_ecc(dx))]
    items += [(-int(e), str(Y.points[j]), 1, j) for j, e in enumerate(_ecc(dy))]
    items.sort()
    return [(side, i) for _, _, side, i in items]


def _exact(X, Y, fixed, cap) -> GHResult:
    if len(X) * len(Y) > cap:
        raise CapExceeded(
            f"|X|*|Y| = {len(X) * len(Y)} exceeds the exact cap {cap}; use gh_bounds"
        )
    dx, dy, L = _common(X, Y)
    seed = _greedy_pairs(dx, dy, fixed)
    ix = np.array([p[0] for p in seed])
    iy = np.array([p[1] for p in seed])
    incumbent = _distortion_numer(dx, dy, ix, iy)
    order = _order(X, Y, dx, dy)
    seeds = [] if fixed is None else [fixed]
    best, pairs = kernels.gh_search(dx.tolist() if kernels.BACKEND == "python" else dx,
                                    dy.tolist() if kernels.BACKEND == "python" else dy,
                                    order, incumbent, seeds)
    if pairs is None:
        best, pairs = incumbent, seed
    pairs = sorted(set(pairs))
    witness = Correspondence(
        tuple((X.points[a], Y.points[b]) for a, b in pairs), Fraction(best, L)
    )
    value = Fraction(best, 2 * L)
    return GHResult(value, value, witness, True)


def gh_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace, cap: int = EXACT_CAP) -> GHResult:
    """Exact distance by branch and bound over minimal correspondences."""
    return _exact(X, Y, None, cap)


def pointed_gh_exact(Xp: tuple, Yp: tuple, cap: int = EXACT_CAP) -> GHResult:
    """Exact pointed distance: every correspondence must relate the basepoints."""
    (X, x), (Y, y) = Xp, Yp
    return _exact(X, Y, (X.index(x), Y.index(y)), cap)


def gh_bounds(X: FiniteMetricSpace, Y: FiniteMetricSpace, heuristics: dict | None = None) -> GHResult:
    """Certified bracket ``lower <= d_GH <= upper`` for spaces of any size.

    ``heuristics`` keys: ``seeds`` (list of pair lists in point ids, tried as
    upper-bound witnesses), ``local_search`` (default: only when
    ``|X|*|Y| <= local_search_limit``), ``local_search_limit`` (default
    4096), ``rounds`` (default 20), ``anchors`` (anchor-profile seeds;
    default on unless ``seeds`` are given).
    """
    h = dict(heuristics or {})
    dx, dy, L = _common(X, Y)
    lower = invariant_lower_bound(X, Y)
    candidates = [_greedy_pairs(dx, dy)]
    if h.get("anchors", not h.get("seeds")):
        candidates += _anchor_pairs(dx, dy)
    for seed in h.get("seeds", []):
        if isinstance(seed, Correspondence):
            seed = seed.pairs
        candidates.append([(X.index(a), Y.index(b)) for a, b in seed])
    best = None
    for pairs in candidates:
        ix, iy = _index_pairs([(X.points[a], Y.points[b]) for a, b in pairs], X, Y)
        c = _distortion_numer(dx, dy, ix, iy)
        if best is None or c < best[0]:
            best = (c, pairs)
    limit = h.get("local_search_limit", 4096)
    if h.get("local_search", len(X) * len(Y) <= limit):
        c0, pairs = best
        f = np.zeros(len(X), dtype=np.int64)
        g = np.zeros(len(Y), dtype=np.int64)
        # Minimal sub-relation of the incumbent: one partner per point.
        fm: dict = {}
        gm: dict = {}
        for a, b in pairs:
            fm.setdefault(a, b)
            gm.setdefault(b, a)
        f[:] = [fm[i] for i in range(len(X))]
        g[:] = [gm[j] for j in range(len(Y))]
        c, f, g = _local_search(dx, dy, f, g, None, h.get("rounds", 20))
        if c <= c0:
            pairs = [(i, int(f[i])) for i in range(len(X))] + [(int(g[j]), j) for j in range(len(Y))]
            best = (c, list(dict.fromkeys(pairs)))
    c, pairs = best
    witness = Correspondence(
        tuple((X.points[a], Y.points[b]) for a, b in sorted(set(pairs))), Fraction(c, L)
    )
    upper = Fraction(c, 2 * L)
    return GHResult(lower, upper, witness, lower == upper)
