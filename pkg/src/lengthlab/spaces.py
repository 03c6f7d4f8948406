"""Finite models of compact length spaces.

A :class:`MetricGraph` carries exact rational edge lengths; its induced path
metric is a :class:`FiniteMetricSpace`. All distances are stored as integers
over one common denominator so comparisons never touch floating point.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import kernels

VertexId = Hashable

# Dense Floyd-Warshall below this size, sparse Dijkstra above.
DENSE_LIMIT = 400
_FLOAT_EXACT = 1 << 52


class ModelError(ValueError):
    """Raised when an input does not describe a valid finite length space."""


def as_rational(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and Fractions. Floats are rejected."""
    if isinstance(value, float):
        raise ModelError(f"floating point length {value!r}; pass 'p/q' strings")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class MetricGraph:
    """Vertices, length-weighted edges and a basepoint.

    Parallel edges and self-loops of positive length are allowed, so a wedge
    of circles needs no subdivision tricks.
    """

    vertices: list
    edges: list
    basepoint: VertexId = None
    _index: dict = field(init=False, repr=False, compare=False)
    _incidence: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = list(self.vertices)
        if not self.vertices:
            raise ModelError("graph has no vertices")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        if len(self._index) != len(self.vertices):
            raise ModelError("duplicate vertex ids")
        if self.basepoint is None:
            self.basepoint = self.vertices[0]
        if self.basepoint not in self._index:
            raise ModelError(f"basepoint {self.basepoint!r} is not a vertex")
        edges = []
        for e in self.edges:
            u, v, length = e
            if u not in self._index or v not in self._index:
                raise ModelError(f"edge {e!r} references an unknown vertex")
            length = as_rational(length)
            if length <= 0:
                raise ModelError(f"edge {e!r} has non-positive length")
            edges.append((u, v, length))
        self.edges = edges
        inc = [[] for _ in self.vertices]
        for k, (u, v, _) in enumerate(edges):
            iu, iv = self._index[u], self._index[v]
            inc[iu].append((k, 1, iv))
            inc[iv].append((k, -1, iu))
        self._incidence = inc

    # -- indexing helpers -------------------------------------------------
    def index(self, v: VertexId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise ModelError(f"unknown vertex {v!r}") from None

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def base_index(self) -> int:
        return self._index[self.basepoint]

    def incidence(self, i: int) -> list:
        """``(edge, direction, neighbour)`` triples at vertex index ``i``.

        Direction ``+1`` walks an edge from its first to its second endpoint.
        """
        return self._incidence[i]

    def endpoints(self, k: int) -> tuple[int, int]:
        u, v, _ = self.edges[k]
        return self._index[u], self._index[v]

    def step_target(self, i: int, k: int, direction: int) -> int:
        a, b = self.endpoints(k)
        if direction == 1:
            if a != i:
                raise ModelError(f"edge {k} does not start at vertex index {i}")
            return b
        if b != i:
            raise ModelError(f"edge {k} does not end at vertex index {i}")
        return a

    def length(self, k: int) -> Fraction:
        return self.edges[k][2]

    def denominator(self) -> int:
        d = 1
        for _, _, length in self.edges:
            d = math.lcm(d, length.denominator)
        return d

    def integer_lengths(self, denom: int | None = None) -> list[int]:
        denom = denom or self.denominator()
        return [int(length * denom) for _, _, length in self.edges]

    def is_connected(self) -> bool:
        seen = {0}
        todo = deque([0])
        while todo:
            i = todo.popleft()
            for _, _, j in self._incidence[i]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == self.n

    def cycle_rank(self) -> int:
        """Rank of the free fundamental group, ``E - V + 1`` when connected."""
        return len(self.edges) - self.n + 1

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "vertices": [str(v) for v in self.vertices],
            "edges": [[str(u), str(v), rational_str(l)] for u, v, l in self.edges],
            "basepoint": str(self.basepoint),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MetricGraph":
        try:
            return cls(data["vertices"], [tuple(e) for e in data["edges"]], data.get("basepoint"))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"malformed graph JSON: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "MetricGraph":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class EdgePath:
    """A walk along directed edge traversals ``(edge, direction)``."""

    start: int
    end: int
    steps: tuple
    length: Fraction

    @classmethod
    def from_steps(cls, g: MetricGraph, start: int, steps: Iterable) -> "EdgePath":
        steps = tuple((int(k), int(d)) for k, d in steps)
        cur = start
        total = Fraction(0)
        for k, d in steps:
            if d not in (1, -1):
                raise ModelError(f"bad direction {d} in path")
            cur = g.step_target(cur, k, d)
            total += g.length(k)
        return cls(start, cur, steps, total)

    @property
    def closed(self) -> bool:
        return self.start == self.end

    def inverse(self) -> "EdgePath":
        return EdgePath(self.end, self.start, tuple((k, -d) for k, d in reversed(self.steps)), self.length)

    def __add__(self, other: "EdgePath") -> "EdgePath":
        if self.end != other.start:
            raise ModelError("paths do not share an endpoint")
        return EdgePath(self.start, other.end, self.steps + other.steps, self.length + other.length)

    def vertex_sequence(self, g: MetricGraph) -> list[int]:
        seq = [self.start]
        for k, d in self.steps:
            seq.append(g.step_target(seq[-1], k, d))
        return seq

    def to_json(self, g: MetricGraph) -> dict:
        return {
            "start": str(g.vertices[self.start]),
            "steps": [[k, d] for k, d in self.steps],
        }

    @classmethod
    def from_json(cls, g: MetricGraph, data: dict) -> "EdgePath":
        return cls.from_steps(g, g.index(data["start"]), data["steps"])


class FiniteMetricSpace:
    """Points with an exact distance matrix ``numer / denom``."""

    def __init__(self, points: Sequence, numer, denom: int = 1):
        self.points = list(points)
        self.numer = np.asarray(numer)
        if self.numer.dtype.kind not in "iO":
            raise ModelError("distance numerators must be integers")
        self.denom = int(denom)
        self._index = {p: i for i, p in enumerate(self.points)}
        n = len(self.points)
        if self.numer.shape != (n, n):
            raise ModelError("distance matrix shape does not match points")

    @classmethod
    def from_fractions(cls, points: Sequence, dist) -> "FiniteMetricSpace":
        rows = [[Fraction(x) for x in row] for row in dist]
        denom = 1
        for row in rows:
            for x in row:
                denom = math.lcm(denom, x.denominator)
        numer = [[int(x * denom) for x in row] for row in rows]
        arr = np.array(numer, dtype=object)
        if all(abs(v) < (1 << 62) for row in numer for v in row):
            arr = arr.astype(np.int64)
        return cls(points, arr, denom)

    def __len__(self) -> int:
        return len(self.points)

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise ModelError(f"unknown point {p!r}") from None

    def d(self, i: int, j: int) -> Fraction:
        """Distance between point *indices* ``i`` and ``j``."""
        return Fraction(int(self.numer[i, j]), self.denom)

    def dist(self, a, b) -> Fraction:
        return self.d(self.index(a), self.index(b))

    def matrix(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.denom) for v in row] for row in self.numer]

    def rescaled(self, denom: int) -> np.ndarray:
        """Numerators over ``denom`` (which must be a multiple of ours)."""
        if denom % self.denom:
            raise ModelError("rescale target is not a multiple of the denominator")
        return self.numer * (denom // self.denom)

    def check_invariants(self) -> None:
        """Exact metric axioms; raises :class:`ModelError` on failure."""
        d = self.numer
        n = len(self)
        if n == 0:
            raise ModelError("empty metric space")
        if (d != d.T).any():
            raise ModelError("distance matrix not symmetric")
        if (np.diag(d) != 0).any():
            raise ModelError("non-zero diagonal")
        off = d + np.eye(n, dtype=d.dtype)
        if (off <= 0).any():
            raise ModelError("distinct points at distance zero")
        for k in range(n):
            if (d > d[:, k : k + 1] + d[k : k + 1, :]).any():
                raise ModelError("triangle inequality violated")

    def to_json(self) -> dict:
        return {
            "points": [str(p) for p in self.points],
            "dist": [[rational_str(x) for x in row] for row in self.matrix()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteMetricSpace":
        return cls.from_fractions(data["points"], [[as_rational(x) for x in row] for row in data["dist"]])

    def subspace(self, idx: Sequence[int]) -> "FiniteMetricSpace":
        idx = list(idx)
        return FiniteMetricSpace([self.points[i] for i in idx], self.numer[np.ix_(idx, idx)], self.denom)


def _dense_apsp(n: int, ends, lengths) -> np.ndarray:
    inf = kernels.INF
    w = [[inf] * n for _ in range(n)]
    for i in range(n):
        w[i][i] = 0
    for (a, b), L in zip(ends, lengths):
        if a != b and L < w[a][b]:
            w[a][b] = w[b][a] = L
    return np.array(kernels.floyd_warshall(w), dtype=np.int64)


def _sparse_apsp(n: int, ends, lengths) -> np.ndarray:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    best: dict = {}
    for (a, b), L in zip(ends, lengths):
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in best or L < best[key]:
            best[key] = L
    rows = [k[0] for k in best]
    cols = [k[1] for k in best]
    vals = [float(v) for v in best.values()]
    mat = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    out = dijkstra(mat, directed=False)
    # Integer-valued doubles stay exact while every path sum is below 2**52.
    return np.rint(out).astype(np.int64)


def build_metric(g: MetricGraph) -> FiniteMetricSpace:
    """Induced path metric on the vertices of ``g``."""
    if not g.is_connected():
        raise ModelError("not a length space model: graph is disconnected")
    denom = g.denominator()
    lengths = g.integer_lengths(denom)
    ends = [g.endpoints(k) for k in range(len(g.edges))]
    n = g.n
    total = sum(lengths)
    if total >= (1 << 62):
        raise ModelError("edge lengths overflow the exact integer kernels")
    if n <= DENSE_LIMIT or total >= _FLOAT_EXACT:
        numer = _dense_apsp(n, ends, lengths)
    else:
        numer = _sparse_apsp(n, ends, lengths)
    return FiniteMetricSpace(list(g.vertices), numer, denom)


def metric_ball(s: FiniteMetricSpace, c, r, mode: str = "open") -> list:
    """Point ids within distance ``r`` of ``c`` (strictly, for open balls)."""
    i = s.index(c)
    r = as_rational(r)
    if r <= 0:
        raise ModelError("ball radius must be positive")
    row = s.numer[i]
    bound = r * s.denom
    if mode == "open":
        mask = [Fraction(int(v)) < bound for v in row]
    elif mode == "closed":
        mask = [Fraction(int(v)) <= bound for v in row]
    else:
        raise ModelError(f"unknown ball mode {mode!r}")
    return [p for p, keep in zip(s.points, mask) if keep]


def hausdorff_distance(s: FiniteMetricSpace, A: Iterable, B: Iterable) -> Fraction:
    """max of the two one-sided distances between non-empty point sets."""
    ia = [s.index(a) for a in A]
    ib = [s.index(b) for b in B]
    if not ia or not ib:
        raise ModelError("Hausdorff distance needs non-empty sets")
    sub = s.numer[np.ix_(ia, ib)]
    val = max(int(sub.min(axis=1).max()), int(sub.min(axis=0).max()))
    return Fraction(val, s.denom)


def diameter(s: FiniteMetricSpace) -> Fraction:
    if len(s) == 0:
        raise ModelError("empty metric space")
    return Fraction(int(s.numer.max()), s.denom)


def eccentricities(s: FiniteMetricSpace) -> list[Fraction]:
    return [Fraction(int(v), s.denom) for v in s.numer.max(axis=1)]
