"""Graph families standing in for the example spaces.

Every generator returns a :class:`CorpusSpec` whose ``graph`` passes the
vertex/edge validation of :class:`~lengthlab.spaces.MetricGraph`.
"""

from __future__ import annotations

import math
import random

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction

from ..spaces import MetricGraph, ModelError, as_rational, rational_str


@dataclass
class CorpusSpec:
    family: str
    params: dict
    graph: MetricGraph
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params, "graph": self.graph.to_json()}


def gen_cycle(L, m: int) -> CorpusSpec:
    """Cycle of ``m`` equal edges and circumference ``L``."""
    L = as_rational(L)
    if m < 3:
        raise ModelError("a cycle needs at least 3 edges")
    h = L / m
    verts = [f"v{i}" for i in range(m)]
    edges = [(verts[i], verts[(i + 1) % m], h) for i in range(m)]
    return CorpusSpec("cycle", {"L": rational_str(L), "m": m}, MetricGraph(verts, edges, "v0"))


def gen_hawaiian(circs, m: int) -> CorpusSpec:
    """Wedge of subdivided circles at the basepoint ``p``.

    ``m`` is the number of edges per circle.
    """
    circs = [as_rational(c) for c in circs]
    if len(set(circs)) != len(circs):
        raise ModelError("circumferences must be distinct")
    if m < 3:
        raise ModelError("each circle needs at least 3 edges")
    verts = ["p"]
    edges = []
    for j, c in enumerate(circs):
        ring = ["p"] + [f"c{j}_{i}" for i in range(1, m)]
        verts.extend(ring[1:])
        for i in range(m):
            edges.append((ring[i], ring[(i + 1) % m], c / m))
    return CorpusSpec(
        "hawaiian",
        {"circs": [rational_str(c) for c in circs], "m": m},
        MetricGraph(verts, edges, "p"),
    )


def gen_torus(a, b, h) -> CorpusSpec:
    """Flat ``a`` by ``b`` torus as a wrap-around grid of mesh ``h``."""
    a, b, h = as_rational(a), as_rational(b), as_rational(h)
    na, nb = a / h, b / h
    if na.denominator != 1 or nb.denominator != 1:
        raise ModelError(f"mesh {h} does not divide the side lengths {a}, {b}")
    na, nb = int(na), int(nb)
    if na < 3 or nb < 3:
        raise ModelError("torus grid needs at least 3 cells per direction")
    name = lambda i, j: f"t{i}_{j}"
    verts = [name(i, j) for i in range(na) for j in range(nb)]
    edges = []
    for i in range(na):
        for j in range(nb):
            edges.append((name(i, j), name((i + 1) % na, j), h))
            edges.append((name(i, j), name(i, (j + 1) % nb), h))
    return CorpusSpec(
        "torus",
        {"a": rational_str(a), "b": rational_str(b), "h": rational_str(h)},
        MetricGraph(verts, edges, name(0, 0)),
    )


def gen_tree(n: int, seed: int = 0, lengths=(1, 2, 3)) -> CorpusSpec:
    """Random recursive tree on ``n`` vertices with small rational lengths."""
    rng = random.Random(seed)
    verts = [f"n{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        L = Fraction(rng.choice(lengths), rng.choice((1, 2)))
        edges.append((verts[rng.randrange(i)], verts[i], L))
    return CorpusSpec("tree", {"n": n, "seed": seed}, MetricGraph(verts, edges, "n0"))


# -- sine spaces ---------------------------------------------------------------

LENGTH_QUANTUM = 10**6


def _qlen(p, q) -> Fraction:
    d = math.dist(p, q)
    return Fraction(max(1, round(d * LENGTH_QUANTUM)), LENGTH_QUANTUM)


def _sheet_rows(y_lo: float, y_hi: float, h: float) -> list[float]:
    """Row heights along ``y -> (y, sin(1/y))`` at equal arclength spacing ``<= h``."""
    ys = np.linspace(y_lo, y_hi, 40001)
    pts = np.stack([ys, np.sin(1.0 / ys)], axis=1)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    n = max(2, math.ceil(s[-1] / h))
    targets = np.linspace(0.0, s[-1], n + 1)
    rows = np.interp(targets, s, ys)
    rows[0], rows[-1] = y_lo, y_hi
    return rows.tolist()


class _Builder:
    def __init__(self):
        self.coords: dict = {}
        self.edges: dict = {}

    def node(self, name: str, xyz) -> str:
        if name not in self.coords:
            self.coords[name] = tuple(float(c) for c in xyz)
        return name

    def edge(self, a: str, b: str) -> None:
        if a == b:
            return
        key = (a, b) if a < b else (b, a)
        if key not in self.edges:
            self.edges[key] = _qlen(self.coords[a], self.coords[b])

    def graph(self, base: str) -> MetricGraph:
        verts = sorted(self.coords)
        edges = [(a, b, L) for (a, b), L in sorted(self.edges.items())]
        return MetricGraph(verts, edges, base)


def _sine_graph(k_sheet: int, h, with_bowtie: bool, family: str, params: dict) -> CorpusSpec:
    hq = as_rational(h)
    hf = float(hq)
    y_lo, y_hi = 1.0 / (k_sheet * math.pi), 1.0 / math.pi
    if not y_lo > hf:
        raise ModelError(
            f"mesh h = {rational_str(hq)} does not resolve the sine sheets: the strip between "
            f"opposite sheets has half-width 1/({k_sheet}*pi) = {y_lo:.6f} <= h"
        )
    b = _Builder()
    # walls |x| = |y| <= 1/pi, z in [-2, 2]
    M = math.ceil(y_hi / (hf / math.sqrt(2.0)))
    w = y_hi / M
    Nz = 2 * math.ceil(2.0 / hf)
    zs = [-2.0 + 4.0 * l / Nz for l in range(Nz + 1)]

    def wall(s: int, i: int, l: int) -> str:
        if i == 0:
            return b.node(f"ax_{l}", (0.0, 0.0, zs[l]))
        return b.node(f"w{s}_{i}_{l}", (i * w, s * i * w, zs[l]))

    for s in (1, -1):
        for i in range(-M, M + 1):
            for l in range(Nz + 1):
                v = wall(s, i, l)
                if i < M:
                    b.edge(v, wall(s, i + 1, l))
                if l < Nz:
                    b.edge(v, wall(s, i, l + 1))
    # sheets z = sin(1/y) over y_lo <= |y| <= |x| <= 1/pi, one per quadrant
    rows = _sheet_rows(y_lo, y_hi, hf)
    xs = [y_hi - i * hf for i in range(int((y_hi - y_lo) / hf) + 1)][::-1]
    for sx in (1, -1):
        for sy in (1, -1):
            s = sx * sy
            tag = f"s{'p' if sx > 0 else 'm'}{'p' if sy > 0 else 'm'}"
            prev = None
            for j, y in enumerate(rows):
                z = math.sin(1.0 / (sy * y))
                diag = b.node(f"{tag}_{j}_d", (sx * y, sy * y, z))
                # attach to the surrounding wall cell
                fi = y / w
                fl = (z + 2.0) / (4.0 / Nz)
                for i in {math.floor(fi), math.ceil(fi)}:
                    for l in {math.floor(fl), math.ceil(fl)}:
                        b.edge(diag, wall(s, sx * min(i, M), min(max(l, 0), Nz)))
                row = [(y, diag)]
                for c, x in enumerate(xs):
                    if x > y + hf / 4:
                        row.append((x, b.node(f"{tag}_{j}_{c}", (sx * x, sy * y, z))))
                for (_, u), (_, v) in zip(row, row[1:]):
                    b.edge(u, v)
                if prev is not None:
                    pdiag = prev[0][1]
                    b.edge(pdiag, diag)
                    here = {x: v for x, v in row[1:]}
                    for x, u in prev[1:]:
                        v = here.get(x)
                        b.edge(u, v if v is not None else diag)
                prev = row
    if with_bowtie:
        imax = int(y_lo / w)
        zero = Nz // 2
        for sx in (1, -1):

            def bow(i: int, l: int) -> str:
                if l == i:
                    return wall(sx, sx * i, zero)
                if l == -i:
                    return wall(-sx, sx * i, zero)
                return b.node(f"b{'p' if sx > 0 else 'm'}_{i}_{l}", (sx * i * w, l * w, 0.0))

            for i in range(imax + 1):
                for l in range(-i, i + 1):
                    if i < imax:
                        b.edge(bow(i, l), bow(i + 1, l))
                    if l < i:
                        b.edge(bow(i, l), bow(i, l + 1))
    base = f"ax_{Nz // 2}"
    g = b.graph(base)
    meta = {"coords": b.coords, "rows": len(rows), "wall_columns": 2 * M + 1, "wall_rows": Nz + 1}
    return CorpusSpec(family, params, g, meta)


def gen_sine_space(k: int, h) -> CorpusSpec:
    """Grid model of the simply connected sine space truncated at ``1/(k pi)``.

    Walls over the diagonals, four sheets ``z = sin(1/y)`` for
    ``1/(k pi) <= |y| <= |x| <= 1/pi`` with rows at arclength spacing ``<= h``,
    and the flat bowtie ``|y| <= |x| <= 1/(k pi)``. Only structural grid
    neighbours are joined, so nearby but intrinsically distant sheet points
    stay apart.
    """
    if int(k) != k or k < 1:
        raise ModelError("truncation k must be a positive integer")
    return _sine_graph(int(k), h, True, "sine_space", {"k": int(k), "h": rational_str(as_rational(h))})


def gen_sine_limit(h, K: int = 4) -> CorpusSpec:
    """Discretised limit space: walls plus sheets down to ``|y| = 1/(K pi)``, no bowtie.

    Oscillations with ``|y| < 1/(K pi)`` are finer than the mesh resolves and
    are left out.
    """
    return _sine_graph(int(K), h, False, "sine_limit", {"K": int(K), "h": rational_str(as_rational(h))})


FAMILIES = {
    "cycle": gen_cycle,
    "hawaiian": gen_hawaiian,
    "torus": gen_torus,
    "tree": gen_tree,
    "sine_space": gen_sine_space,
    "sine_limit": gen_sine_limit,
}
