"""Construction of delta-covers truncated to a window around the base lift.

Two independent backends build the same object:

``rewriting``
    Cover vertices are pairs (base vertex, normal form) where the normal
    form is taken in a confluent rewriting system for
    ``pi_1(graph) / <<delta-ball loops>>``. Exact whenever completion
    finishes.
``folding``
    Coset-graph completion: starting from the base lift, every incident
    edge is lifted and, at every lift of every vertex ``c``, the open
    delta-ball about ``c`` is lifted as a copy; the chords of each lifted
    ball force identifications, which are folded with a union-find.

Both results are relabelled canonically (BFS from the base lift, edges in
incidence order), so agreement is plain equality of the labelled graphs.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from ..spaces import EdgePath, MetricGraph, ModelError, as_rational, rational_str
from .presentation import GraphPresentation, TietzeReduction
from .rewriting import RewritingSystem

BACKENDS = ("rewriting", "folding", "both")


class IncompleteCover(ModelError):
    """Raised when an operation needs a cover whose construction ran out of budget."""


@dataclass
class Budget:
    """Construction limits. ``margin`` is extra folding radius beyond ``R``."""

    max_rules: int = 4000
    max_pairs: int = 200000
    max_nodes: int = 200000
    margin: Fraction | None = None

    @classmethod
    def from_any(cls, value) -> "Budget":
        if value is None:
            return cls()
        if isinstance(value, Budget):
            return value
        data = dict(value)
        if data.get("margin") is not None:
            data["margin"] = as_rational(data["margin"])
        return cls(**data)


_PRESENTATIONS: dict = {}


def presentation(g: MetricGraph) -> GraphPresentation:
    """Cached presentation; graphs are treated as immutable once built."""
    key = id(g)
    hit = _PRESENTATIONS.get(key)
    if hit is not None and hit[0] is g:
        return hit[1]
    pres = GraphPresentation(g)
    if len(_PRESENTATIONS) > 64:
        _PRESENTATIONS.clear()
    _PRESENTATIONS[key] = (g, pres)
    return pres


class DeltaGroup:
    """The group ``G(Y, delta)`` as a rewriting system over Tietze survivors."""

    def __init__(self, pres: GraphPresentation, delta, budget: Budget | None = None):
        budget = budget or Budget()
        self.pres = pres
        self.delta = as_rational(delta)
        self.relators = pres.ball_relators(self.delta)
        self.tietze = TietzeReduction(pres.rank, self.relators)
        self.system = RewritingSystem(
            len(self.tietze.surviving), self.tietze.relators, budget.max_rules, budget.max_pairs
        )
        self.complete = self.system.complete
        self._edge_cache: dict = {}

    def edge_word(self, k: int, d: int) -> tuple:
        key = (k, d)
        w = self._edge_cache.get(key)
        if w is None:
            w = self.tietze.apply(self.pres.edge_letters(k, d))
            self._edge_cache[key] = w
        return w

    def element_of_word(self, word) -> tuple:
        """Normal form of a word in the original free generators."""
        return self.system.reduce(self.tietze.apply(word))

    def element_of_path(self, path: EdgePath) -> tuple:
        return self.element_of_word(self.pres.word_of_path(path))

    def multiply(self, u, v) -> tuple:
        return self.system.reduce(tuple(u) + tuple(v))

    def decide_trivial(self, word) -> str:
        nf = self.element_of_word(word)
        if nf == ():
            return "yes"
        return "no" if self.complete else "unknown"


_GROUPS: dict = {}


def delta_group(g: MetricGraph, delta, budget: Budget | None = None) -> DeltaGroup:
    """Cached :class:`DeltaGroup` for a graph, scale and rewriting budget."""
    budget = budget or Budget()
    pres = presentation(g)
    delta = as_rational(delta)
    key = (id(pres), delta, budget.max_rules, budget.max_pairs)
    hit = _GROUPS.get(key)
    if hit is not None and hit.pres is pres:
        return hit
    if len(_GROUPS) > 256:
        _GROUPS.clear()
    group = _GROUPS[key] = DeltaGroup(pres, delta, budget)
    return group


# -- raw constructions -------------------------------------------------------


def _build_rewriting(pres: GraphPresentation, group: DeltaGroup, R: int, budget: Budget):
    g = pres.g
    L = pres.lengths
    root_key = (g.base_index, ())
    ids = {root_key: 0}
    keys = [root_key]
    dist = [0]
    heap = [(0, 0)]
    done = [False]
    complete = group.complete
    while heap:
        d, x = heapq.heappop(heap)
        if done[x] or d > dist[x]:
            continue
        done[x] = True
        v, nf = keys[x]
        for k, dd, w in g.incidence(v):
            nd = d + L[k]
            if nd > R:
                continue
            key = (w, group.multiply(nf, group.edge_word(k, dd)))
            y = ids.get(key)
            if y is None:
                if len(keys) >= budget.max_nodes:
                    complete = False
                    continue
                y = len(keys)
                ids[key] = y
                keys.append(key)
                dist.append(nd)
                done.append(False)
                heapq.heappush(heap, (nd, y))
            elif nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    adj = []
    for v, nf in keys:
        nb = {}
        for k, dd, w in g.incidence(v):
            y = ids.get((w, group.multiply(nf, group.edge_word(k, dd))))
            if y is not None:
                nb[(k, dd)] = y
        adj.append(nb)
    base = [v for v, _ in keys]
    words = [nf for _, nf in keys]
    return base, adj, dist, complete, {"nodes_built": len(keys), "rules": len(group.system.rules),
                                      "generators": len(group.tietze.surviving),
                                      "relators": len(group.tietze.relators)}, words


def _build_folding(pres: GraphPresentation, delta: Fraction, R: int, budget: Budget):
    g = pres.g
    L = pres.lengths
    maxL = max(L) if L else 0
    if budget.margin is None:
        margin = 2 * pres.scaled(delta) + maxL
    else:
        margin = pres.scaled(budget.margin)
    Rb = R + margin
    balls: dict = {}
    base: list = []
    adj: list = []
    dist: list = []
    parent: list = []
    processed: list = []
    coincidences: deque = deque()
    merges = 0

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def new(v, d):
        parent.append(len(base))
        base.append(v)
        adj.append({})
        dist.append(d)
        processed.append(False)
        return len(base) - 1

    def follow(x, k, d):
        t = adj[x].get((k, d))
        return None if t is None else find(t)

    def settle():
        nonlocal merges
        while coincidences:
            a, b = coincidences.popleft()
            a, b = find(a), find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            parent[b] = a
            merges += 1
            dist[a] = min(dist[a], dist[b])
            processed[a] = processed[a] or processed[b]
            for key, t in adj[b].items():
                ta = adj[a].get(key)
                if ta is None:
                    adj[a][key] = t
                elif find(ta) != find(t):
                    coincidences.append((ta, t))
            adj[b] = {}

    def define(x, k, d):
        y = new(g.step_target(base[x], k, d), dist[x] + L[k])
        adj[x][(k, d)] = y
        adj[y][(k, -d)] = x
        todo.append(y)
        return y

    def link(x, k, d, y):
        x, y = find(x), find(y)
        t = adj[x].get((k, d))
        if t is None:
            adj[x][(k, d)] = y
            t2 = adj[y].get((k, -d))
            if t2 is None:
                adj[y][(k, -d)] = x
            else:
                coincidences.append((t2, x))
        else:
            coincidences.append((t, y))
        settle()

    root = new(g.base_index, 0)
    todo: deque = deque([root])
    complete = True
    lifted = 0
    while True:
        while todo:
            x = find(todo.popleft())
            if processed[x] or dist[x] > Rb:
                continue
            if len(base) >= budget.max_nodes:
                complete = False
                todo.clear()
                break
            v = base[x]
            for k, d, _ in g.incidence(v):
                if follow(x, k, d) is None:
                    define(x, k, d)
            if v not in balls:
                balls[v] = pres.ball_structure(v, delta)
            tree, chords = balls[v]
            if chords:
                img = {v: x}
                for p_, k, d, c_ in tree:
                    src = find(img[p_])
                    t = follow(src, k, d)
                    if t is None:
                        t = define(src, k, d)
                    img[c_] = t
                for a, k, d, b in chords:
                    link(img[a], k, d, img[b])
                lifted += 1
            processed[find(x)] = True
        # exact distances may undercut the tentative ones used above
        r0 = find(root)
        best = {r0: 0}
        heap = [(0, r0)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > best[x]:
                continue
            for (k, dd), t in adj[x].items():
                y = find(t)
                nd = d + L[k]
                if nd < best.get(y, nd + 1):
                    best[y] = nd
                    heapq.heappush(heap, (nd, y))
        if not complete:
            break
        again = False
        for x, d in best.items():
            dist[x] = d
            if d <= Rb and not processed[x]:
                todo.append(x)
                again = True
        if not again:
            break
    roots = sorted(best)
    ren = {x: i for i, x in enumerate(roots)}
    out_base = [base[x] for x in roots]
    out_dist = [best[x] for x in roots]
    out_adj = []
    for x in roots:
        nb = {}
        for key, t in adj[x].items():
            y = find(t)
            if y in ren:
                nb[key] = ren[y]
        out_adj.append(nb)
    info = {"nodes_built": len(base), "merges": merges, "balls_lifted": lifted,
            "build_radius": rational_str(Fraction(Rb, pres.denom))}
    return out_base, out_adj, out_dist, complete, info, ren[find(root)]


def _canonical(base, adj, dist, root, R, g: MetricGraph):
    inwin = [d <= R for d in dist]
    label = {root: 0}
    order = [root]
    q = deque([root])
    while q:
        x = q.popleft()
        for k, d, _ in g.incidence(base[x]):
            y = adj[x].get((k, d))
            if y is not None and inwin[y] and y not in label:
                label[y] = len(order)
                order.append(y)
                q.append(y)
    proj = [base[x] for x in order]
    nbr = []
    for x in order:
        nb = {}
        for key, y in adj[x].items():
            if y in label:
                nb[key] = label[y]
        nbr.append(nb)
    return proj, nbr, [dist[x] for x in order], order


@dataclass
class DeltaCover:
    """Window of radius ``radius`` about the base lift in the delta-cover.

    ``proj[i]`` is the base vertex index under cover vertex ``i`` and
    ``nbr[i]`` maps ``(edge, direction)`` to the neighbouring cover vertex.
    Distances are stored as integers over ``denom``. Vertex 0 is the base
    lift.
    """

    base: MetricGraph
    delta: Fraction
    radius: Fraction
    backend: str
    proj: list
    nbr: list
    dist_scaled: list
    denom: int
    status: str = "complete"
    log: dict = field(default_factory=dict)
    words: list | None = None
    group: DeltaGroup | None = None
    base_lift: int = 0

    def __post_init__(self):
        p = self.base.base_index
        self.fiber = sorted((i for i, v in enumerate(self.proj) if v == p),
                            key=lambda i: (self.dist_scaled[i], i))
        lifts: dict = {}
        for i, v in enumerate(self.proj):
            lifts.setdefault(v, []).append(i)
        self.lifts = lifts
        self._lengths = self.base.integer_lengths(self.denom)

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def R(self) -> int:
        """Window radius in scaled units, rounded down."""
        return int(self.radius * self.denom)

    def __len__(self) -> int:
        return len(self.proj)

    def distance(self, i: int) -> Fraction:
        return Fraction(self.dist_scaled[i], self.denom)

    def require_complete(self):
        if not self.complete:
            raise IncompleteCover(f"cover construction incomplete ({self.log})")

    def edge_set(self) -> frozenset:
        return frozenset((x, k, y) for x, nb in enumerate(self.nbr) for (k, d), y in nb.items() if d == 1)

    def same_as(self, other: "DeltaCover") -> bool:
        """Labelled-isomorphism test; labels are canonical, so equality suffices."""
        return self.proj == other.proj and self.edge_set() == other.edge_set()

    def cover_graph(self) -> MetricGraph:
        verts = [f"c{i}" for i in range(len(self))]
        edges = []
        for x, nb in enumerate(self.nbr):
            for (k, d), y in sorted(nb.items()):
                if d == 1:
                    edges.append((verts[x], verts[y], self.base.length(k)))
        return MetricGraph(verts, edges, "c0")

    def lift_steps(self, steps, start: int = 0):
        """End point of the lift of ``steps`` from cover vertex ``start``.

        ``None`` when the lift leaves the window.
        """
        x = start
        for k, d in steps:
            x = self.nbr[x].get((k, d))
            if x is None:
                return None
        return x

    def dijkstra(self, src: int, target: int | None = None, bound: int | None = None) -> dict:
        L = self._lengths
        best = {src: 0}
        heap = [(0, src)]
        done = set()
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            if x == target:
                break
            for (k, _), y in self.nbr[x].items():
                nd = d + L[k]
                if bound is not None and nd > bound:
                    continue
                if nd < best.get(y, nd + 1):
                    best[y] = nd
                    heapq.heappush(heap, (nd, y))
        return {x: best[x] for x in done}

    def geodesic_steps(self, target: int) -> tuple:
        """Steps of a shortest path from the base lift, deterministic ties."""
        L = self._lengths
        d = self.dist_scaled
        steps = []
        x = target
        while x != 0:
            for (k, dd), y in sorted(self.nbr[x].items()):
                if d[y] + L[k] == d[x]:
                    steps.append((k, -dd))
                    x = y
                    break
            else:  # pragma: no cover - distances are exact
                raise ModelError("broken distance labels in cover")
        return tuple(reversed(steps))

    def loop_to(self, target: int) -> EdgePath:
        return EdgePath.from_steps(self.base, self.base.base_index, self.geodesic_steps(target))

    def to_json(self) -> dict:
        from .deck import generator_table

        out = {
            "delta": rational_str(self.delta),
            "radius": rational_str(self.radius),
            "backend": self.backend,
            "status": self.status,
            "vertices": len(self),
            "projection": [str(self.base.vertices[v]) for v in self.proj],
            "edges": [[x, y, k] for x, k, y in sorted(self.edge_set())],
            "base_lift": 0,
            "fiber": self.fiber,
            "construction_log": self.log,
        }
        if self.complete:
            out["generators"] = generator_table(self)
        return out


def delta_cover(g: MetricGraph, delta, R, budget=None, backend: str = "both") -> DeltaCover:
    """Window of radius ``R`` of the delta-cover of ``g`` about the base lift."""
    delta = as_rational(delta)
    R = as_rational(R)
    if delta <= 0:
        raise ModelError("delta must be positive")
    if R < delta:
        raise ModelError("radius limit must be at least delta")
    if backend not in BACKENDS:
        raise ModelError(f"unknown backend {backend!r}")
    budget = Budget.from_any(budget)
    pres = presentation(g)
    Rs = R * pres.denom
    Rint = int(Rs)  # integer distances <= R  iff  <= floor(R * denom)
    results = {}
    group = None
    if backend in ("rewriting", "both"):
        group = delta_group(g, delta, budget)
        base, adj, dist, ok, info, words = _build_rewriting(pres, group, Rint, budget)
        proj, nbr, dd, order = _canonical(base, adj, dist, 0, Rint, g)
        results["rewriting"] = (proj, nbr, dd, ok, info, [words[x] for x in order])
    if backend in ("folding", "both"):
        base, adj, dist, ok, info, root = _build_folding(pres, delta, Rint, budget)
        proj, nbr, dd, _ = _canonical(base, adj, dist, root, Rint, g)
        results["folding"] = (proj, nbr, dd, ok, info, None)
    log = {name: dict(r[4], complete=r[3], vertices=len(r[0])) for name, r in results.items()}
    if backend == "both":
        a, b = results["rewriting"], results["folding"]
        agree = a[0] == b[0] and a[1] == b[1] and a[2] == b[2]
        log["agree"] = agree
        if a[3] and b[3] and agree:
            status = "complete"
        elif a[3] and b[3]:
            status = "disagree"
        else:
            status = "incomplete"
        chosen = a if a[3] else b
        words = a[5] if a[3] else None
    else:
        chosen = results[backend]
        status = "complete" if chosen[3] else "incomplete"
        words = chosen[5]
    proj, nbr, dd, _, _, _ = chosen
    return DeltaCover(g, delta, R, backend, proj, nbr, dd, pres.denom, status, log,
                      words, group if group is not None and group.complete else None)


def delta_trivial(g: MetricGraph, loop: EdgePath, delta, budget=None) -> str:
    """``"yes"`` / ``"no"`` / ``"unknown"``: is the loop in ``pi_1(Y, delta, p)``?"""
    delta = as_rational(delta)
    if delta <= 0:
        raise ModelError("delta must be positive")
    if not loop.closed or loop.start != g.base_index:
        raise ModelError("delta_trivial needs a closed loop at the basepoint")
    if not loop.steps:
        return "yes"
    budget = Budget.from_any(budget)
    pres = presentation(g)
    group = delta_group(g, delta, budget)
    verdict = group.decide_trivial(pres.word_of_path(loop))
    if verdict != "unknown":
        return verdict
    # Rules were exhausted; fall back on the folded cover.
    c = delta_cover(g, delta, max(loop.length, delta), budget, backend="folding")
    if not c.complete:
        return "unknown"
    end = c.lift_steps(loop.steps)
    if end is None:
        return "unknown"
    return "yes" if end == 0 else "no"
