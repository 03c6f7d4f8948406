"""Free-group bookkeeping for a metric graph and its delta-ball relators.

Generators are the non-tree edges of a BFS spanning tree rooted at the
basepoint. Letter ``2*i`` is generator ``i`` and ``2*i + 1`` its inverse.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction

import numpy as np

from ..spaces import EdgePath, MetricGraph, ModelError, as_rational, build_metric


def inv(letter: int) -> int:
    return letter ^ 1


def free_reduce(word) -> tuple:
    out: list = []
    for a in word:
        if out and out[-1] == a ^ 1:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def cyclic_reduce(word) -> tuple:
    w = list(free_reduce(word))
    i, j = 0, len(w) - 1
    while i < j and w[i] == w[j] ^ 1:
        i += 1
        j -= 1
    return tuple(w[i : j + 1])


def invert(word) -> tuple:
    return tuple(a ^ 1 for a in reversed(word))


def canonical_cyclic(word) -> tuple:
    """Least rotation of a cyclic word or its inverse; identifies conjugates."""
    w = cyclic_reduce(word)
    if not w:
        return w
    best = None
    for cand in (w, invert(w)):
        for i in range(len(cand)):
            r = cand[i:] + cand[:i]
            if best is None or r < best:
                best = r
    return best


def reduce_steps(steps) -> tuple:
    out: list = []
    for k, d in steps:
        if out and out[-1] == (k, -d):
            out.pop()
        else:
            out.append((k, d))
    return tuple(out)


class GraphPresentation:
    """Spanning tree, generator words and integer edge lengths of a graph."""

    def __init__(self, g: MetricGraph):
        if not g.is_connected():
            raise ModelError("not a length space model: graph is disconnected")
        self.g = g
        self.denom = g.denominator()
        self.lengths = g.integer_lengths(self.denom)
        self.metric = build_metric(g)
        self.dist = self.metric.rescaled(self.denom)
        root = g.base_index
        parent: dict = {root: None}
        order = [root]
        todo = deque([root])
        tree = set()
        while todo:
            i = todo.popleft()
            for k, d, j in g.incidence(i):
                if j not in parent:
                    parent[j] = (i, k, d)
                    tree.add(k)
                    order.append(j)
                    todo.append(j)
        self.parent = parent
        self.tree_edges = tree
        self.generators = [k for k in range(len(g.edges)) if k not in tree]
        self.gen_of_edge = {k: i for i, k in enumerate(self.generators)}
        self._tree_paths: dict = {root: ()}
        ends = [g.endpoints(k) for k in range(len(g.edges))]
        self._ea = np.array([a for a, _ in ends], dtype=np.int64)
        self._eb = np.array([b for _, b in ends], dtype=np.int64)
        self._el = np.array(self.lengths, dtype=np.int64)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def scaled(self, x) -> Fraction:
        return as_rational(x) * self.denom

    def tree_steps(self, v: int) -> tuple:
        """Steps of the tree path from the basepoint to vertex index ``v``."""
        if v in self._tree_paths:
            return self._tree_paths[v]
        chain = []
        cur = v
        while cur not in self._tree_paths:
            p, k, d = self.parent[cur]
            chain.append((k, d))
            cur = p
        steps = self._tree_paths[cur] + tuple(reversed(chain))
        self._tree_paths[v] = steps
        return steps

    def edge_letters(self, k: int, d: int) -> tuple:
        i = self.gen_of_edge.get(k)
        if i is None:
            return ()
        return (2 * i,) if d == 1 else (2 * i + 1,)

    def word_of_steps(self, steps) -> tuple:
        out: list = []
        for k, d in steps:
            i = self.gen_of_edge.get(k)
            if i is not None:
                out.append(2 * i if d == 1 else 2 * i + 1)
        return free_reduce(out)

    def word_of_path(self, path: EdgePath) -> tuple:
        return self.word_of_steps(path.steps)

    def loop_of_word(self, word) -> EdgePath:
        """A reduced closed path at the basepoint representing ``word``."""
        g = self.g
        steps: list = []
        for a in word:
            k = self.generators[a >> 1]
            u, v = g.endpoints(k)
            if a & 1:
                piece = self.tree_steps(v) + ((k, -1),) + _inverse_steps(self.tree_steps(u))
            else:
                piece = self.tree_steps(u) + ((k, 1),) + _inverse_steps(self.tree_steps(v))
            steps.extend(piece)
        return EdgePath.from_steps(g, g.base_index, reduce_steps(steps))

    # -- delta balls ------------------------------------------------------
    def ball_edges(self, c: int, delta) -> list[int]:
        """Edges lying entirely inside the open delta-ball about vertex ``c``.

        Every point of edge ``(u, v)`` of length ``L`` is within
        ``(d(c,u) + d(c,v) + L) / 2`` of ``c``.
        """
        delta = as_rational(delta)
        row = self.dist[c].astype(object) if self.dist.dtype == object else self.dist[c]
        lhs = (row[self._ea] + row[self._eb] + self._el) * delta.denominator
        return np.nonzero(lhs < 2 * delta.numerator * self.denom)[0].tolist()

    def ball_structure(self, c: int, delta):
        """BFS tree of the ball subgraph from ``c`` plus its chords.

        Returns ``(tree_steps, chords)``: ``tree_steps`` is a list of
        ``(parent, k, d, child)`` in BFS order, ``chords`` a list of
        ``(a, k, d, b)`` closing one basis cycle each.
        """
        edges = self.ball_edges(c, delta)
        eset = set(edges)
        g = self.g
        seen = {c}
        tree = []
        used = set()
        todo = deque([c])
        while todo:
            i = todo.popleft()
            for k, d, j in g.incidence(i):
                if k not in eset or k in used:
                    continue
                if j not in seen:
                    seen.add(j)
                    used.add(k)
                    tree.append((i, k, d, j))
                    todo.append(j)
        chords = []
        for k in edges:
            if k not in used:
                a, b = g.endpoints(k)
                chords.append((a, k, 1, b))
        return tree, chords

    def ball_relators(self, delta) -> list[tuple]:
        """Distinct cyclic words of basis cycles of every open delta-ball."""
        seen = set()
        out = []
        for c in range(self.g.n):
            tree, chords = self.ball_structure(c, delta)
            if not chords:
                continue
            word_to: dict = {c: ()}
            for p, k, d, j in tree:
                word_to[j] = word_to[p] + self.edge_letters(k, d)
            for a, k, d, b in chords:
                w = word_to[a] + self.edge_letters(k, d) + invert(word_to[b])
                key = canonical_cyclic(w)
                if key and key not in seen:
                    seen.add(key)
                    out.append(key)
        out.sort(key=lambda w: (len(w), w))
        return out


def _inverse_steps(steps) -> tuple:
    return tuple((k, -d) for k, d in reversed(steps))


class TietzeReduction:
    """Eliminate generators that occur exactly once in some relator.

    ``image`` maps every original generator to a word in the surviving
    generators; the map kills every processed relator, hence its normal
    closure, so consequences of eliminated relators reduce to the empty word.
    """

    def __init__(self, rank: int, relators, max_word: int = 20000):
        self.rank = rank
        self.image: list = [(2 * i,) for i in range(rank)]
        self.eliminated: set = set()
        self.max_word = max_word
        pending = list(relators)
        changed = True
        hard: list = []
        while changed:
            changed = False
            hard = []
            for r in pending:
                w = cyclic_reduce(self.apply(r))
                if not w:
                    continue
                if self._try_eliminate(w):
                    changed = True
                else:
                    hard.append(w)
            pending = hard
        uniq = {}
        for r in hard:
            w = canonical_cyclic(self.apply(r))
            if w:
                uniq[w] = True
        self.surviving = [i for i in range(rank) if i not in self.eliminated]
        renum = {i: n for n, i in enumerate(self.surviving)}
        self._renum = renum
        self.relators = sorted((self._renumber(w) for w in uniq), key=lambda w: (len(w), w))
        self.image = [self._renumber(w) for w in self.image]

    def apply(self, word) -> tuple:
        out: list = []
        for a in word:
            img = self.image[a >> 1]
            out.extend(invert(img) if a & 1 else img)
        return free_reduce(out)

    def _try_eliminate(self, w) -> bool:
        counts: dict = {}
        for a in w:
            counts[a >> 1] = counts.get(a >> 1, 0) + 1
        single = sorted(i for i, c in counts.items() if c == 1)
        if not single:
            return False
        x = single[0]
        pos = next(p for p, a in enumerate(w) if a >> 1 == x)
        rot = w[pos:] + w[:pos]
        rest = rot[1:]
        # x^e * rest = 1  =>  x = rest^-1 (e=+1) or x = rest (e=-1)
        value = invert(rest) if rot[0] & 1 == 0 else tuple(rest)
        value = free_reduce(value)
        if len(value) > self.max_word:
            return False
        for i in range(self.rank):
            img = self.image[i]
            if any(a >> 1 == x for a in img):
                out: list = []
                for a in img:
                    if a >> 1 == x:
                        out.extend(invert(value) if a & 1 else value)
                    else:
                        out.append(a)
                self.image[i] = free_reduce(out)
        self.image[x] = value
        self.eliminated.add(x)
        return True

    def _renumber(self, word) -> tuple:
        return tuple(2 * self._renum[a >> 1] + (a & 1) for a in word)
