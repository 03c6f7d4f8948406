"""Deck transformations of a truncated delta-cover and their delta-lengths."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from ..spaces import EdgePath, ModelError, rational_str
from .cover import DeltaCover


class WindowTooSmall(ModelError):
    """The window cannot certify the requested quantity; increase R."""


@dataclass(frozen=True)
class LoopClass:
    """A based loop standing for its class in ``G(Y, delta)``."""

    representative: EdgePath
    delta: Fraction


@dataclass
class DeckElement:
    """Deck transformation sending the base lift to fiber vertex ``image``.

    ``mapping`` is the partial action on window vertices: ``x -> h(x)``
    wherever both ends lie in the window.
    """

    image: int
    mapping: dict
    word: LoopClass
    displacement: Fraction
    inverse: dict = field(default_factory=dict, repr=False)

    @property
    def loop(self) -> EdgePath:
        return self.word.representative

    def __call__(self, x: int):
        return self.mapping.get(x)


def deck_element(c: DeltaCover, f: int) -> DeckElement:
    """Partial deck action determined by ``base_lift -> f`` (f in the fiber)."""
    if c.proj[f] != c.proj[0]:
        raise ModelError(f"cover vertex {f} is not over the basepoint")
    mapping = {0: f}
    q = deque([0])
    nbr = c.nbr
    while q:
        x = q.popleft()
        fx = mapping[x]
        for key, y in nbr[x].items():
            fy = nbr[fx].get(key)
            if fy is None:
                continue
            prev = mapping.get(y)
            if prev is None:
                mapping[y] = fy
                q.append(y)
            elif prev != fy:  # pragma: no cover - unique path lifting
                raise ModelError("inconsistent deck action: cover is not a covering")
    inverse = {v: k for k, v in mapping.items()}
    return DeckElement(f, mapping, LoopClass(c.loop_to(f), c.delta), c.distance(f), inverse)


def _closure(gens: list, fiber_set: set) -> set:
    seen = {0}
    q = deque([0])
    while q:
        x = q.popleft()
        for h in gens:
            for y in (h.mapping.get(x), h.inverse.get(x)):
                if y is not None and y in fiber_set and y not in seen:
                    seen.add(y)
                    q.append(y)
    return seen


def deck_generators(c: DeltaCover) -> list[DeckElement]:
    """Greedy generating set of the in-window deck action.

    Fiber points are scanned by distance from the base lift; a point joins
    the generating set when the in-window orbit of the base lift under the
    generators found so far does not reach it.
    """
    c.require_complete()
    cached = getattr(c, "_generators", None)
    if cached is not None:
        return cached
    fiber_set = set(c.fiber)
    gens: list = []
    reached = {0}
    for f in c.fiber:
        if f in reached:
            continue
        gens.append(deck_element(c, f))
        reached = _closure(gens, fiber_set)
    c._generators = gens
    return gens


def commutes(a: DeckElement, b: DeckElement):
    """``True``/``False`` from the base lift, ``None`` if the window can't tell."""
    ab = a.mapping.get(b.image)
    ba = b.mapping.get(a.image)
    if ab is None or ba is None:
        return None
    return ab == ba


def group_summary(c: DeltaCover) -> dict:
    gens = deck_generators(c)
    pairs = [commutes(a, b) for i, a in enumerate(gens) for b in gens[i + 1 :]]
    if any(p is False for p in pairs):
        abelian = False
    elif all(p is True for p in pairs):
        abelian = True
    else:
        abelian = None
    return {"rank": len(gens), "abelian": abelian, "fiber_in_window": len(c.fiber)}


def _certified_displacement(c: DeltaCover, h: DeckElement, q: int):
    hq = h.mapping.get(q)
    if hq is None:
        return None
    t = c.dist_scaled
    bound = 2 * c.R - t[q] - t[hq]
    if bound < 0:
        return None
    # A geodesic of length <= bound from q to hq never leaves the window.
    return c.dijkstra(q, target=hq, bound=bound).get(hq)


def delta_length(c: DeltaCover, h: DeckElement, gens: list | None = None) -> Fraction:
    """Translative delta-length ``min_q d(q, h q)``, certified or refused.

    The minimum over all points equals the minimum over vertices: deck
    transformations act freely, so no edge is flipped, and on an edge the
    displacement is bounded below by its value at an endpoint. A window
    distance ``d_W(q, hq)`` is exact when ``|q| + |hq| + d_W <= 2R``.
    For ``h`` central among the generators, displacement is constant on
    orbits, so one certified lift per base vertex suffices. Otherwise every
    vertex with ``|q| <= |h b|/2 + max edge`` must be certified: in a tree
    cover the axis of ``h`` passes within ``(|h b| - l)/2`` of the base
    lift; for other covers this radius is a heuristic and the value is a
    certified upper bound on the minimum.
    """
    c.require_complete()
    if h.image == 0:
        return Fraction(0)
    if gens is None:
        gens = deck_generators(c)
    central = all(g.image == h.image or commutes(h, g) is True for g in gens)
    best = None
    if central:
        for v, lifts in sorted(c.lifts.items()):
            order = sorted((q for q in lifts if q in h.mapping),
                           key=lambda q: (c.dist_scaled[q] + c.dist_scaled[h.mapping[q]], q))
            for q in order:
                d = _certified_displacement(c, h, q)
                if d is not None:
                    best = d if best is None else min(best, d)
                    break
            else:
                raise WindowTooSmall(
                    f"no lift of vertex {c.base.vertices[v]!r} certifies d(q, hq); increase R"
                )
    else:
        rho = Fraction(c.dist_scaled[h.image], 2) + max(c._lengths)
        t = c.dist_scaled
        floors = []
        for q in range(len(c)):
            if t[q] > rho:
                continue
            d = _certified_displacement(c, h, q)
            if d is not None:
                best = d if best is None else min(best, d)
            else:
                # nothing within the bound, so d(q, hq) exceeds it
                hq = h.mapping.get(q)
                floors.append((q, 2 * c.R - t[q] - t[hq] if hq is not None else c.R - t[q]))
        for q, floor in floors:
            if best is None or floor < best:
                raise WindowTooSmall(
                    f"displacement at cover vertex {q} is not certified in-window; increase R"
                )
    return Fraction(best, c.denom)


def count_short_elements(c: DeltaCover, bound) -> int:
    """Fiber points (deck elements) within distance ``bound`` of the base lift.

    ``d(b, h b) <= bound`` dominates ``l(h) <= bound``; only points the
    window sees are counted, so callers must keep ``bound <= R``.
    """
    bound = Fraction(bound)
    if bound > c.radius:
        raise WindowTooSmall("count bound exceeds the window radius; increase R")
    return sum(1 for f in c.fiber if c.distance(f) <= bound)


def generator_table(c: DeltaCover) -> list[dict]:
    gens = deck_generators(c)
    rows = []
    for h in gens:
        try:
            length = rational_str(delta_length(c, h, gens))
        except WindowTooSmall as exc:
            length = f"uncertified: {exc}"
        rows.append({"image": h.image, "displacement": rational_str(h.displacement),
                     "delta_length": length, "loop": h.loop.to_json(c.base)})
    return rows
