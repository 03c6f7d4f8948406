"""Constructive checks linking delta-covers across spaces and scales.

* :func:`induced_hom` transports loops across a correspondence by
  partitioning them finely, moving partition points to partners and joining
  partners by geodesics; it certifies surjectivity by the reverse transport.
* :func:`tower_check` compares the covers at two scales of one space.
* :func:`stabilize_scan` watches the in-window deck action along a
  decreasing grid of scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..gh import Correspondence, distortion
from ..spaces import EdgePath, MetricGraph, ModelError, as_rational, build_metric, rational_str
from .cover import Budget, delta_cover, delta_trivial, presentation
from .deck import LoopClass, WindowTooSmall, deck_generators, delta_length
from .presentation import canonical_cyclic


class HypothesisError(ModelError):
    """A quantitative hypothesis of the transport construction fails."""


# -- geodesics in the base graph ---------------------------------------------


def shortest_steps(g: MetricGraph, a: int, b: int) -> tuple:
    """Deterministic shortest path steps from vertex index ``a`` to ``b``."""
    if a == b:
        return ()
    pres = presentation(g)
    L = pres.lengths
    da = pres.dist[a]
    steps = []
    x = b
    while x != a:
        for k, d, y in g.incidence(x):
            if da[y] + L[k] == da[x]:
                steps.append((k, -d))
                x = y
                break
        else:  # pragma: no cover
            raise ModelError("inconsistent distance table")
    return tuple(reversed(steps))


def _partition(g: MetricGraph, path: EdgePath, bound: Fraction):
    """Greedy partition of a vertex path into pieces of length ``< bound``.

    Returns the partition vertex indices (first and last included) or
    ``None`` when some single edge is already too long.
    """
    verts = path.vertex_sequence(g)
    pts = [verts[0]]
    acc = Fraction(0)
    for i, (k, _) in enumerate(path.steps):
        L = g.length(k)
        if L >= bound:
            return None
        if acc + L >= bound:
            pts.append(verts[i])
            acc = Fraction(0)
        acc += L
    if len(verts) > 1:
        pts.append(verts[-1])
    return pts


def _join(g: MetricGraph, points: list) -> EdgePath:
    steps: list = []
    for a, b in zip(points, points[1:]):
        steps.extend(shortest_steps(g, a, b))
    return EdgePath.from_steps(g, points[0], steps)


def _partners(pairs, left: MetricGraph, right: MetricGraph, reverse=False) -> dict:
    out: dict = {}
    for x, y in pairs:
        a, b = (y, x) if reverse else (x, y)
        out.setdefault((left.index(a)), right.index(b))
    return out


def transport(src: MetricGraph, dst: MetricGraph, pairs, loop: EdgePath, step: Fraction,
              reverse: bool = False):
    """Move a based loop across the correspondence.

    Returns ``(path, ok)``; ``ok`` is false when the loop cannot be
    partitioned into pieces shorter than ``step``.
    """
    partner = _partners(pairs, src, dst, reverse)
    pts = _partition(src, loop, step)
    if pts is None:
        # fall back on the vertex sequence; not covered by the hypothesis
        pts = loop.vertex_sequence(src)
        ok = False
    else:
        ok = True
    image = [partner[x] for x in pts]
    image[0] = image[-1] = dst.base_index
    return _join(dst, image), ok


# -- the surjection certificate ----------------------------------------------


@dataclass
class SurjectionCertificate:
    source: tuple
    target: tuple
    epsilon: Fraction
    correspondence: Correspondence
    generator_images: list
    surjectivity_witnesses: list
    surjective: str = "unknown"
    log: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def path(g, p):
            return [str(g.vertices[v]) for v in p.vertex_sequence(g)]

        (g1, d1), (g2, d2) = self.source, self.target
        return {
            "source_delta": rational_str(d1),
            "target_delta": rational_str(d2),
            "epsilon": rational_str(self.epsilon),
            "correspondence": self.correspondence.to_json(),
            "generator_images": [
                {"generator": i, "source_loop": path(g1, s.representative),
                 "image_loop": path(g2, t.representative), "partition_ok": ok}
                for i, (s, t, ok) in enumerate(self.generator_images)
            ],
            "surjectivity_witnesses": [
                {"target_generator": j, "preimage_loop": path(g1, pre.representative),
                 "round_trip": verdict}
                for j, (pre, verdict) in enumerate(self.surjectivity_witnesses)
            ],
            "surjective": self.surjective,
            "log": self.log,
        }


def check_hypotheses(eps: Fraction, d1: Fraction, d2: Fraction) -> None:
    if not d1 > 20 * eps:
        raise HypothesisError(f"hypothesis delta1 > 20*epsilon fails: {d1} <= {20 * eps}")
    if not d2 > d1 + 10 * eps:
        raise HypothesisError(f"hypothesis delta2 > delta1 + 10*epsilon fails: {d2} <= {d1 + 10 * eps}")


def induced_hom(src: MetricGraph, dst: MetricGraph, corr, d1, d2, epsilon=None,
                R=None, budget=None) -> SurjectionCertificate:
    """Surjection ``G(src, d1) -> G(dst, d2)`` built from a correspondence.

    ``corr`` is a :class:`Correspondence` or a list of ``(src_id, dst_id)``
    pairs; the basepoint pair is always added. The scale ``epsilon``
    defaults to half the distortion (the GH bound the correspondence
    witnesses) and may only be raised.
    """
    d1, d2 = as_rational(d1), as_rational(d2)
    budget = Budget.from_any(budget)
    pairs = list(corr.pairs if isinstance(corr, Correspondence) else corr)
    base_pair = (src.basepoint, dst.basepoint)
    if base_pair not in pairs:
        pairs.append(base_pair)
    X, Y = build_metric(src), build_metric(dst)
    dis = distortion(pairs, X, Y)
    floor = dis / 2
    eps = floor if epsilon is None else as_rational(epsilon)
    if eps < floor:
        raise HypothesisError(f"epsilon {eps} is below the correspondence bound {floor}")
    check_hypotheses(eps, d1, d2)
    if R is None:
        R = 2 * max(max(map(max, X.matrix())), max(map(max, Y.matrix()))) + 2 * d2
    cs = delta_cover(src, d1, R, budget)
    ct = delta_cover(dst, d2, R, budget)
    cs.require_complete()
    ct.require_complete()
    images = []
    for h in deck_generators(cs):
        img, ok = transport(src, dst, pairs, h.loop, 5 * eps) if eps > 0 else (_identity(src, dst, pairs, h.loop), True)
        images.append((h.word, LoopClass(img, d2), ok))
    witnesses = []
    verdicts = []
    for h in deck_generators(ct):
        if eps > 0:
            pre, ok_r = transport(dst, src, pairs, h.loop, eps, reverse=True)
            fwd, ok_f = transport(src, dst, pairs, pre, 5 * eps)
        else:
            pre = _identity(dst, src, pairs, h.loop, reverse=True)
            fwd, ok_r, ok_f = _identity(src, dst, pairs, pre), True, True
        diff = fwd + h.loop.inverse()
        verdict = delta_trivial(dst, diff, d2, budget)
        if not (ok_r and ok_f) and verdict == "yes":
            verdict = "unknown"
        witnesses.append((LoopClass(pre, d1), verdict))
        verdicts.append(verdict)
    if all(v == "yes" for v in verdicts):
        surj = "yes"
    elif any(v == "no" for v in verdicts):
        surj = "no"
    else:
        surj = "unknown"
    log = {"distortion": rational_str(dis), "window": rational_str(as_rational(R)),
           "source_rank": len(images), "target_rank": len(witnesses)}
    return SurjectionCertificate((src, d1), (dst, d2), eps, Correspondence(tuple(pairs), dis),
                                 images, witnesses, surj, log)


def _identity(src, dst, pairs, loop, reverse=False):
    """Zero-distortion transport: map vertex by vertex and join."""
    partner = _partners(pairs, src, dst, reverse)
    pts = [partner[v] for v in loop.vertex_sequence(src)]
    pts[0] = pts[-1] = dst.base_index
    return _join(dst, pts)


# -- tower check -------------------------------------------------------------


def corpus_loops(g: MetricGraph, delta) -> list[EdgePath]:
    """Ball relator lollipops at ``delta`` and the fundamental cycles of ``g``."""
    pres = presentation(g)
    words = list(pres.ball_relators(delta))
    words += [(2 * i,) for i in range(pres.rank)]
    seen = set()
    loops = []
    for w in words:
        key = canonical_cyclic(w)
        if key in seen:
            continue
        seen.add(key)
        loops.append(pres.loop_of_word(w))
    return loops


def covering_morphism(c1, c2):
    """Map window(c1) -> window(c2) over the identity of the base, or ``None``.

    Built by lifting: base lift to base lift, then edge by edge.
    """
    phi = {0: 0}
    todo = [0]
    while todo:
        x = todo.pop()
        fx = phi[x]
        for key, y in c1.nbr[x].items():
            fy = c2.nbr[fx].get(key)
            if fy is None:
                continue
            prev = phi.get(y)
            if prev is None:
                phi[y] = fy
                todo.append(y)
            elif prev != fy:
                return None
    return phi


def tower_check(g: MetricGraph, d1, d2, R, budget=None) -> dict:
    d1, d2 = as_rational(d1), as_rational(d2)
    if d1 > d2:
        raise ModelError("tower_check needs delta1 <= delta2")
    budget = Budget.from_any(budget)
    c1 = delta_cover(g, d1, R, budget)
    c2 = delta_cover(g, d2, R, budget)
    c1.require_complete()
    c2.require_complete()
    loops = corpus_loops(g, d1)
    trivial1 = 0
    violations = []
    for i, loop in enumerate(loops):
        if delta_trivial(g, loop, d1, budget) == "yes":
            trivial1 += 1
            if delta_trivial(g, loop, d2, budget) != "yes":
                violations.append(i)
    phi = covering_morphism(c1, c2)
    surjective = phi is not None and set(phi.values()) == set(range(len(c2)))
    return {
        "delta1": rational_str(d1),
        "delta2": rational_str(d2),
        "loops": len(loops),
        "delta1_trivial": trivial1,
        "monotonicity_violations": violations,
        "morphism": phi is not None,
        "morphism_domain": 0 if phi is None else len(phi),
        "morphism_onto_window": surjective,
        "cover_sizes": [len(c1), len(c2)],
        "ok": not violations and phi is not None and len(phi) == len(c1),
    }


# -- stabilization -----------------------------------------------------------


def fundamental_cycle_lengths(g: MetricGraph) -> list[Fraction]:
    pres = presentation(g)
    out = []
    for i in range(pres.rank):
        loop = pres.loop_of_word((2 * i,))
        steps = list(loop.steps)
        while len(steps) >= 2 and steps[0] == (steps[-1][0], -steps[-1][1]):
            steps = steps[1:-1]
        out.append(sum((g.length(k) for k, _ in steps), Fraction(0)))
    return out


def signature(c, radii) -> dict:
    gens = deck_generators(c)
    lengths = []
    for h in gens:
        try:
            lengths.append(rational_str(delta_length(c, h, gens)))
        except WindowTooSmall:
            lengths.append("uncertified")
    counts = [sum(1 for f in c.fiber if c.distance(f) <= r) for r in radii]
    return {"rank": len(gens), "delta_lengths": sorted(lengths, key=_sort_key), "fiber_counts": counts}


def _sort_key(s: str):
    try:
        return (0, Fraction(s))
    except ValueError:
        return (1, s)


def stabilize_scan(g: MetricGraph, deltas, R, budget=None, radii=None) -> dict:
    """Signatures along a descending grid and the largest constant tail."""
    deltas = sorted({as_rational(d) for d in deltas}, reverse=True)
    R = as_rational(R)
    budget = Budget.from_any(budget)
    if radii is None:
        radii = [R / 4, R / 2, 3 * R / 4, R]
    radii = [as_rational(r) for r in radii]
    h = max(g.length(k) for k in range(len(g.edges)))
    mesh_floor = 2 * h
    cycles = fundamental_cycle_lengths(g)
    rows = []
    partial = False
    for d in deltas:
        row = {"delta": rational_str(d)}
        warn = sorted({rational_str(L) for L in cycles if abs(d - L / 2) < h})
        if warn:
            row["threshold_warning"] = warn
        if d <= mesh_floor:
            row["below_mesh_floor"] = True
        c = delta_cover(g, d, R, budget)
        if not c.complete:
            row["status"] = c.status
            partial = True
            row["signature"] = None
        else:
            row["status"] = "complete"
            row["signature"] = signature(c, radii)
        rows.append(row)
    # longest constant suffix (smallest deltas)
    tail = 0
    if rows and rows[-1]["signature"] is not None:
        last = rows[-1]["signature"]
        for row in reversed(rows):
            if row["signature"] != last:
                break
            tail += 1
    out = {
        "grid": [rational_str(d) for d in deltas],
        "radius": rational_str(R),
        "radii": [rational_str(r) for r in radii],
        "mesh_floor": rational_str(mesh_floor),
        "rows": rows,
        "partial": partial,
        "constant_suffix": tail,
    }
    if tail:
        dY = deltas[len(rows) - tail]
        out["delta_Y"] = rational_str(dY)
        reaches = deltas[-1] <= 2 * mesh_floor
        if tail >= 2 and reaches and not partial:
            out["verdict"] = f"stabilized: candidate universal cover = cover at delta {rational_str(dY)}"
        else:
            out["verdict"] = "not stabilized within grid"
    else:
        out["verdict"] = "not stabilized within grid"
    return out


def check_local_isometry(c) -> list:
    """Pairs ``(x, y)`` with ``d(x, y) != d(px, py)`` although ``d(x, y) < r(x)``.

    ``r(x) = min(delta, R - |x|)``. Distances are measured from the ball
    centre: the base geodesic and the projected cover geodesic together lie
    in the open delta-ball about ``px``, so the loop they form lifts closed.
    """
    pres = presentation(c.base)
    D = pres.dist
    bad = []
    for x in range(len(c)):
        r = min(c.delta * c.denom, Fraction(c.R - c.dist_scaled[x]))
        if r <= 0:
            continue
        px = c.proj[x]
        for y, d in c.dijkstra(x, bound=int(r)).items():
            if d < r and D[px][c.proj[y]] != d:
                bad.append((x, y))
    return bad


def check_deck_isometry(c, h) -> list:
    """Domain vertices where ``h`` fails to commute with projection or preserve edges."""
    bad = []
    for x, hx in h.mapping.items():
        if c.proj[x] != c.proj[hx]:
            bad.append(x)
            continue
        for key, y in c.nbr[x].items():
            hy = h.mapping.get(y)
            if hy is not None and c.nbr[hx].get(key) != hy:
                bad.append(x)
                break
    return bad
