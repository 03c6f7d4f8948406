"""Named experiments: each builds corpus instances, runs the relevant
operations and records pass / fail / unknown checks in a :class:`Report`.

Reports contain no timings unless ``"timings": true`` is passed, so that a
report is byte-identical across runs with the same parameters and seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations

import numpy as np

from .. import comparison as cmp
from ..covers.cover import Budget, delta_cover, delta_trivial
from ..covers.deck import WindowTooSmall, deck_element, deck_generators, delta_length, group_summary
from ..covers.theorems import (
    HypothesisError,
    check_deck_isometry,
    check_local_isometry,
    corpus_loops,
    induced_hom,
    stabilize_scan,
    tower_check,
)
from ..gh import gh_bounds
from ..spaces import ModelError, as_rational, build_metric, diameter, rational_str
from .corpus import FAMILIES, CorpusSpec

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"


class UnknownExperiment(ModelError):
    pass


@dataclass
class Check:
    name: str
    status: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass
class Report:
    experiment: str
    params: dict
    checks: list = field(default_factory=list)
    results: list = field(default_factory=list)
    timings: dict | None = None

    def add(self, name: str, status, **detail) -> Check:
        if isinstance(status, bool):
            status = PASS if status else FAIL
        c = Check(name, status, _jsonable(detail))
        self.checks.append(c)
        return c

    @property
    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, UNKNOWN: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        n = self.counts
        if n[FAIL]:
            return 1
        if n[UNKNOWN]:
            return 2
        return 0

    def to_json(self) -> dict:
        out = {
            "experiment": self.experiment,
            "params": _jsonable(self.params),
            "summary": self.counts,
            "checks": [c.to_json() for c in self.checks],
            "results": _jsonable(self.results),
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return out

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["experiment", "check", "status", "detail"])
            for c in self.checks:
                w.writerow([self.experiment, c.name, c.status, json.dumps(c.detail, sort_keys=True)])
            return buf.getvalue()
        raise ModelError(f"unknown report format {fmt!r}")


def _jsonable(x):
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


# -- configuration -----------------------------------------------------------


def default_config(name: str) -> dict:
    fname = name.replace("-", "_") + ".json"
    try:
        text = resources.files("lengthlab.lab").joinpath("configs", fname).read_text()
    except FileNotFoundError:
        return {}
    data = json.loads(text)
    data.pop("_notes", None)
    return data


def build_instance(spec: dict) -> CorpusSpec:
    family = spec["family"]
    if family not in FAMILIES:
        raise ModelError(f"unknown corpus family {family!r}")
    return FAMILIES[family](**spec.get("params", {}))


def _label(spec: dict) -> str:
    return spec.get("name") or f"{spec['family']}{json.dumps(spec.get('params', {}), sort_keys=True)}"


EXPERIMENTS: dict = {}


def experiment(name: str):
    def deco(fn):
        EXPERIMENTS[name] = fn
        return fn

    return deco


def run_experiment(name: str, params: dict | None = None) -> Report:
    if name not in EXPERIMENTS:
        raise UnknownExperiment(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    merged = default_config(name)
    merged.update(params or {})
    want_time = bool(merged.pop("timings", False))
    report = Report(name, dict(merged))
    t0 = time.perf_counter()
    EXPERIMENTS[name](report, merged)
    if want_time:
        report.timings = {"total_seconds": round(time.perf_counter() - t0, 3)}
    return report


# -- covers experiments ------------------------------------------------------


def _backend_check(report: Report, label: str, c) -> None:
    if c.status == "complete":
        report.add(f"{label}: backends agree", PASS, vertices=len(c))
    elif c.status == "disagree":
        report.add(f"{label}: backends agree", FAIL, log=c.log)
    else:
        report.add(f"{label}: backends agree", UNKNOWN, log=c.log)


def _length_or_none(c, h, gens=None):
    try:
        return delta_length(c, h, gens)
    except WindowTooSmall:
        return None


@experiment("delta-length-bounds")
def _delta_length_bounds(report: Report, params: dict) -> None:
    budget = Budget.from_any(params.get("budget"))
    loop_cap = int(params.get("loop_cap", 40))
    for spec in params["instances"]:
        label = _label(spec)
        g = build_instance(spec).graph
        R = as_rational(spec["R"])
        deltas = sorted(as_rational(d) for d in spec["deltas"])
        covers = {}
        for d in deltas:
            c = delta_cover(g, d, R, budget)
            covers[d] = c
            tag = f"{label} delta={rational_str(d)}"
            _backend_check(report, tag, c)
            if not c.complete:
                continue
            gens = deck_generators(c)
            lengths = [_length_or_none(c, h, gens) for h in gens]
            known = [l for l in lengths if l is not None]
            status = FAIL if any(l < d for l in known) else (UNKNOWN if len(known) < len(lengths) else PASS)
            report.add(f"{tag}: l(h) >= delta", status,
                       lengths=[None if l is None else l for l in lengths], delta=d)
            bad_iso = check_local_isometry(c)
            report.add(f"{tag}: projection isometric on small balls", not bad_iso, failures=len(bad_iso))
            bad_deck = sum(len(check_deck_isometry(c, h)) for h in gens)
            report.add(f"{tag}: deck elements are isometries over the base", bad_deck == 0, failures=bad_deck)
            report.results.append({"instance": label, "delta": d, **group_summary(c),
                                   "delta_lengths": lengths})
        for d1, d2 in combinations(deltas, 2):
            c1, c2 = covers[d1], covers[d2]
            tag = f"{label} {rational_str(d1)}<={rational_str(d2)}"
            if not (c1.complete and c2.complete):
                report.add(f"{tag}: l(g,d1) >= l(g,d2)", UNKNOWN)
                continue
            pairs, status = [], PASS
            for h in deck_generators(c1):
                l1 = _length_or_none(c1, h)
                f2 = c2.lift_steps(h.loop.steps)
                if l1 is None or f2 is None:
                    status = status if status == FAIL else UNKNOWN
                    pairs.append([l1, None])
                    continue
                l2 = Fraction(0) if f2 == 0 else _length_or_none(c2, deck_element(c2, f2))
                if l2 is None:
                    status = status if status == FAIL else UNKNOWN
                elif l1 < l2:
                    status = FAIL
                pairs.append([l1, l2])
            report.add(f"{tag}: l(g,d1) >= l(g,d2)", status, pairs=pairs)
            loops = corpus_loops(g, d1)[:loop_cap]
            viol, unknown = 0, 0
            for loop in loops:
                a = delta_trivial(g, loop, d1, budget)
                if a == "yes":
                    b = delta_trivial(g, loop, d2, budget)
                    viol += b == "no"
                    unknown += b == "unknown"
                elif a == "unknown":
                    unknown += 1
            st = FAIL if viol else (UNKNOWN if unknown else PASS)
            report.add(f"{tag}: triviality is monotone in delta", st, loops=len(loops),
                       violations=viol, unknown=unknown)


def refinement_pairs(coarse: CorpusSpec, fine: CorpusSpec) -> list:
    """Vertex correspondence between a cycle or torus and its 2x refinement."""
    if coarse.family == "cycle":
        m = len(fine.graph.vertices)
        return [(f"v{i // 2}", f"v{i}") for i in range(m)]
    if coarse.family == "torus":
        out = []
        for v in fine.graph.vertices:
            i, j = map(int, v[1:].split("_"))
            out.append((f"t{i // 2}_{j // 2}", v))
        return out
    raise ModelError("refinement pairs need cycle or torus instances")


@experiment("surjection")
def _surjection(report: Report, params: dict) -> None:
    for case in params["cases"]:
        src = build_instance(case["src"])
        dst = build_instance(case["dst"])
        label = case.get("name", "case")
        if case.get("pairs") == "identity":
            pairs = [(v, v) for v in src.graph.vertices]
        else:
            pairs = refinement_pairs(src, dst)
        expect = case.get("expect", "surjective")
        try:
            cert = induced_hom(src.graph, dst.graph, pairs, case["d1"], case["d2"],
                               epsilon=case.get("epsilon"), R=case.get("R"))
        except HypothesisError as exc:
            ok = expect != "surjective" and expect in str(exc)
            report.add(f"{label}: rejected with named hypothesis", ok, error=str(exc), expected=expect)
            continue
        if expect != "surjective":
            report.add(f"{label}: rejected with named hypothesis", FAIL, expected=expect)
            continue
        status = {"yes": PASS, "no": FAIL}.get(cert.surjective, UNKNOWN)
        report.add(f"{label}: surjectivity certified", status, **cert.log)
        report.add(f"{label}: generator images partition within 5*epsilon",
                   all(ok for *_, ok in cert.generator_images))
        report.results.append({"case": label, "certificate": cert.to_json()})


@experiment("tower")
def _tower(report: Report, params: dict) -> None:
    for case in params["cases"]:
        g = build_instance(case["graph"]).graph
        r = tower_check(g, case["d1"], case["d2"], case["R"])
        label = case.get("name", "case")
        report.add(f"{label}: tower check", r["ok"], **r)


def _expect_ranks(report, label, r, ranks):
    got = [row["signature"]["rank"] if row["signature"] else None for row in r["rows"]]
    report.add(f"{label}: ranks along grid", got == ranks, ranks=got, expected=ranks)


@experiment("stabilization")
def _stabilization(report: Report, params: dict) -> None:
    for case in params["cases"]:
        g = build_instance(case["graph"]).graph
        label = case.get("name", "case")
        r = stabilize_scan(g, case["deltas"], case["R"])
        if "ranks" in case:
            _expect_ranks(report, label, r, case["ranks"])
        if "delta_Y" in case:
            report.add(f"{label}: delta_Y", r.get("delta_Y") == case["delta_Y"],
                       found=r.get("delta_Y"), expected=case["delta_Y"])
        if "stabilized" in case:
            report.add(f"{label}: stabilization verdict", r["verdict"].startswith("stabilized") == case["stabilized"],
                       verdict=r["verdict"])
        report.results.append({"case": label, "scan": r})


@experiment("torus-collapse")
def _torus_collapse(report: Report, params: dict) -> None:
    a, h, R = params["a"], params["h"], params["R"]
    sigs = []
    for i in params["indices"]:
        b = Fraction(2 * (i - 1), i)
        g = FAMILIES["torus"](a, b, h).graph
        row = {"i": i, "b": b}
        for d in params["deltas"]:
            c = delta_cover(g, d, R)
            if not c.complete:
                row[d] = None
                continue
            gens = deck_generators(c)
            row[d] = {"rank": len(gens),
                      "delta_lengths": sorted(rational_str(l) if l is not None else "uncertified"
                                              for l in (_length_or_none(c, x, gens) for x in gens))}
        sigs.append(row)
    report.results = sigs
    d0 = params["constant_delta"]
    vals = [row.get(d0) for row in sigs]
    if any(v is None for v in vals):
        report.add(f"delta={d0} signatures constant along family", UNKNOWN)
    else:
        report.add(f"delta={d0} signatures constant along family", all(v == vals[0] for v in vals),
                   signature=vals[0])


@experiment("hawaiian-ranks")
def _hawaiian_ranks(report: Report, params: dict) -> None:
    circs = [as_rational(c) for c in params["circs"]]
    d, R, m = params["delta"], params["R"], params["m"]
    ranks, pi1 = [], []
    for i in range(1, len(circs) + 1):
        g = FAMILIES["hawaiian"](circs[:i], m).graph
        c = delta_cover(g, d, R)
        ranks.append(len(deck_generators(c)) if c.complete else None)
        pi1.append(g.cycle_rank())
    report.results.append({"ranks": ranks, "pi1_ranks": pi1})
    ok_growth = pi1 == list(range(1, len(circs) + 1))
    report.add("fundamental group rank grows with truncation", ok_growth, pi1_ranks=pi1)
    if None in ranks:
        report.add("delta-group rank stabilizes", UNKNOWN, ranks=ranks)
    else:
        expected = params.get("expected_ranks")
        stable = ranks[-1] == ranks[-2] if len(ranks) > 1 else True
        ok = stable and (expected is None or ranks == expected)
        report.add("delta-group rank stabilizes", ok, ranks=ranks, expected=expected)


def nearest_point_pairs(a: CorpusSpec, b: CorpusSpec) -> list:
    from scipy.spatial import cKDTree

    na, nb = list(a.meta["coords"]), list(b.meta["coords"])
    A = np.array([a.meta["coords"][v] for v in na])
    B = np.array([b.meta["coords"][v] for v in nb])
    fa = cKDTree(B).query(A)[1]
    fb = cKDTree(A).query(B)[1]
    return [(na[i], nb[j]) for i, j in enumerate(fa)] + [(na[j], nb[i]) for i, j in enumerate(fb)]


def sine_diameter_bound() -> float:
    """Every point reaches the origin within ``1/pi`` (along its sheet row),
    ``sqrt(2)/pi`` (along the wall) plus ``2`` (vertically), doubled."""
    return 2.0 * (2.0 + (1.0 + math.sqrt(2.0)) / math.pi)


@experiment("sine-gh-bound")
def _sine(report: Report, params: dict) -> None:
    h = as_rational(params["h"])
    limit = FAMILIES["sine_limit"](h, params.get("K", 4))
    XL = build_metric(limit.graph)
    for k in params["ks"]:
        spec = FAMILIES["sine_space"](k, h)
        g = spec.graph
        X = build_metric(g)
        diam = diameter(X)
        report.add(f"k={k}: connected with uniform diameter bound",
                   g.is_connected() and float(diam) <= sine_diameter_bound(),
                   diameter=diam, bound=sine_diameter_bound())
        res = gh_bounds(X, XL, {"seeds": [nearest_point_pairs(spec, limit)]})
        target = 10 / (k * math.pi) + 4 * float(h)
        report.add(f"k={k}: GH upper bound <= 10/(k pi) + 4h", float(res.upper) <= target,
                   lower=res.lower, upper=res.upper, target=target)
        if params.get("deck_check", True):
            d = 3 * h
            c = delta_cover(g, d, params.get("R", diam + d))
            if not c.complete:
                report.add(f"k={k}: deck action trivial at delta=3h", UNKNOWN, log=c.log)
            else:
                gens = deck_generators(c)
                report.add(f"k={k}: deck action trivial at delta=3h", not gens and c.fiber == [0],
                           generators=len(gens), vertices=len(c), base_vertices=g.n,
                           agree=c.log.get("agree"))
        report.results.append({"k": k, "vertices": g.n, "edges": len(g.edges),
                               "limit_vertices": limit.graph.n, "gh_lower": rational_str(res.lower),
                               "gh_upper": rational_str(res.upper)})


@experiment("excess-montecarlo")
def _excess(report: Report, params: dict) -> None:
    r = cmp.midpoint_excess_check(params.get("n", 3), params.get("K", 1.0), params["samples"], params["seed"],
                          tuple(params.get("D_range", (0.1, 1.0))))
    report.results.append(r)
    report.add("excess is non-negative on every sample", r["excess_negative"] == 0)
    report.add("excess bound holds where l < min(r0, r1)", r["excess_bound_violations"] == 0,
               applicable=r["excess_bound_applicable"], min_slack=r["excess_bound_min_slack"])
    report.add("midpoint lemma conclusion holds under its hypothesis", r["conclusion_violations"] == 0,
               satisfied=r["hypothesis_satisfied"], min_slack=r["conclusion_min_slack"])


@experiment("deck-counting-bound")
def _deck_counting(report: Report, params: dict) -> None:
    v = cmp.vol_model(3, 1.0)
    ref = math.pi * (math.sinh(2.0) - 2.0)
    report.add("vol_model(3,1) = pi(sinh 2 - 2)", abs(v - ref) <= 1e-10 * ref, value=v, closed_form=ref)
    b = cmp.deck_bound(3, 1.0, 0.1)
    ref = (math.sinh(8.2) - 8.2) / (math.sinh(0.2) - 0.2)
    report.add("deck_bound(3,1,0.1) closed form", abs(b - ref) <= 1e-8 * ref, value=b, closed_form=ref)
    for spec in params["instances"]:
        label = _label(spec)
        g = build_instance(spec).graph
        diam = diameter(build_metric(g))
        d0 = min(g.length(k) for k in range(len(g.edges))) / 2
        R = 4 * diam
        for d in spec["deltas"]:
            c = delta_cover(g, d, R)
            tag = f"{label} delta={d}"
            if not c.complete:
                report.add(f"{tag}: count <= deck_bound", UNKNOWN)
                continue
            count = sum(1 for f in c.fiber if c.distance(f) <= 4 * diam)
            bounds = {n: cmp.deck_bound(n, float(diam), float(d0)) for n in (2, 3)}
            report.add(f"{tag}: count <= deck_bound", all(count <= x for x in bounds.values()),
                       count=count, bounds=bounds, diameter=diam, delta0=d0)
