"""Acceptance suite: one test per criterion, one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath as mp
import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from lengthlab import comparison as cmp  # noqa: E402
from lengthlab.covers.cover import delta_cover  # noqa: E402
from lengthlab.covers.deck import deck_generators, delta_length  # noqa: E402
from lengthlab.covers.theorems import HypothesisError, induced_hom  # noqa: E402
from lengthlab.gh import gh_exact  # noqa: E402
from lengthlab.lab.corpus import gen_cycle, gen_torus  # noqa: E402
from lengthlab.lab.experiments import build_instance, default_config, refinement_pairs, run_experiment  # noqa: E402
from lengthlab.spaces import FiniteMetricSpace, diameter  # noqa: E402

from oracles import exhaustive_gh, random_metric_space  # noqa: E402

F = Fraction
RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def corpus_instances():
    """The delta-length corpus: (label, graph, deltas, R)."""
    for inst in default_config("delta-length-bounds")["instances"]:
        yield inst["name"], build_instance(inst).graph, [F(d) for d in inst["deltas"]], F(inst["R"])


def test_01_circle_covers():
    t = time.perf_counter()
    g = gen_cycle(6, 24).graph
    line = delta_cover(g, 2, 10)
    gens = deck_generators(line)
    lengths = [delta_length(line, h, gens) for h in gens]
    triv = delta_cover(g, F(7, 2), 10)
    elapsed = time.perf_counter() - t
    ok = (line.status == "complete" and lengths == [6] and triv.status == "complete"
          and deck_generators(triv) == [] and triv.fiber == [0] and elapsed < 5)
    record(1, "cycle(6,24): line cover with one generator of length 6 at delta=2; trivial at 7/2", ok,
           f"lengths={[str(x) for x in lengths]}, {elapsed:.2f}s < 5s")


def test_02_torus_ladder():
    t = time.perf_counter()
    g = gen_torus(6, 2, "1/4").graph
    ranks, lengths = [], []
    for d in (F(4, 5), F(3, 2), F(7, 2)):
        c = delta_cover(g, d, 8)
        gens = deck_generators(c)
        ranks.append(len(gens))
        lengths.append(sorted(delta_length(c, h, gens) for h in gens))
    elapsed = time.perf_counter() - t
    ok = ranks == [2, 1, 0] and lengths == [[2, 6], [6], []] and elapsed < 60
    record(2, "torus(6,2,1/4): ranks (2,1,0), lengths (2 and 6; 6; none)", ok,
           f"ranks={ranks}, lengths={[[str(x) for x in l] for l in lengths]}, {elapsed:.2f}s < 60s")


def test_03_delta_length_inequalities():
    r = run_experiment("delta-length-bounds")
    ge = [c for c in r.checks if c.name.endswith("l(h) >= delta")]
    mono = [c for c in r.checks if "l(g,d1) >= l(g,d2)" in c.name]
    bad = [c.name for c in ge + mono if c.status != "pass"]
    ok = bool(ge) and bool(mono) and not bad
    record(3, "every deck element has l >= delta; l(g,d1) >= l(g,d2) for d1 <= d2", ok,
           f"{len(ge)} length checks, {len(mono)} monotonicity checks, exceptions={bad}")


def test_04_surjection_certificate():
    a, b = gen_cycle(6, 120), gen_cycle(6, 240)
    pairs = refinement_pairs(a, b)
    cert = induced_hom(a.graph, b.graph, pairs, F(3, 2), F(21, 10), epsilon=F(1, 20))
    named = []
    for d1, d2, want in ((F(1, 2), F(3), "delta1 > 20*epsilon"), (F(3, 2), F(2), "delta2 > delta1 + 10*epsilon")):
        try:
            induced_hom(a.graph, b.graph, pairs, d1, d2, epsilon=F(1, 20))
            named.append(False)
        except HypothesisError as exc:
            named.append(want in str(exc))
    ok = cert.surjective == "yes" and all(named)
    record(4, "circle refinement surjection verified; hypothesis violations rejected by name", ok,
           f"surjective={cert.surjective}, named rejections={named}")


def test_05_backend_agreement():
    total = agree = 0
    for label, g, deltas, R in corpus_instances():
        for d in deltas:
            total += 1
            a = delta_cover(g, d, R, backend="rewriting")
            b = delta_cover(g, d, R, backend="folding")
            agree += bool(a.complete and b.complete and a.same_as(b))
    ok = total > 0 and agree == total
    record(5, "rewriting and folding backends agree on the corpus", ok, f"{agree}/{total} instances")


def test_06_gh_exact_vs_exhaustive():
    rng = np.random.default_rng(20240601)
    mismatches = 0
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 6, size=2))
        X, Y = random_metric_space(n, rng), random_metric_space(m, rng)
        if gh_exact(X, Y).upper != exhaustive_gh(X, Y):
            mismatches += 1
    point = FiniteMetricSpace.from_fractions(["o"], [[0]])
    formula_ok = True
    for _ in range(20):
        Y = random_metric_space(int(rng.integers(1, 6)), rng)
        formula_ok &= gh_exact(point, Y).upper == diameter(Y) / 2
        a, b = F(int(rng.integers(1, 20)), 3), F(int(rng.integers(1, 20)), 2)
        two = lambda s: FiniteMetricSpace.from_fractions("pq", [[0, s], [s, 0]])
        formula_ok &= gh_exact(two(a), two(b)).upper == abs(a - b) / 2
    ok = mismatches == 0 and formula_ok
    record(6, "gh_exact equals exhaustive search on 200 instances; point and two-point formulas exact", ok,
           f"mismatches={mismatches}, formulas={formula_ok}")


def test_07_snk():
    mp.mp.dps = 50
    s = mp.sqrt(1)
    ref = min(mp.mpf(1) / 8, 1 / (4 * mp.mpf(3) ** 3) / mp.cosh(s / 4) * mp.mpf(3) / 2
              * (mp.mpf(1) / 2) ** 2 * (s / mp.sinh(s)) ** 2)
    rel = abs(cmp.snk(3, 1) - float(ref)) / float(ref)
    cap = all(cmp.snk(n, K) <= 0.125 for n in range(3, 12) for K in np.geomspace(1e-10, 1e3, 60))
    ok = rel <= 1e-12 and cap
    record(7, "snk(3,1) matches 50-digit evaluation; snk <= 1/8 everywhere", ok,
           f"snk(3,1)={cmp.snk(3, 1):.16g}, rel err={rel:.1e}")


def test_08_excess_montecarlo():
    t = time.perf_counter()
    r = cmp.midpoint_excess_check(3, 1.0, 10_000, 42)
    elapsed = time.perf_counter() - t
    ok = (r["samples"] == 10_000 and r["conclusion_violations"] == 0
          and r["excess_bound_violations"] == 0 and elapsed < 120)
    record(8, "10^4 seeded H^3 samples: zero violations", ok,
           f"min slack: bound={r['excess_bound_min_slack']:.4g}, conclusion={r['conclusion_min_slack']:.4g}; "
           f"{elapsed:.2f}s < 120s")


def test_09_volumes_and_deck_counts():
    v = cmp.vol_model(3, 1)
    vref = math.pi * (math.sinh(2) - 2)
    b = cmp.deck_bound(3, 1, 0.1)
    bref = (math.sinh(8.2) - 8.2) / (math.sinh(0.2) - 0.2)
    r = run_experiment("deck-counting-bound")
    counts = [c for c in r.checks if c.name.endswith("count <= deck_bound")]
    ok = (abs(v - vref) <= 1e-10 * vref and abs(b - bref) <= 1e-8 * bref
          and counts and all(c.status == "pass" for c in counts))
    record(9, "vol_model(3,1) and deck_bound(3,1,0.1) closed forms; corpus deck counts <= deck_bound", ok,
           f"vol={v:.12g}, bound={b:.10g}, {sum(c.status == 'pass' for c in counts)}/{len(counts)} count checks")


def test_10_sine_gh_bound():
    r = run_experiment("sine-gh-bound")
    gh = [c for c in r.checks if "GH upper bound" in c.name]
    ok = len(gh) == 2 and all(c.status == "pass" for c in gh)
    detail = ", ".join(f"{c.name.split(':')[0]} upper={c.detail.get('upper')} target={c.detail.get('target')}"
                       for c in gh)
    record(10, "GH upper bound between sine X_k and X is <= 10/(k pi) + 4h, k = 2, 3", ok, detail)


def test_11_trees_trivial():
    checked, nonempty = 0, []
    for label, g, deltas, R in corpus_instances():
        if g.cycle_rank() != 0:
            continue
        for d in deltas:
            checked += 1
            if deck_generators(delta_cover(g, d, R)):
                nonempty.append((label, str(d)))
    ok = checked > 0 and not nonempty
    record(11, "trees have empty deck generator sets at every tested delta", ok,
           f"{checked} tree covers, nonempty={nonempty}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
