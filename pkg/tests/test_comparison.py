import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from lengthlab import comparison as cmp
from lengthlab.comparison import HPoint, InapplicableBound, UnsupportedDimension
from lengthlab.lab.corpus import gen_torus
from lengthlab.spaces import ModelError, build_metric


def snk_mp(n, K):
    """High-precision evaluation written straight from the formula."""
    mp.mp.dps = 40
    n, K = mp.mpf(n), mp.mpf(K)
    s = mp.sqrt(K)
    v = (1 / (4 * 3**n)) / mp.cosh(s / 4) * n / (n - 1) * ((n - 2) / (n - 1)) ** (n - 1) * (s / mp.sinh(s)) ** (n - 1)
    return min(mp.mpf(1) / 8, v)


def test_snk_high_precision():
    assert cmp.snk(3, 1) == pytest.approx(float(snk_mp(3, 1)), rel=1e-12)
    assert cmp.snk(3, 1) == pytest.approx(2.4376e-3, rel=1e-4)


@pytest.mark.parametrize("n", [3, 4, 5, 7])
@pytest.mark.parametrize("K", [1e-8, 0.01, 0.5, 1, 4, 25])
def test_snk_grid(n, K):
    v = cmp.snk(n, K)
    assert v <= 0.125
    assert v == pytest.approx(float(snk_mp(n, K)), rel=1e-12)


def test_snk_monotone_in_K():
    Ks = np.linspace(0.01, 10, 200)
    vals = [cmp.snk(3, K) for K in Ks]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_snk_domain():
    with pytest.raises(ModelError, match="n = 2"):
        cmp.snk(2, 1)
    with pytest.raises(ModelError):
        cmp.snk(3, 0)


def test_c3_value_and_symmetry():
    coth = 1 / math.tanh(0.5)
    assert cmp.c3(3, 1, 0.5, 0.5, 0) == pytest.approx(4 / 3 * coth, rel=1e-14)
    # (4/3) * coth(1/2) with coth(1/2) ~ 2.163953
    assert cmp.c3(3, 1, 0.5, 0.5, 0) == pytest.approx(4 / 3 * 2.163953, abs=1e-6)
    assert cmp.c3(3, 1, 0.4, 0.9, 0.1) == pytest.approx(cmp.c3(3, 1, 0.9, 0.4, 0.1), rel=1e-15)


def test_c3_pole_and_inapplicable():
    vals = [cmp.c3(3, 1, 0.5, 0.5, 0.5 - 10.0**-k) for k in range(2, 8)]
    assert all(b > 10 * a for a, b in zip(vals, vals[1:]))
    with pytest.raises(InapplicableBound, match="excess bound inapplicable"):
        cmp.c3(3, 1, 0.5, 0.5, 0.5)


def test_ag_bound_values():
    assert cmp.ag_excess_bound(3, 1, 0.5, 0.5, 0) == 0
    C = cmp.c3(3, 1, 0.5, 0.5, 0.1)
    assert cmp.ag_excess_bound(3, 1, 0.5, 0.5, 0.1) == pytest.approx(2 * 2 * math.sqrt(0.5 * C * 1e-3), rel=1e-14)
    ls = np.linspace(0.001, 0.499, 100)
    b = [cmp.ag_excess_bound(3, 1, 0.5, 0.5, l) for l in ls]
    assert all(x < y for x, y in zip(b, b[1:]))


def test_excess_arithmetic():
    assert cmp.excess(1, 1, 1) == 1
    assert cmp.excess(0.5, 0.5, 1) == 0
    assert cmp.excess(0.55, 0.55, 1) == pytest.approx(0.1)


def test_hyperbolic_distance():
    o = HPoint.origin(3)
    assert cmp.hyperbolic_dist(o, o) == 0
    for t in (1e-9, 1e-3, 0.7, 5.0):
        p = (math.cosh(t), math.sinh(t), 0, 0)
        assert cmp.hyperbolic_dist(o, p) == pytest.approx(t, rel=1e-12)
    assert cmp.hyperbolic_dist(o, (math.cosh(2), math.sinh(2), 0, 0), K=4) == pytest.approx(1.0)


def test_not_on_hyperboloid():
    with pytest.raises(ModelError, match="not on hyperboloid"):
        HPoint((1.0, 1.0, 0.0, 0.0))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_triangle_inequality(v):
    a, b, c = (HPoint.exp_origin(v[i : i + 3]) for i in (0, 3, 6))
    d = cmp.hyperbolic_dist
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-9


def test_segment_distance_matches_brute_force():
    rng = np.random.default_rng(5)
    D = 0.8
    xs = cmp.exp_origin(rng.normal(size=(50, 3)))
    ts = np.linspace(-D / 2, D / 2, 20001)
    gam = np.stack([np.cosh(ts), np.sinh(ts), 0 * ts, 0 * ts], axis=1)
    for x in xs:
        brute = min(cmp._dist_unit(x, gam))
        assert cmp.segment_distance(x, D) == pytest.approx(brute, abs=1e-7)


def test_midpoint_filtered_and_far_point_slack():
    S = cmp.snk(3, 1)
    D = 1.0
    # x = gamma(D/2) = origin: distance D/2 to the endpoints fails the hypothesis
    assert D / 2 < (S + 0.5) * D
    # x at distance 1 from both endpoints of a D=1 geodesic: perpendicular at the
    # midpoint with cosh 1 = cosh(1/2) cosh(s), so d(x, mid) = s
    s = math.acosh(math.cosh(1) / math.cosh(0.5))
    x = cmp.exp_origin(np.array([0.0, s, 0.0]))
    ends = [(math.cosh(0.5), sgn * math.sinh(0.5), 0, 0) for sgn in (1, -1)]
    assert all(cmp.hyperbolic_dist(x, e) == pytest.approx(1.0) for e in ends)
    assert cmp.hyperbolic_dist(x, HPoint.origin(3)) >= 3 * S * D
    assert 3 * S == pytest.approx(7.31e-3, rel=1e-3)


def test_midpoint_excess_montecarlo():
    r = cmp.midpoint_excess_check(3, 1.0, 10000, 42)
    assert r["conclusion_violations"] == 0 and r["excess_bound_violations"] == 0
    assert r["verdict"] == "pass"
    assert r["conclusion_min_slack"] >= 0 and r["excess_bound_min_slack"] >= 0


def test_midpoint_excess_only_three_dimensional():
    with pytest.raises(UnsupportedDimension):
        cmp.midpoint_excess_check(4, 1.0, 10, 0)


def test_midpoint_excess_deterministic():
    assert cmp.midpoint_excess_check(3, 1.0, 3000, 7) == cmp.midpoint_excess_check(3, 1.0, 3000, 7)


def test_vol_model():
    assert cmp.vol_model(3, 0) == 0
    assert cmp.vol_model(3, 1) == pytest.approx(math.pi * (math.sinh(2) - 2), rel=1e-10)
    quad_val = 4 * math.pi * quad(lambda t: math.sinh(t) ** 2, 0, 1)[0]
    assert cmp.vol_model(3, 1) == pytest.approx(quad_val, rel=1e-10)
    for n in (2, 3, 4, 5):
        assert cmp.vol_model(n, 1e-3) / cmp.euclidean_ball(n, 1e-3) == pytest.approx(1, abs=1e-4)
        assert cmp.vol_model(n, 0.7) == pytest.approx(
            cmp.sphere_area(n) * quad(lambda t: math.sinh(t) ** (n - 1), 0, 0.7)[0], rel=1e-10)


def test_deck_bound():
    closed = (math.sinh(8.2) - 8.2) / (math.sinh(0.2) - 0.2)
    assert cmp.deck_bound(3, 1, 0.1) == pytest.approx(closed, rel=1e-8)
    assert cmp.deck_bound(3, 1, 0.1) == pytest.approx(1.36e6, rel=1e-2)
    vals = [cmp.deck_bound(3, 1, d0) for d0 in np.linspace(0.05, 2, 40)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert cmp.deck_bound(3, 1e-6, 0.1) == pytest.approx(1, rel=1e-3)


def test_bishop_gromov_ratio():
    X = build_metric(gen_torus(6, 6, "1/4").graph)
    m = cmp.VolumeModel.uniform(X)
    z = X.points[0]
    assert cmp.bg_ratio_ok(m, z, 1, 1, 2)["ok"]
    r = cmp.bg_ratio_ok(m, z, 1, 2, 2)
    assert r["ok"] and r["model"] < 0.25
    masses = np.zeros(len(X))
    masses[0] = 1
    r = cmp.bg_ratio_ok(cmp.VolumeModel(X, masses), z, 0.5, 2, 3)
    assert r["ok"] and r["measured"] == 1


@pytest.mark.parametrize("n", [3, 4, 6])
def test_snk_flat_limit(n):
    """As K -> 0 the hyperbolic factors tend to 1 (numeric limit only)."""
    flat = 1 / (4 * 3**n) * n / (n - 1) * ((n - 2) / (n - 1)) ** (n - 1)
    errs = [abs(cmp.snk(n, K) - flat) / flat for K in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] < 1e-8
