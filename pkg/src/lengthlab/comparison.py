"""Comparison-geometry constants and their Monte Carlo verification in H^3.

Everything here is binary64. Hyperbolic configurations are sampled in the
unit hyperboloid and distances are divided by ``sqrt(K)``, which realises
curvature ``-K`` (so ``Ric = -(n-1)K`` with equality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .spaces import FiniteMetricSpace, ModelError

SERIES_CUTOFF = 1e-4
HYPERBOLOID_TOL = 1e-12
CHUNK = 1024


class UnsupportedDimension(ModelError):
    pass


class InapplicableBound(ModelError):
    pass


def _check_nk(n: int, K: float) -> None:
    if int(n) != n or n < 3:
        raise ModelError(f"dimension n = {n} must be an integer >= 3")
    if not K > 0:
        raise ModelError("curvature scale K must be positive")


def sinhc(x):
    """``sinh(x) / x`` with the removable singularity filled by its series."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 + x2 / 6.0 + x2 * x2 / 120.0, np.sinh(safe) / safe)
    return out if out.ndim else float(out)


def snk(n: int, K: float) -> float:
    """The constant ``S_{n,K}`` of the midpoint-distance lemma."""
    _check_nk(n, K)
    sk = math.sqrt(K)
    value = (
        1.0 / (4.0 * 3.0**n)
        / math.cosh(sk / 4.0)
        * n / (n - 1.0)
        * ((n - 2.0) / (n - 1.0)) ** (n - 1)
        / sinhc(sk) ** (n - 1)
    )
    return min(0.125, value)


def c3(n: int, K: float, r0: float, r1: float, l: float) -> float:
    """The constant ``C_3`` of the excess estimate."""
    _check_nk(n, K)
    if not l < min(r0, r1):
        raise InapplicableBound(f"excess bound inapplicable: l = {l} >= min(r0, r1) = {min(r0, r1)}")
    if l < 0:
        raise ModelError("distance to the geodesic must be non-negative")
    sk = math.sqrt(K)
    coth = lambda t: 1.0 / math.tanh(t)
    return (n - 1.0) / n * sinhc(sk * l) ** (n - 1) * sk * (coth(sk * (r0 - l)) + coth(sk * (r1 - l)))


def ag_excess_bound(n: int, K: float, r0: float, r1: float, l: float) -> float:
    """Upper bound on the excess ``r0 + r1 - D`` at distance ``l`` from the geodesic."""
    C = c3(n, K, r0, r1, l)
    return 2.0 * (n - 1.0) / (n - 2.0) * (0.5 * C * l**n) ** (1.0 / (n - 1))


def excess(r0: float, r1: float, D: float) -> float:
    return r0 + r1 - D


# -- hyperboloid model -------------------------------------------------------


def minkowski(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


@dataclass(frozen=True)
class HPoint:
    """A point of the hyperboloid ``<x, x> = -1, x_0 > 0``."""

    coords: tuple

    def __post_init__(self):
        x = np.asarray(self.coords, dtype=float)
        if x.ndim != 1 or len(x) < 2:
            raise ModelError("an HPoint needs n + 1 >= 2 coordinates")
        q = minkowski(x, x)
        if abs(q + 1.0) > HYPERBOLOID_TOL * max(1.0, x[0] * x[0]) or x[0] <= 0:
            raise ModelError(f"not on hyperboloid: <x, x> = {q!r}, x0 = {x[0]!r}")

    @classmethod
    def origin(cls, n: int = 3) -> "HPoint":
        return cls((1.0,) + (0.0,) * n)

    @classmethod
    def exp_origin(cls, v) -> "HPoint":
        return cls(tuple(exp_origin(np.asarray(v, dtype=float))))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def exp_origin(v: np.ndarray) -> np.ndarray:
    """Exponential map at ``(1, 0, ..., 0)``; works on stacked tangent vectors."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.concatenate([np.cosh(r), sinhc(r) * v], axis=-1)


def _dist_unit(u, v):
    """Unit-curvature distance from ``<u-v, u-v> = 4 sinh^2(d/2)`` (stable near 0)."""
    w = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    q = np.maximum(minkowski(w, w), 0.0)
    return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)


def hyperbolic_dist(u, v, K: float = 1.0) -> float:
    """Distance in the hyperboloid model rescaled to curvature ``-K``."""
    if not isinstance(u, HPoint):
        u = HPoint(tuple(u))
    if not isinstance(v, HPoint):
        v = HPoint(tuple(v))
    return float(_dist_unit(u.array, v.array)) / math.sqrt(K)


def segment_distance(x, D):
    """Unit-model distance from ``x`` to the segment ``gamma(t) = (cosh t, sinh t, 0..)``, ``t in [-D/2, D/2]``.

    ``cosh d(x, gamma(t)) = a cosh t - b sinh t`` with ``a = x_0``,
    ``b = x_1`` is convex in ``t``; its minimiser ``artanh(b/a)`` is
    clamped to the segment.
    """
    x = np.asarray(x, dtype=float)
    a, b = x[..., 0], x[..., 1]
    t = np.clip(np.arctanh(np.clip(b / a, -1 + 1e-16, 1 - 1e-16)), -D / 2, D / 2)
    pt = np.zeros_like(x)
    pt[..., 0] = np.cosh(t)
    pt[..., 1] = np.sinh(t)
    return _dist_unit(x, pt)


def _sample_chunk(rng: np.random.Generator, m: int, n: int, sk: float, dlo: float, dhi: float):
    """``m`` configurations: geodesic length ``D`` and ``x`` uniform in ``B(mid, 2D)``."""
    Ds, xs = [], []
    need = m
    while need:
        k = max(2 * need, 64)
        D = rng.uniform(dlo, dhi, size=k)
        rho = 2.0 * sk * D
        g = rng.standard_normal((k, n))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
        r = rho * rng.uniform(size=k) ** (1.0 / n)
        # Euclidean-uniform tangent ball -> hyperbolic volume density
        accept = rng.uniform(size=k) < (sinhc(r) / sinhc(rho)) ** (n - 1)
        idx = np.nonzero(accept)[0][:need]
        Ds.append(D[idx])
        xs.append(exp_origin(direction[idx] * r[idx, None]))
        need -= len(idx)
    return np.concatenate(Ds), np.concatenate(xs)


def sample_configurations(n: int, K: float, samples: int, seed: int, D_range=(0.1, 1.0)):
    """Seeded configurations in the curvature ``-K`` model.

    Chunks of :data:`CHUNK` samples draw from independent Philox streams
    spawned from ``seed``, so results do not depend on how work is split.
    Returns ``dict`` of arrays ``D, r0, r1, l, mid`` (already scaled).
    """
    sk = math.sqrt(K)
    nchunks = -(-samples // CHUNK)
    streams = np.random.SeedSequence(seed).spawn(nchunks)
    Ds, xs = [], []
    for i, ss in enumerate(streams):
        m = min(CHUNK, samples - i * CHUNK)
        D, x = _sample_chunk(np.random.Generator(np.random.Philox(ss)), m, n, sk, *D_range)
        Ds.append(D)
        xs.append(x)
    D = np.concatenate(Ds) if Ds else np.zeros(0)
    x = np.concatenate(xs) if xs else np.zeros((0, n + 1))
    Du = sk * D
    half = Du / 2
    A = np.zeros_like(x)
    A[:, 0], A[:, 1] = np.cosh(half), -np.sinh(half)
    B = A.copy()
    B[:, 1] = np.sinh(half)
    M = np.zeros_like(x)
    M[:, 0] = 1.0
    return {
        "D": D,
        "r0": _dist_unit(x, A) / sk,
        "r1": _dist_unit(x, B) / sk,
        "l": segment_distance(x, Du) / sk,
        "mid": _dist_unit(x, M) / sk,
        "x": x,
    }


def midpoint_excess_check(n: int = 3, K: float = 1.0, samples: int = 10000, seed: int = 0,
                  D_range=(0.1, 1.0)) -> dict:
    """Verify the excess estimate and the midpoint-distance lemma on samples."""
    if n != 3:
        raise UnsupportedDimension("only n = 3 is supported (hyperboloid model of H^3)")
    _check_nk(n, K)
    if not (0 < D_range[0] <= D_range[1] <= 1):
        raise ModelError("geodesic lengths must lie in (0, 1]")
    S = snk(n, K)
    s = sample_configurations(n, K, samples, seed, D_range)
    D, r0, r1, l, mid = s["D"], s["r0"], s["r1"], s["l"], s["mid"]
    e = excess(r0, r1, D)
    tri_viol = int(np.count_nonzero(e < -1e-12))
    applicable = l < np.minimum(r0, r1)
    bounds = np.array([ag_excess_bound(n, K, a, b, c) for a, b, c in
                       zip(r0[applicable], r1[applicable], l[applicable])])
    ex_slack = bounds - e[applicable]
    hyp = (r0 >= (S + 0.5) * D) & (r1 >= (S + 0.5) * D)
    concl_slack = mid[hyp] - 3.0 * S * D[hyp]
    ex_viol = int(np.count_nonzero(ex_slack < 0))
    concl_viol = int(np.count_nonzero(concl_slack < 0))
    report = {
        "n": n,
        "K": K,
        "seed": seed,
        "samples": samples,
        "D_range": list(D_range),
        "S": S,
        "excess_negative": tri_viol,
        "excess_bound_applicable": int(applicable.sum()),
        "excess_bound_violations": ex_viol,
        "excess_bound_min_slack": float(ex_slack.min()) if len(ex_slack) else None,
        "hypothesis_satisfied": int(hyp.sum()),
        "conclusion_violations": concl_viol,
        "conclusion_min_slack": float(concl_slack.min()) if len(concl_slack) else None,
        "verdict": "pass" if ex_viol == 0 and concl_viol == 0 and tri_viol == 0 else "fail",
    }
    return report


# -- volumes -----------------------------------------------------------------


def sphere_area(n: int) -> float:
    """Area of the unit sphere ``S^{n-1}``."""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def _sinh_minus_x(x: float) -> float:
    if abs(x) < 1e-2:
        x2 = x * x
        return x * x2 / 6.0 * (1 + x2 / 20.0 * (1 + x2 / 42.0 * (1 + x2 / 72.0)))
    return math.sinh(x) - x


def vol_model(n: int, r: float) -> float:
    """Volume of a radius-``r`` ball in the simply connected space of curvature ``-1``."""
    if r < 0:
        raise ModelError("radius must be non-negative")
    if int(n) != n or n < 1:
        raise ModelError("dimension must be a positive integer")
    if r == 0:
        return 0.0
    if n == 1:
        return 2.0 * r
    if n == 2:
        return 4.0 * math.pi * math.sinh(r / 2.0) ** 2
    if n == 3:
        return math.pi * _sinh_minus_x(2.0 * r)
    val, _ = integrate.quad(lambda t: math.sinh(t) ** (n - 1), 0.0, r, epsabs=0.0, epsrel=1e-13, limit=200)
    return sphere_area(n) * val


def euclidean_ball(n: int, r: float) -> float:
    return math.pi ** (n / 2.0) / special.gamma(n / 2.0 + 1.0) * r**n


def deck_bound(n: int, D: float, delta0: float) -> float:
    """``V(4D + delta0) / V(delta0)``: bound on deck elements moving the base lift by ``<= 4D``."""
    if not (D > 0 and delta0 > 0):
        raise ModelError("D and delta0 must be positive")
    return vol_model(n, 4.0 * D + delta0) / vol_model(n, delta0)


@dataclass
class VolumeModel:
    """Point masses on a finite metric space."""

    space: FiniteMetricSpace
    masses: np.ndarray

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.shape != (len(self.space),) or (self.masses < 0).any() or self.masses.sum() <= 0:
            raise ModelError("masses must be non-negative, one per point, with positive total")

    @classmethod
    def uniform(cls, space: FiniteMetricSpace) -> "VolumeModel":
        return cls(space, np.ones(len(space)))

    def ball_mass(self, z, r: float) -> float:
        row = self.space.numer[self.space.index(z)] / self.space.denom
        return float(self.masses[row <= r].sum())


def bg_ratio_ok(m: VolumeModel, z, r1: float, r2: float, n: int) -> dict:
    """Compare the discrete ball-mass ratio with the curvature ``-1`` model ratio."""
    if r1 > r2:
        raise ModelError("need r1 <= r2")
    v1, v2 = m.ball_mass(z, r1), m.ball_mass(z, r2)
    if v1 <= 0 or v2 <= 0:
        raise ModelError("zero-mass ball")
    lhs = v1 / v2
    rhs = 1.0 if r1 == r2 else (vol_model(n, r1) / vol_model(n, r2) if r1 > 0 else 0.0)
    return {"ok": lhs >= rhs, "measured": lhs, "model": rhs,
            "winner": "measured" if lhs >= rhs else "model"}
