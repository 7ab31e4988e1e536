"""Builders and oracles shared by the test modules."""

from __future__ import annotations

import numpy as np

from multicover.geometry import Halfplane
from multicover.instance import MultiCoverInstance, PointRecord, RangeRecord

# criterion number -> (passed, detail); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def explicit(demands, ranges, repetition=False) -> MultiCoverInstance:
    """Instance with points ``0..n-1`` and ranges ``0..m-1`` given as member lists."""
    pts = tuple(PointRecord(i, int(d)) for i, d in enumerate(demands))
    rngs = tuple(RangeRecord.explicit(j, mem) for j, mem in enumerate(ranges))
    return MultiCoverInstance(pts, rngs, repetition)


def geometric(points, demands, halfplanes, repetition=False) -> MultiCoverInstance:
    pts = tuple(PointRecord(i, int(d), (float(x), float(y))) for i, ((x, y), d) in enumerate(zip(points, demands)))
    rngs = tuple(RangeRecord.from_halfplane(j, *h) for j, h in enumerate(halfplanes))
    return MultiCoverInstance(pts, rngs, repetition)


def random_explicit(rng, n, m, d_max, density=0.5, repetition=False, d_min=0):
    """Random feasible instance: demands are clipped to what the incidence allows."""
    inc = rng.random((n, m)) < density
    cap = inc.sum(axis=1)
    dem = rng.integers(d_min, d_max + 1, size=n)
    dem = np.where(cap == 0, 0, dem) if repetition else np.minimum(dem, cap)
    ranges = [np.nonzero(inc[:, j])[0].tolist() for j in range(m)]
    return explicit(dem.tolist(), ranges, repetition)


def brute_incidence(instance) -> np.ndarray:
    """Membership recomputed from the raw records, independent of the cached views."""
    inc = np.zeros((len(instance.points), len(instance.ranges)), dtype=bool)
    for k, p in enumerate(instance.points):
        for j, r in enumerate(instance.ranges):
            if r.members is not None:
                inc[k, j] = p.id in r.members
            else:
                h = r.halfplane
                inc[k, j] = h.a * p.coords[0] + h.b * p.coords[1] <= h.c + 1e-9
    return inc


def random_lines(n, seed):
    """Random halfplanes: uniform normal direction, boundary through a uniform point of the unit square."""
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, n)
    q = rng.random((n, 2))
    return [Halfplane.normalized(np.cos(t), np.sin(t), np.cos(t) * a + np.sin(t) * b) for t, (a, b) in zip(th, q)]
