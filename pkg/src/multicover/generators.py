"""Seeded random instance families."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InfeasibleError, InputError
from .geometry import Halfplane
from .instance import MultiCoverInstance, PointRecord, RangeRecord
from .rng import stream

KINDS = ("abstract-random", "halfplane-random", "disk-random-materialized")
# dual VC dimension parameter configured per family (not estimated from data)
DELTA_STAR = {"abstract-random": 3, "halfplane-random": 3, "disk-random-materialized": 3}
MAX_REGENERATIONS = 100


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "abstract-random"
    n: int = 20
    m: int = 15
    d_max: int = 2
    d_min: int = 1
    density: float = 0.5  # abstract-random: incidence probability
    radius: tuple[float, float] = (0.15, 0.4)  # disk-random-materialized
    coverage: tuple[float, float] = (0.2, 0.6)  # halfplane-random: fraction of points inside
    repetition_allowed: bool = False
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown generator kind {self.kind!r}")
        if self.n < 0 or self.m < 0:
            raise InputError("n and m must be nonnegative")
        if not 0 <= self.d_min <= self.d_max:
            raise InputError("need 0 <= d_min <= d_max")
        if not 0 <= self.density <= 1:
            raise InputError("density must lie in [0, 1]")
        if not 0 < self.coverage[0] <= self.coverage[1] <= 1:
            raise InputError("coverage must satisfy 0 < low <= high <= 1")

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("radius", "coverage"):
            if key in data:
                data[key] = tuple(data[key])
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown generator fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    @property
    def delta_star(self):
        return DELTA_STAR[self.kind]


def _demands(rng, spec):
    return rng.integers(spec.d_min, spec.d_max + 1, size=spec.n)


def _enough(inc, spec):
    need = 1 if spec.repetition_allowed else spec.d_max
    return spec.n == 0 or spec.d_max == 0 or bool((inc.sum(axis=1) >= need).all())


def _abstract(rng, spec):
    return rng.random((spec.n, spec.m)) < spec.density, None, None


def _halfplanes(rng, spec):
    """Random normals; each offset puts a random fraction of the points inside."""
    pts = rng.random((spec.n, 2))
    theta = rng.uniform(0.0, 2 * math.pi, spec.m)
    frac = rng.uniform(spec.coverage[0], spec.coverage[1], spec.m)
    a, b = np.cos(theta), np.sin(theta)
    if spec.n:
        proj = pts @ np.vstack([a, b])
        c = np.array([np.quantile(proj[:, j], frac[j]) for j in range(spec.m)])
    else:
        c = a * 0.5 + b * 0.5
    H = [Halfplane.normalized(*row) for row in zip(a, b, c)]
    hp = np.array([(h.a, h.b, h.c) for h in H]).reshape(-1, 3)
    inc = np.column_stack([h.contains_many(pts) for h in H]) if H else np.zeros((spec.n, 0), bool)
    return inc, pts, hp


def _disks(rng, spec):
    pts = rng.random((spec.n, 2))
    centers = rng.random((spec.m, 2))
    radii = rng.uniform(spec.radius[0], spec.radius[1], spec.m)
    dist = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    return dist <= radii[None, :], pts, None


def generate(spec: GeneratorSpec) -> MultiCoverInstance:
    """Instance for ``spec``; regenerated until every point is coverable enough."""
    build = {"abstract-random": _abstract, "halfplane-random": _halfplanes,
             "disk-random-materialized": _disks}[spec.kind]
    for attempt in range(MAX_REGENERATIONS):
        rng = stream(spec.seed, "gen", spec.kind, attempt)
        inc, pts, hp = build(rng, spec)
        if _enough(inc, spec):
            break
    else:
        raise InfeasibleError(f"no feasible {spec.kind} instance after {MAX_REGENERATIONS} attempts")
    dem = _demands(rng, spec)
    points = tuple(
        PointRecord(i, int(dem[i]), None if pts is None else (float(pts[i, 0]), float(pts[i, 1])))
        for i in range(spec.n))
    if hp is not None:
        ranges = tuple(RangeRecord.from_halfplane(j, *hp[j]) for j in range(spec.m))
    else:
        ranges = tuple(RangeRecord.explicit(j, np.nonzero(inc[:, j])[0].tolist()) for j in range(spec.m))
    inst = MultiCoverInstance(points, ranges, spec.repetition_allowed)
    if hp is not None and not np.array_equal(inst.incidence, inc):
        raise InputError("halfplane incidence changed after normalization")
    return inst
