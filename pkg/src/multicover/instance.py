"""Multi-cover instances: points with integer demands and a family of ranges.

Ranges are either explicit member lists or closed halfplanes.  Halfplane
membership is evaluated once when the instance is built, so every solver
works from the same cached incidence relation.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import InfeasibleError, InputError
from .geometry import Halfplane

MAX_DEMAND = 2**31 - 1


@dataclass(frozen=True)
class PointRecord:
    id: int
    demand: int
    coords: tuple[float, float] | None = None


@dataclass(frozen=True)
class RangeRecord:
    """A range given by explicit members or by a halfplane (exactly one)."""

    id: int
    members: tuple[int, ...] | None = None
    halfplane: Halfplane | None = None

    @classmethod
    def explicit(cls, id, members):
        members = [int(m) for m in members]
        if len(set(members)) != len(members):
            raise InputError(f"range {id}: duplicate member ids")
        return cls(int(id), members=tuple(sorted(members)))

    @classmethod
    def from_halfplane(cls, id, a, b, c):
        return cls(int(id), halfplane=Halfplane.normalized(a, b, c))

    @property
    def is_halfplane(self):
        return self.halfplane is not None


@dataclass(frozen=True)
class CoverSolution:
    """A multiset of chosen range ids, stored sorted."""

    chosen: tuple[int, ...] = ()

    @classmethod
    def of(cls, ids: Iterable[int]):
        return cls(tuple(sorted(int(i) for i in ids)))

    def __len__(self):
        return len(self.chosen)

    @property
    def size(self):
        return len(self.chosen)

    def counts(self) -> Counter:
        return Counter(self.chosen)

    def has_duplicates(self):
        return len(set(self.chosen)) != len(self.chosen)

    def union(self, *others):
        ids = list(self.chosen)
        for other in others:
            ids.extend(other.chosen if isinstance(other, CoverSolution) else other)
        return CoverSolution.of(ids)


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    deficits: dict[int, int] = field(default_factory=dict)

    def __bool__(self):
        return self.feasible


@dataclass(frozen=True)
class MultiCoverInstance:
    points: tuple[PointRecord, ...]
    ranges: tuple[RangeRecord, ...]
    repetition_allowed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points, key=lambda p: p.id)))
        object.__setattr__(self, "ranges", tuple(sorted(self.ranges, key=lambda r: r.id)))
        object.__setattr__(self, "repetition_allowed", bool(self.repetition_allowed))
        self._validate()

    def _validate(self):
        pids = [p.id for p in self.points]
        rids = [r.id for r in self.ranges]
        for kind, ids in (("point", pids), ("range", rids)):
            if any((not isinstance(i, (int, np.integer))) or i < 0 for i in ids):
                raise InputError(f"{kind} ids must be nonnegative integers")
            if len(set(ids)) != len(ids):
                raise InputError(f"duplicate {kind} id")
        for p in self.points:
            if not isinstance(p.demand, (int, np.integer)) or isinstance(p.demand, bool):
                raise InputError(f"point {p.id}: demand must be an integer")
            if not 0 <= p.demand <= MAX_DEMAND:
                raise InputError(f"point {p.id}: demand {p.demand} out of range")
            if p.coords is not None:
                if len(p.coords) != 2 or not all(math.isfinite(v) for v in p.coords):
                    raise InputError(f"point {p.id}: coordinates must be two finite reals")
        known = set(pids)
        for r in self.ranges:
            if (r.members is None) == (r.halfplane is None):
                raise InputError(f"range {r.id}: need exactly one of members / halfplane")
            if r.members is not None:
                if list(r.members) != sorted(set(r.members)):
                    raise InputError(f"range {r.id}: members must be sorted and duplicate-free")
                missing = [m for m in r.members if m not in known]
                if missing:
                    raise InputError(f"range {r.id}: unknown member point {missing[0]}")
            elif any(p.coords is None for p in self.points):
                raise InputError("halfplane ranges require coordinates on every point")

    # -- cached views -----------------------------------------------------

    @cached_property
    def point_ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.points)

    @cached_property
    def range_ids(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.ranges)

    @cached_property
    def point_pos(self) -> dict[int, int]:
        return {pid: k for k, pid in enumerate(self.point_ids)}

    @cached_property
    def range_pos(self) -> dict[int, int]:
        return {rid: k for k, rid in enumerate(self.range_ids)}

    @cached_property
    def demand(self) -> dict[int, int]:
        return {p.id: int(p.demand) for p in self.points}

    @cached_property
    def demands(self) -> np.ndarray:
        return np.array([p.demand for p in self.points], dtype=np.int64)

    @cached_property
    def coords(self) -> np.ndarray | None:
        if not self.points or any(p.coords is None for p in self.points):
            return None
        return np.array([p.coords for p in self.points], dtype=float)

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean matrix ``[point, range]`` in sorted-id order."""
        inc = np.zeros((len(self.points), len(self.ranges)), dtype=bool)
        for j, r in enumerate(self.ranges if self.points else ()):
            if r.halfplane is not None:
                inc[:, j] = r.halfplane.contains_many(self.coords)
            else:
                inc[[self.point_pos[m] for m in r.members], j] = True
        inc.setflags(write=False)
        return inc

    @cached_property
    def members(self) -> dict[int, frozenset[int]]:
        pids = np.array(self.point_ids, dtype=np.int64)
        return {
            rid: frozenset(pids[self.incidence[:, j]].tolist())
            for j, rid in enumerate(self.range_ids)
        }

    @cached_property
    def covering(self) -> dict[int, tuple[int, ...]]:
        """Point id -> ascending ids of the ranges that contain it."""
        rids = np.array(self.range_ids, dtype=np.int64)
        return {
            pid: tuple(rids[self.incidence[k]].tolist())
            for k, pid in enumerate(self.point_ids)
        }

    @property
    def is_geometric(self):
        return bool(self.ranges) and all(r.is_halfplane for r in self.ranges)

    def halfplane(self, range_id) -> Halfplane:
        return self.ranges[self.range_pos[range_id]].halfplane

    # -- derived instances ------------------------------------------------

    def with_demands(self, demands: Mapping[int, int], drop_zero=False):
        pts = []
        for p in self.points:
            d = int(demands.get(p.id, p.demand))
            if drop_zero and d == 0:
                continue
            pts.append(PointRecord(p.id, d, p.coords))
        return self._rebuild(pts, self.ranges)

    def without_ranges(self, range_ids: Iterable[int]):
        drop = set(range_ids)
        return self._rebuild(self.points, [r for r in self.ranges if r.id not in drop])

    def _rebuild(self, points, ranges):
        if any(r.members is not None for r in ranges):
            keep = {p.id for p in points}
            ranges = [
                r if r.members is None
                else RangeRecord(r.id, members=tuple(m for m in r.members if m in keep))
                for r in ranges
            ]
        return MultiCoverInstance(tuple(points), tuple(ranges), self.repetition_allowed)

    def explicit(self):
        """Copy with every halfplane materialized to its member list."""
        ranges = [RangeRecord(r.id, members=tuple(sorted(self.members[r.id]))) for r in self.ranges]
        return MultiCoverInstance(self.points, tuple(ranges), self.repetition_allowed)

    def digest(self):
        blob = json.dumps(instance_to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# -- operations ---------------------------------------------------------------


def _as_weights(instance, X) -> dict[int, float]:
    if isinstance(X, CoverSolution):
        X = X.counts()
    if isinstance(X, Mapping):
        weights = {int(k): v for k, v in X.items()}
    else:
        weights = Counter(int(i) for i in X)
    for rid, w in weights.items():
        if rid not in instance.range_pos:
            raise InputError(f"unknown range id {rid}")
        if w < 0:
            raise InputError(f"negative weight on range {rid}")
    return weights


def depth(instance: MultiCoverInstance, point_id: int, X) -> float:
    """Total weight of the ranges of ``X`` containing the point.

    ``X`` is a mapping range id -> weight, a ``CoverSolution``, or an iterable
    of range ids (each occurrence counts as weight one).
    """
    if point_id not in instance.point_pos:
        raise InputError(f"unknown point id {point_id}")
    weights = _as_weights(instance, X)
    cover = set(instance.covering[point_id])
    return sum((w for rid, w in weights.items() if rid in cover), 0)


def depths(instance: MultiCoverInstance, X) -> np.ndarray:
    """Depth of every point (sorted-id order) under weights ``X``."""
    weights = _as_weights(instance, X)
    vec = np.zeros(len(instance.ranges))
    for rid, w in weights.items():
        vec[instance.range_pos[rid]] = float(w)
    return instance.incidence @ vec


def _coverage_counts(instance, cover: CoverSolution) -> np.ndarray:
    counts = np.zeros(len(instance.ranges), dtype=np.int64)
    for rid, k in cover.counts().items():
        if rid not in instance.range_pos:
            raise InputError(f"unknown range id {rid}")
        counts[instance.range_pos[rid]] = k
    return instance.incidence.astype(np.int64) @ counts


def residual(instance: MultiCoverInstance, Z, drop_satisfied=True) -> MultiCoverInstance:
    """The residual system after using the coverage of ``Z``.

    Demands become ``max(d(p) - depth(p, Z), 0)``; points whose residual
    demand is zero are dropped unless ``drop_satisfied`` is false; the
    ranges of ``Z`` are removed.
    """
    cover = Z if isinstance(Z, CoverSolution) else CoverSolution.of(Z)
    got = _coverage_counts(instance, cover)
    new = {pid: max(int(d) - int(g), 0) for pid, d, g in zip(instance.point_ids, instance.demands, got)}
    out = instance.with_demands(new, drop_zero=drop_satisfied)
    return out.without_ranges(set(cover.chosen))


def total_demand(instance: MultiCoverInstance) -> int:
    return int(sum(int(p.demand) for p in instance.points))


def is_feasible_cover(instance: MultiCoverInstance, cover) -> FeasibilityReport:
    """Check that every point lies in at least ``d(p)`` chosen ranges.

    Without repetition a range may be chosen once; duplicates are an input
    error.  With repetition, copies count separately.
    """
    cover = cover if isinstance(cover, CoverSolution) else CoverSolution.of(cover)
    if not instance.repetition_allowed and cover.has_duplicates():
        raise InputError("cover repeats a range but repetition is not allowed")
    got = _coverage_counts(instance, cover)
    short = instance.demands - got
    deficits = {pid: int(s) for pid, s in zip(instance.point_ids, short) if s > 0}
    return FeasibilityReport(not deficits, deficits)


def dual_system(instance: MultiCoverInstance) -> MultiCoverInstance:
    """Ranges become points and each point p becomes the range of all ranges containing p."""
    pts = [PointRecord(rid, 1) for rid in instance.range_ids]
    rngs = [RangeRecord(pid, members=instance.covering[pid]) for pid in instance.point_ids]
    return MultiCoverInstance(tuple(pts), tuple(rngs))


def coverage_shortfalls(instance: MultiCoverInstance) -> dict[int, int]:
    """Points whose demand exceeds the coverage any cover could give them."""
    avail = instance.incidence.sum(axis=1)
    out = {}
    for pid, d, a in zip(instance.point_ids, instance.demands, avail):
        if instance.repetition_allowed:
            if d > 0 and a == 0:
                out[pid] = int(d)
        elif d > a:
            out[pid] = int(d - a)
    return out


def check_feasible(instance: MultiCoverInstance):
    short = coverage_shortfalls(instance)
    if short:
        pid = min(short)
        raise InfeasibleError(
            f"point {pid} has demand {instance.demand[pid]} but only "
            f"{instance.demand[pid] - short[pid]} ranges can cover it",
            witness=pid, shortfall=short[pid])


# -- file format --------------------------------------------------------------

_POINT_KEYS = {"id", "demand", "x", "y"}
_RANGE_KEYS = {"id", "members", "halfplane"}
_TOP_KEYS = {"points", "ranges", "repetition_allowed"}


def _need_int(value, what):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{what} must be an integer, got {value!r}")
    return value


def _need_real(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InputError(f"{what} must be a finite real, got {value!r}")
    return float(value)


def instance_from_dict(data) -> MultiCoverInstance:
    if not isinstance(data, dict):
        raise InputError("instance must be an object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise InputError(f"unknown instance field(s): {sorted(extra)}")
    points = []
    for raw in data.get("points", []):
        if not isinstance(raw, dict):
            raise InputError("point entries must be objects")
        if set(raw) - _POINT_KEYS:
            raise InputError(f"unknown point field(s): {sorted(set(raw) - _POINT_KEYS)}")
        pid = _need_int(raw.get("id"), "point id")
        demand = _need_int(raw.get("demand", 1), f"point {pid} demand")
        coords = None
        if "x" in raw or "y" in raw:
            if not ("x" in raw and "y" in raw):
                raise InputError(f"point {pid}: need both x and y")
            coords = (_need_real(raw["x"], "x"), _need_real(raw["y"], "y"))
        points.append(PointRecord(pid, demand, coords))
    ranges = []
    for raw in data.get("ranges", []):
        if not isinstance(raw, dict):
            raise InputError("range entries must be objects")
        if set(raw) - _RANGE_KEYS:
            raise InputError(f"unknown range field(s): {sorted(set(raw) - _RANGE_KEYS)}")
        rid = _need_int(raw.get("id"), "range id")
        if ("members" in raw) == ("halfplane" in raw):
            raise InputError(f"range {rid}: need exactly one of 'members' or 'halfplane'")
        if "members" in raw:
            members = [_need_int(m, f"range {rid} member") for m in raw["members"]]
            ranges.append(RangeRecord.explicit(rid, members))
        else:
            hp = raw["halfplane"]
            if not isinstance(hp, dict) or set(hp) != {"a", "b", "c"}:
                raise InputError(f"range {rid}: halfplane needs exactly a, b, c")
            a, b, c = (_need_real(hp[k], k) for k in "abc")
            try:
                ranges.append(RangeRecord.from_halfplane(rid, a, b, c))
            except ValueError as exc:
                raise InputError(f"range {rid}: {exc}") from None
    rep = data.get("repetition_allowed", False)
    if not isinstance(rep, bool):
        raise InputError("repetition_allowed must be a boolean")
    return MultiCoverInstance(tuple(points), tuple(ranges), rep)


def instance_to_dict(instance: MultiCoverInstance) -> dict:
    pts = []
    for p in instance.points:
        rec = {"id": int(p.id), "demand": int(p.demand)}
        if p.coords is not None:
            rec["x"], rec["y"] = float(p.coords[0]), float(p.coords[1])
        pts.append(rec)
    rngs = []
    for r in instance.ranges:
        if r.halfplane is not None:
            h = r.halfplane
            rngs.append({"id": int(r.id), "halfplane": {"a": h.a, "b": h.b, "c": h.c}})
        else:
            rngs.append({"id": int(r.id), "members": [int(m) for m in r.members]})
    return {"points": pts, "ranges": rngs, "repetition_allowed": instance.repetition_allowed}


def load_instance(path) -> MultiCoverInstance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data)


def dumps_instance(instance: MultiCoverInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1, sort_keys=True) + "\n"


def save_instance(instance: MultiCoverInstance, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_instance(instance))
