"""Multi-cover for halfplanes through a shallow cutting.

After the heavy ranges are taken, a cutting of the remaining LP-weighted
halfplanes is built so that every cell is crossed by weight at most 1/4.
Each cell inherits the largest residual demand of the points inside it, and
a halfplane covers a cell when it contains the whole (closed) cell.  The
abstract cell instance is rounded with a cx-sample of the doubled weights
and finished greedily; any cover of the cells covers the points.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .cutting import Cutting, UnionComplexityProfile, build_cutting
from .errors import InputError, InternalCheckError
from .geometry import CellArray, CONTAINS_TOL, halfplane_arrays
from .instance import (
    CoverSolution,
    MultiCoverInstance,
    PointRecord,
    RangeRecord,
    is_feasible_cover,
    residual,
    total_demand,
)
from .lp import FractionalSolution, LpOptions, solve_lp
from .rng import derive_seed
from .rounding import cx_sample, extract_heavy, greedy_complete

DEFAULT_C = 12.0
C_UNION = 12.0


@dataclass
class CellInstance:
    cut: Cutting
    instance: MultiCoverInstance  # point k = cell k (positive demand only); ranges keep their ids
    demand: np.ndarray  # per cell, including zero-demand cells
    point_cell: dict[int, int]
    cell_points: dict[int, tuple[int, ...]]
    weights: FractionalSolution  # doubled LP weights


@dataclass
class PipelineReport:
    f: float = 0.0
    f_prime: float = 0.0
    heavy: int = 0
    sample: int = 0
    residual_after_sample: int = 0
    completion: int = 0
    total: int = 0
    seed: int = 0
    c: float = 0.0
    beta: float = 0.0
    r: float = 0.0
    cells: int = 0
    demand_cells: int = 0
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _assign_cells(cells: CellArray, pts, contains, crossing, covering):
    """One cell per point.

    A point on a shared boundary goes to the first candidate cell for which
    every halfplane containing the point either covers or crosses the cell.
    """
    scale = max(1.0, float(np.abs(cells.corners).max())) if len(cells) else 1.0
    loc = cells.locate(pts, tol=CONTAINS_TOL * scale)
    out = []
    for k in range(len(pts)):
        cand = np.nonzero(loc[k])[0]
        if not len(cand):
            raise InternalCheckError(f"point {pts[k].tolist()} lies in no cell of the cutting")
        pick = int(cand[0])
        if len(cand) > 1:
            hs = contains[k]
            for cidx in cand:
                if (covering[cidx, hs] | crossing[cidx, hs]).all():
                    pick = int(cidx)
                    break
        out.append(pick)
    return out


def induced_cell_instance(cut: Cutting, R: MultiCoverInstance, x: FractionalSolution,
                          tol=1e-9) -> CellInstance:
    """Cell instance of the residual system ``R`` and the check that ``2x`` covers it."""
    cells = CellArray(cut.cells)
    H = [R.halfplane(i).rotated(cut.angle) for i in R.range_ids]
    if H:
        crossing, covering = cells.relations(*halfplane_arrays(H))
    else:
        crossing = covering = np.zeros((len(cells), 0), dtype=bool)
    pts = cut.to_frame(R.coords) if R.points else np.zeros((0, 2))
    assign = _assign_cells(cells, pts, R.incidence, crossing, covering)
    demand = np.zeros(len(cells), dtype=np.int64)
    cell_points: dict[int, list[int]] = {}
    for p, k in zip(R.points, assign):
        demand[k] = max(demand[k], p.demand)
        cell_points.setdefault(k, []).append(p.id)
    live = np.nonzero(demand > 0)[0]
    points = tuple(PointRecord(int(k), int(demand[k])) for k in live)
    ranges = tuple(
        RangeRecord(rid, members=tuple(int(k) for k in live[covering[live, j]]))
        for j, rid in enumerate(R.range_ids))
    inst = MultiCoverInstance(points, ranges)
    xhat = FractionalSolution.from_weights({i: 2 * float(x.get(i, 0.0)) for i in R.range_ids},
                                           x.tolerance, x.method)
    w = np.array([xhat.x[i] for i in R.range_ids])
    got = covering[live].astype(float) @ w if len(live) else np.zeros(0)
    short = np.nonzero(got < demand[live] - tol)[0]
    if len(short):
        k = int(live[short[0]])
        raise InternalCheckError(
            f"cell {k} has demand {int(demand[k])} but doubled weight {got[short[0]]:.6g} covers it")
    return CellInstance(cut, inst, demand, dict(zip(R.point_ids, assign)),
                        {k: tuple(v) for k, v in cell_points.items()}, xhat)


def _require_geometric(instance):
    if instance.ranges and not instance.is_geometric:
        raise InputError("the cutting pipeline needs halfplane ranges")
    if instance.repetition_allowed:
        raise InputError("the cutting pipeline does not support repetition")


def _run(instance: MultiCoverInstance, rate, seed, lp_opts, x=None):
    """The pipeline with multiplier ``c = rate(f)`` and ``beta = 1 / (2c)``."""
    _require_geometric(instance)
    report = PipelineReport(seed=seed)
    if total_demand(instance) == 0:
        return CoverSolution.of(()), report
    clock = time.perf_counter()
    x = x if x is not None else solve_lp(instance, lp_opts)
    report.f = f = float(x.value)
    report.timings["lp"] = time.perf_counter() - clock
    report.c = c = float(rate(f))
    report.beta = beta = 1.0 / (2.0 * c)

    heavy, light = extract_heavy(x, beta)
    if len(heavy) > f / beta + 1e-6:
        raise InternalCheckError(f"{len(heavy)} heavy ranges exceed f / beta = {f / beta}")
    report.heavy = len(heavy)
    R = residual(instance, heavy)
    light = light.restrict(R.range_ids)
    report.f_prime = fp = float(light.value)
    sample = completion = ()
    if R.points:
        clock = time.perf_counter()
        live = [i for i in R.range_ids if light.x[i] > 0]
        r = max(1.0, 4.0 * fp)
        cut = build_cutting([R.halfplane(i) for i in live], r, seed=derive_seed(seed, "cutting"),
                            weights=[light.x[i] for i in live], points=R.coords)
        report.r, report.cells = r, len(cut)
        report.timings["cutting"] = time.perf_counter() - clock
        clock = time.perf_counter()
        cell = induced_cell_instance(cut, R, light)
        report.demand_cells = len(cell.instance.points)
        sample = cx_sample(cell.instance, cell.weights, c, derive_seed(seed, "cx"))
        rest = residual(cell.instance, sample)
        report.residual_after_sample = total_demand(rest)
        completion = greedy_complete(rest).chosen
        if len(completion) > report.residual_after_sample:
            raise InternalCheckError("greedy completion larger than the residual demand")
        report.timings["rounding"] = time.perf_counter() - clock
    cover = CoverSolution.of(tuple(heavy) + tuple(sample) + tuple(completion))
    if cover.has_duplicates():
        raise InternalCheckError("range pools overlap")
    check = is_feasible_cover(instance, cover)
    if not check:
        raise InternalCheckError(f"pipeline output infeasible: {check.deficits}")
    report.sample, report.completion, report.total = len(sample), len(completion), len(cover)
    return cover, report


def solve_multicover_geometric(instance: MultiCoverInstance, c=DEFAULT_C, seed=0,
                               lp_opts: LpOptions | None = None, x: FractionalSolution | None = None):
    """Cover of a halfplane instance; returns ``(cover, report)``.

    ``x`` may supply any feasible fractional solution instead of the LP optimum.
    """
    if c < 4:
        raise InputError("c must be >= 4")
    return _run(instance, lambda f: c, seed, lp_opts, x)


def union_rate(profile: UnionComplexityProfile, f, C_u=C_UNION):
    """Sampling multiplier ``C_u * max(1, ln(U(f) / f))``."""
    if f <= 0:
        return C_u
    return C_u * max(1.0, math.log(profile(f) / f))


def solve_multicover_union(instance: MultiCoverInstance, profile: UnionComplexityProfile | None = None,
                           seed=0, C_u=C_UNION, lp_opts: LpOptions | None = None,
                           x: FractionalSolution | None = None):
    """Same pipeline with the sampling rate driven by a union-complexity profile.

    For halfplanes ``U(l) = 2l`` gives ``ln 2 < 1``, so the rate is ``C_u``
    and the output matches ``solve_multicover_geometric`` with ``c = C_u``.
    """
    profile = profile or UnionComplexityProfile.halfplanes()
    return _run(instance, lambda f: union_rate(profile, f, C_u), seed, lp_opts, x)
