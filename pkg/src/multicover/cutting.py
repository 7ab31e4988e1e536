"""Random-sampling (1/r)-cuttings of weighted halfplanes.

A sample of about ``r`` boundary lines, drawn in proportion to weight, is
decomposed into vertical trapezoids.  A cell crossed by more than ``W/r``
weight has excess ``t = ceil(crossing / (W/r))`` and is re-decomposed from
a sample of size ``ceil(C_NET * t * ln(t + 1))`` of its own conflict list,
redrawn until every sub-cell is light enough.

Everything is computed in a rotated frame (angle stored on the cutting) in
which no boundary line is vertical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CuttingError, InputError
from .geometry import (
    BoundingBox,
    CellArray,
    Halfplane,
    Trapezoid,
    halfplane_arrays,
    rotate_points,
    trapezoidal_decomposition,
)
from .rng import stream

C_NET = 4
W_SCALE = 2**20
MAX_RESAMPLES = 100
# cell count <= C_CELLS * r^2.  Calibrated once (n = 200 unit halfplanes,
# r in {5, 10, 20}, seeds 1000-1049): max count / r^2 was 113.84; frozen
# at 150 for headroom.
C_CELLS = 150.0
_FRAME_ANGLES = (0.0, 0.3183098861837907, 0.7853981633974483, 1.2345678901234567, 2.0943951023931957)
_MIN_B = 1e-6


@dataclass(frozen=True)
class UnionComplexityProfile:
    name: str
    U: Callable[[float], float]
    d: int = 2

    def __call__(self, ell):
        return self.U(ell)

    @classmethod
    def halfplanes(cls):
        return cls("halfplanes", lambda ell: 2.0 * ell, 2)

    @classmethod
    def power(cls, k, d=2):
        return cls(f"power{k}", lambda ell: float(ell) ** k, d)


@dataclass(frozen=True)
class PatchRecord:
    parent: int  # index of the first-stage cell
    weight: float
    excess: int
    net_size: int
    attempts: int
    n_subcells: int


@dataclass
class Cutting:
    cells: list[Trapezoid]
    conflicts: list[tuple[int, ...]]
    crossing_weight: np.ndarray
    r: float
    W: float
    seed: int
    angle: float
    box: BoundingBox
    sample: tuple[int, ...] = ()
    first_stage_excess: list[int] = field(default_factory=list)
    patches: list[PatchRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.cells)

    @property
    def threshold(self):
        return self.W / self.r

    def to_frame(self, pts):
        return rotate_points(pts, self.angle)

    def summary(self):
        return {
            "cells": len(self.cells),
            "r": self.r,
            "W": self.W,
            "seed": self.seed,
            "angle": self.angle,
            "sample_size": len(self.sample),
            "max_crossing_weight": float(self.crossing_weight.max()) if len(self.cells) else 0.0,
            "patched_cells": len(self.patches),
            "max_excess": max(self.first_stage_excess, default=0),
        }


def choose_frame(H: Sequence[Halfplane]) -> float:
    """First angle from a fixed list at which no boundary line is near vertical."""
    for theta in _FRAME_ANGLES:
        if all(abs(h.rotated(theta).b) >= _MIN_B for h in H):
            return theta
    k = 7
    while True:
        theta = math.pi * k / 101.0
        if all(abs(h.rotated(theta).b) >= _MIN_B for h in H):
            return theta
        k += 1


def weighted_sample(weights: np.ndarray, size: int, rng) -> np.ndarray:
    """Distinct indices drawn proportionally to weight.

    Weights become integer multiplicities at resolution ``W_SCALE``; a random
    permutation of the items is then sampled systematically.
    """
    w = np.asarray(weights, dtype=float)
    live = np.nonzero(w > 0)[0]
    if size >= len(live):
        return live
    mult = np.maximum(1, np.rint(w[live] / w[live].sum() * W_SCALE)).astype(np.int64)
    perm = rng.permutation(len(live))
    cum = np.cumsum(mult[perm])
    step = cum[-1] / size
    picks = rng.random() * step + step * np.arange(size)
    idx = np.searchsorted(cum, picks, side="right")
    return np.unique(live[perm[np.minimum(idx, len(live) - 1)]])


def row_lists(mat) -> list[np.ndarray]:
    """Column indices of the true entries of each row."""
    rows, cols = np.nonzero(mat)
    return np.split(cols, np.searchsorted(rows, np.arange(1, mat.shape[0])))


def _crossing(cells, A, B, C, w):
    cross, _ = CellArray(cells).relations(A, B, C)
    return cross, cross.astype(float) @ w


def build_cutting(H: Sequence[Halfplane], r, seed=0, weights=None, points=None,
                  box: BoundingBox | None = None, max_resamples=MAX_RESAMPLES) -> Cutting:
    """A cutting whose cells are each crossed by at most ``W / r`` weight."""
    H = list(H)
    if not H:
        raise CuttingError("cannot build a cutting of an empty family")
    w = np.ones(len(H)) if weights is None else np.asarray(weights, dtype=float)
    if len(w) != len(H) or (w < 0).any() or not np.isfinite(w).all():
        raise InputError("weights must be finite, nonnegative and match the halfplanes")
    W = float(w.sum())
    if W <= 0:
        raise CuttingError("total weight must be positive")
    if not r >= 1:
        raise InputError(f"r must be >= 1, got {r}")
    theta = choose_frame(H)
    Hr = [h.rotated(theta) for h in H]
    pts = rotate_points(points, theta) if points is not None else np.zeros((0, 2))
    if box is None:
        box = BoundingBox.enclosing(pts, [Hr[i] for i in np.nonzero(w > 0)[0]])
    A, B, C = halfplane_arrays(Hr)
    thr = W / r
    limit = thr * (1 + 1e-9)

    rng = stream(seed, "cutting")
    sample = weighted_sample(w, math.ceil(r), rng)
    first = trapezoidal_decomposition([Hr[i] for i in sample], box, ids=sample)
    cross, cw = _crossing(first, A, B, C, w)
    cross_lists = row_lists(cross)

    cells, conflicts, weights_out, excess, patches = [], [], [], [], []
    for k, t in enumerate(first):
        if cw[k] <= limit:
            excess.append(0)
            cells.append(t)
            conflicts.append(tuple(cross_lists[k].tolist()))
            weights_out.append(cw[k])
            continue
        t_ex = math.ceil(cw[k] / thr)
        excess.append(t_ex)
        cl = cross_lists[k]
        size = math.ceil(C_NET * t_ex * math.log(t_ex + 1))
        prng = stream(seed, "patch", k)
        for attempt in range(1, max_resamples + 1):
            sub_idx = cl[weighted_sample(w[cl], size, prng)]
            sub = trapezoidal_decomposition([Hr[i] for i in sub_idx], t, ids=sub_idx)
            scross, scw = _crossing(sub, A[cl], B[cl], C[cl], w[cl])
            if (scw <= limit).all():
                break
        else:
            raise CuttingError(
                f"cell {k} (excess {t_ex}) not resolved after {max_resamples} resamples",
                {"cell": k, "weight": float(cw[k]), "excess": t_ex, "net_size": size})
        patches.append(PatchRecord(k, float(cw[k]), t_ex, size, attempt, len(sub)))
        for s, sl, sw in zip(sub, row_lists(scross), scw):
            cells.append(s)
            conflicts.append(tuple(cl[sl].tolist()))
            weights_out.append(sw)
    return Cutting(cells, conflicts, np.array(weights_out, dtype=float), float(r), W, seed, theta,
                   box, tuple(int(i) for i in sample), excess, patches)


@dataclass(frozen=True)
class CuttingCheck:
    ok: bool
    max_crossing: float
    witness: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_cutting(cut: Cutting, H: Sequence[Halfplane], r=None, weights=None, probes=1000) -> CuttingCheck:
    """Recompute conflict lists and check the weight bound and the partition property."""
    r = cut.r if r is None else r
    w = np.ones(len(H)) if weights is None else np.asarray(weights, dtype=float)
    W = float(w.sum())
    if not cut.cells:
        return CuttingCheck(False, 0.0, None, "no cells")
    Hr = [h.rotated(cut.angle) for h in H]
    cross, cw = _crossing(cut.cells, *halfplane_arrays(Hr), w)
    mx = float(cw.max())
    bad = np.nonzero(cw > W / r * (1 + 1e-9))[0]
    if len(bad):
        return CuttingCheck(False, mx, int(bad[0]), "crossing weight above W/r")
    for k, (got, cl) in enumerate(zip(row_lists(cross), cut.conflicts)):
        if tuple(got.tolist()) != tuple(cl):
            return CuttingCheck(False, mx, k, "stored conflict list differs from recomputation")
    cells = CellArray(cut.cells)
    area = float(cells.areas().sum())
    if abs(area - cut.box.area) > 1e-6 * cut.box.area:
        return CuttingCheck(False, mx, None, f"cell areas sum to {area}, box area {cut.box.area}")
    rng = stream(cut.seed, "verify")
    q = np.column_stack([rng.uniform(cut.box.xmin, cut.box.xmax, probes),
                         rng.uniform(cut.box.ymin, cut.box.ymax, probes)])
    scale = max(1.0, float(np.abs(cells.corners).max()))
    closed = cells.locate(q, tol=1e-9 * scale).sum(axis=1)
    strict = cells.locate(q, tol=-1e-9 * scale).sum(axis=1)
    if (closed < 1).any():
        return CuttingCheck(False, mx, None, "probe point outside every cell")
    if (strict > 1).any():
        return CuttingCheck(False, mx, None, "probe point inside two cells")
    return CuttingCheck(True, mx)


def cell_depths(cut: Cutting, H: Sequence[Halfplane], weights=None) -> np.ndarray:
    """Weight of the halfplanes containing each whole cell."""
    w = np.ones(len(H)) if weights is None else np.asarray(weights, dtype=float)
    Hr = [h.rotated(cut.angle) for h in H]
    _, cov = CellArray(cut.cells).relations(*halfplane_arrays(Hr))
    return cov.astype(float) @ w


def shallow_cell_count(cut: Cutting, H: Sequence[Halfplane], k, weights=None,
                       profile: UnionComplexityProfile | None = None):
    """Cells of depth at most ``k``, and the bound ``(r k / W + 1)^d * U(W / max(k, 1))``."""
    if k < 0:
        raise InputError("k must be >= 0")
    profile = profile or UnionComplexityProfile.halfplanes()
    depth = cell_depths(cut, H, weights)
    count = int((depth <= k + 1e-9).sum())
    bound = (cut.r * k / cut.W + 1) ** profile.d * profile(cut.W / max(k, 1))
    return count, bound


@dataclass
class DecayTable:
    ts: list[int]
    counts: list[list[int]]  # per seed, number of first-stage cells with excess >= t
    mean: list[float]
    exponent: float | None

    def to_dict(self):
        return {"t": self.ts, "counts": self.counts, "mean": self.mean, "exponent": self.exponent}


def excess_counts(excess, tmax):
    ex = np.asarray(excess, dtype=int)
    return [int((ex >= t).sum()) for t in range(1, tmax + 1)]


def decay_statistics(H: Sequence[Halfplane], r, seeds, weights=None, points=None) -> DecayTable:
    """Mean number of first-stage cells with excess at least ``t``, over seeds."""
    excesses = [build_cutting(H, r, s, weights, points).first_stage_excess for s in seeds]
    tmax = max([max(e, default=0) for e in excesses] + [1])
    counts = [excess_counts(e, tmax) for e in excesses]
    mean = np.mean(np.array(counts, dtype=float), axis=0) if counts else np.zeros(tmax)
    ts = list(range(1, tmax + 1))
    sel = [(t, m) for t, m in zip(ts, mean) if t >= 2 and m > 0]
    exponent = None
    if len(sel) >= 2:
        lt = np.log([t for t, _ in sel])
        lm = np.log([m for _, m in sel])
        exponent = float(-np.polyfit(lt, lm, 1)[0])
    return DecayTable(ts, counts, mean.tolist(), exponent)
