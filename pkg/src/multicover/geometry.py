"""Planar kernel for halfplane ranges.

Halfplanes are closed regions ``a*x + b*y <= c`` with ``(a, b)`` of unit
length.  Arrangements of their boundary lines are decomposed into vertical
trapezoids inside a bounding region; a trapezoid is described by its two
wall abscissas and its bottom and top supporting lines.

The decomposition is computed slab by slab (between consecutive vertex
abscissas the lines do not cross) and consecutive slab pieces bounded by the
same pair of lines are merged.  Merging by boundary pair is exactly the
vertical decomposition: walls only survive where a vertex touches a piece.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

CONTAINS_TOL = 1e-9
DET_EPS = 1e-12
# crossing/covering tests scale this by the magnitude of the corner coordinates
CELL_TOL = 1e-9
BOX_BOTTOM = -1
BOX_TOP = -2


@dataclass(frozen=True)
class Halfplane:
    """Closed halfplane ``a*x + b*y <= c``; also used as its boundary line."""

    a: float
    b: float
    c: float

    @classmethod
    def normalized(cls, a, b, c):
        a, b, c = float(a), float(b), float(c)
        if not all(math.isfinite(v) for v in (a, b, c)):
            raise ValueError("halfplane coefficients must be finite")
        n = math.hypot(a, b)
        if n == 0.0:
            raise ValueError("halfplane normal (a, b) must be nonzero")
        if abs(n - 1.0) <= 1e-12:
            # already unit length: keep the bits so saved files round-trip exactly
            return cls(a, b, c)
        return cls(a / n, b / n, c / n)

    @classmethod
    def horizontal(cls, y):
        """The line ``y = const`` (as the halfplane below it)."""
        return cls(0.0, 1.0, float(y))

    def value(self, x, y):
        return self.a * x + self.b * y - self.c

    def contains(self, p) -> bool:
        return self.a * p[0] + self.b * p[1] <= self.c + CONTAINS_TOL

    def contains_many(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ np.array([self.a, self.b]) <= self.c + CONTAINS_TOL

    @property
    def is_vertical(self):
        return abs(self.b) < DET_EPS

    def y_at(self, x):
        return (self.c - self.a * x) / self.b

    def line_key(self, digits=12):
        """Hashable key identifying the boundary line regardless of side."""
        a, b, c = self.a, self.b, self.c
        if b < 0 or (b == 0 and a < 0):
            a, b, c = -a, -b, -c
        return (round(a, digits) + 0.0, round(b, digits) + 0.0, round(c, digits) + 0.0)

    def rotated(self, theta):
        """The same halfplane expressed in coordinates rotated by ``theta``."""
        ct, st = math.cos(theta), math.sin(theta)
        return Halfplane(ct * self.a - st * self.b, st * self.a + ct * self.b, self.c)


def halfplane_arrays(H: Sequence[Halfplane]):
    A = np.array([h.a for h in H], dtype=float)
    B = np.array([h.b for h in H], dtype=float)
    C = np.array([h.c for h in H], dtype=float)
    return A, B, C


def rotate_points(pts, theta):
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    ct, st = math.cos(theta), math.sin(theta)
    return pts @ np.array([[ct, st], [-st, ct]])


def line_intersection(h1: Halfplane, h2: Halfplane):
    """Intersection point of two boundary lines, or None when parallel.

    Near-singular determinants are re-evaluated in exact rational arithmetic
    on the stored float coefficients.
    """
    det = h1.a * h2.b - h2.a * h1.b
    if abs(det) < DET_EPS:
        a1, b1, c1 = (Fraction(v) for v in (h1.a, h1.b, h1.c))
        a2, b2, c2 = (Fraction(v) for v in (h2.a, h2.b, h2.c))
        qdet = a1 * b2 - a2 * b1
        if qdet == 0:
            return None
        return (float((c1 * b2 - c2 * b1) / qdet), float((a1 * c2 - a2 * c1) / qdet))
    return ((h1.c * h2.b - h2.c * h1.b) / det, (h1.a * h2.c - h2.a * h1.c) / det)


def pairwise_intersections(H: Sequence[Halfplane]) -> np.ndarray:
    """All finite pairwise intersection points of the boundary lines."""
    if len(H) < 2:
        return np.zeros((0, 2))
    A, B, C = halfplane_arrays(H)
    i, j = np.triu_indices(len(H), k=1)
    det = A[i] * B[j] - A[j] * B[i]
    good = np.abs(det) >= DET_EPS
    x = (C[i] * B[j] - C[j] * B[i])[good] / det[good]
    y = (A[i] * C[j] - A[j] * C[i])[good] / det[good]
    pts = [np.column_stack([x, y])]
    for a, b in zip(i[~good], j[~good]):
        p = line_intersection(H[a], H[b])
        if p is not None:
            pts.append(np.array([p]))
    return np.vstack(pts)


def point_depth(p, H: Sequence[Halfplane], weights=None) -> float:
    """Total weight of the halfplanes containing ``p`` (linear scan)."""
    if weights is None:
        weights = [1.0] * len(H)
    return float(sum(w for h, w in zip(H, weights) if h.contains(p)))


@dataclass(frozen=True)
class BoundingBox:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @classmethod
    def enclosing(cls, points=(), lines: Sequence[Halfplane] = (), inflate=0.1):
        """Box around the points and all pairwise line intersections, grown by ``inflate``."""
        pts = [np.asarray(points, dtype=float).reshape(-1, 2), pairwise_intersections(list(lines))]
        pts = np.vstack(pts)
        if len(pts) == 0:
            pts = np.array([[0.0, 0.0], [1.0, 1.0]])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        span = np.maximum(hi - lo, 1e-6 * max(1.0, float(np.abs(pts).max())))
        span = np.maximum(span, 1e-9)
        lo, hi = lo - inflate * span, hi + inflate * span
        return cls(float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))

    @property
    def area(self):
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def contains(self, p):
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def as_trapezoid(self):
        return Trapezoid(self.xmin, self.xmax, Halfplane.horizontal(self.ymin),
                         Halfplane.horizontal(self.ymax), BOX_BOTTOM, BOX_TOP)


@dataclass(frozen=True)
class Trapezoid:
    """Region ``xl <= x <= xr`` between the bottom and top lines."""

    xl: float
    xr: float
    bottom: Halfplane
    top: Halfplane
    bottom_id: int = BOX_BOTTOM
    top_id: int = BOX_TOP

    @cached_property
    def corners(self) -> np.ndarray:
        """Counter-clockwise: lower-left, lower-right, upper-right, upper-left."""
        return np.array([
            [self.xl, self.bottom.y_at(self.xl)],
            [self.xr, self.bottom.y_at(self.xr)],
            [self.xr, self.top.y_at(self.xr)],
            [self.xl, self.top.y_at(self.xl)],
        ])

    @property
    def area(self):
        k = self.corners
        return 0.5 * (self.xr - self.xl) * ((k[3, 1] - k[0, 1]) + (k[2, 1] - k[1, 1]))

    @property
    def is_sliver(self):
        return self.xr - self.xl <= DET_EPS * max(1.0, abs(self.xl), abs(self.xr))

    def contains_point(self, p, tol=CONTAINS_TOL):
        x, y = p
        if x < self.xl - tol or x > self.xr + tol:
            return False
        return self.bottom.y_at(x) - tol <= y <= self.top.y_at(x) + tol

    def sample_interior(self, rng, k) -> np.ndarray:
        u = rng.uniform(0.02, 0.98, size=k)
        v = rng.uniform(0.02, 0.98, size=k)
        x = self.xl + u * (self.xr - self.xl)
        yb = self.bottom.y_at(x)
        yt = self.top.y_at(x)
        return np.column_stack([x, yb + v * (yt - yb)])


class CellArray:
    """Corner coordinates of many trapezoids, for vectorized tests."""

    def __init__(self, cells: Sequence[Trapezoid]):
        self.cells = list(cells)
        K = len(self.cells)
        self.xs = np.array([(t.xl, t.xr) for t in self.cells], dtype=float).reshape(K, 2)
        bot = np.array([(t.bottom.a, t.bottom.b, t.bottom.c) for t in self.cells], dtype=float).reshape(K, 3)
        top = np.array([(t.top.a, t.top.b, t.top.c) for t in self.cells], dtype=float).reshape(K, 3)
        xl, xr = self.xs[:, 0], self.xs[:, 1]

        def y(line, x):
            return (line[:, 2] - line[:, 0] * x) / line[:, 1]

        self.corners = np.stack([
            np.column_stack([xl, y(bot, xl)]),
            np.column_stack([xr, y(bot, xr)]),
            np.column_stack([xr, y(top, xr)]),
            np.column_stack([xl, y(top, xl)]),
        ], axis=1)
        self.tol = CELL_TOL * np.maximum(1.0, np.abs(self.corners).max(axis=2))  # (K, 4)

    def __len__(self):
        return len(self.cells)

    def side_values(self, A, B, C) -> np.ndarray:
        """``(K, 4, n)`` values of ``a*x + b*y - c`` at every corner."""
        return _side_values_slice(self, A, B, C, 0, len(self))

    def relations(self, A, B, C, chunk=4096):
        """Boolean ``(crossing, covering)`` matrices of shape ``(K, n)``.

        A halfplane crosses a cell when corners lie strictly on both sides of
        its boundary line; it covers the cell when every corner is inside.
        """
        K, n = len(self), len(A)
        crossing = np.zeros((K, n), dtype=bool)
        covering = np.zeros((K, n), dtype=bool)
        for s in range(0, K, chunk):
            e = min(K, s + chunk)
            vals = _side_values_slice(self, A, B, C, s, e)
            tol = self.tol[s:e, :, None]
            above = (vals > tol).any(axis=1)
            below = (vals < -tol).any(axis=1)
            crossing[s:e] = above & below
            covering[s:e] = ~above
        return crossing, covering

    def locate(self, pts, tol=CONTAINS_TOL):
        """Boolean ``(npts, K)``: point lies in the closed cell (with tolerance)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.zeros((len(pts), len(self)), dtype=bool)
        if not len(self) or not len(pts):
            return out
        xl, xr = self.xs[:, 0], self.xs[:, 1]
        width = np.where(xr > xl, xr - xl, 1.0)
        for k, (x, y) in enumerate(pts):
            idx = np.nonzero((xl - tol <= x) & (x <= xr + tol))[0]
            if not len(idx):
                continue
            t = np.clip((x - xl[idx]) / width[idx], 0.0, 1.0)
            c = self.corners[idx]
            yb = c[:, 0, 1] + t * (c[:, 1, 1] - c[:, 0, 1])
            yt = c[:, 3, 1] + t * (c[:, 2, 1] - c[:, 3, 1])
            ok = (yb - tol <= y) & (y <= yt + tol)
            out[k, idx[ok]] = True
        return out

    def areas(self):
        c = self.corners
        return 0.5 * (self.xs[:, 1] - self.xs[:, 0]) * ((c[:, 3, 1] - c[:, 0, 1]) + (c[:, 2, 1] - c[:, 1, 1]))


def _side_values_slice(cells, A, B, C, s, e):
    X = cells.corners[s:e, :, 0:1]
    Y = cells.corners[s:e, :, 1:2]
    return X * A[None, None, :] + Y * B[None, None, :] - C[None, None, :]


def conflict_list(t: Trapezoid, H: Sequence[Halfplane]) -> list[int]:
    """Indices of the halfplanes whose boundary line meets the open interior of ``t``."""
    if not H:
        return []
    crossing, _ = CellArray([t]).relations(*halfplane_arrays(H))
    return np.nonzero(crossing[0])[0].tolist()


def cell_depth(t: Trapezoid, H: Sequence[Halfplane], weights=None) -> float:
    """Weight of the halfplanes containing all of ``t``; crossing ones count 0."""
    if not H:
        return 0.0
    w = np.ones(len(H)) if weights is None else np.asarray(weights, dtype=float)
    _, covering = CellArray([t]).relations(*halfplane_arrays(H))
    return float(w[covering[0]].sum())


def _unique_lines(lines, ids):
    seen = {}
    out_l, out_i = [], []
    for h, i in zip(lines, ids):
        key = h.line_key()
        if key in seen:
            log.debug("line %s coincides with line %s; dropped from decomposition", i, seen[key])
            continue
        seen[key] = i
        out_l.append(h)
        out_i.append(i)
    return out_l, out_i


def trapezoidal_decomposition(lines: Sequence[Halfplane], region, ids=None) -> list[Trapezoid]:
    """Vertical decomposition of the boundary lines of ``lines`` inside ``region``.

    ``region`` is a ``BoundingBox`` or a ``Trapezoid``.  ``ids`` labels the
    lines (default: their positions) and ends up in ``bottom_id``/``top_id``
    of the output cells.  Coincident lines are merged; vertical lines are
    rejected, callers rotate the frame first.
    """
    if isinstance(region, BoundingBox):
        region = region.as_trapezoid()
    lines = list(lines)
    ids = list(range(len(lines))) if ids is None else [int(i) for i in ids]
    if any(h.is_vertical for h in lines):
        raise ValueError("vertical boundary line; rotate the frame before decomposing")
    lines, ids = _unique_lines(lines, ids)
    if lines:
        crossing, _ = CellArray([region]).relations(*halfplane_arrays(lines))
        keep = np.nonzero(crossing[0])[0]
        lines = [lines[k] for k in keep]
        ids = [ids[k] for k in keep]
    if not lines:
        return [region]

    by_id = {i: h for h, i in zip(lines, ids)}
    by_id[region.bottom_id] = region.bottom
    by_id[region.top_id] = region.top
    A, B, C = halfplane_arrays(lines)
    ids_arr = np.array(ids)
    xl, xr = region.xl, region.xr
    bot, top = region.bottom, region.top
    scale = max(1.0, abs(xl), abs(xr))

    events = [np.array([xl, xr])]
    for bound in (bot, top):
        det = A * bound.b - bound.a * B
        ok = np.abs(det) >= DET_EPS
        x = (C[ok] * bound.b - bound.c * B[ok]) / det[ok]
        events.append(x[(x > xl) & (x < xr)])
    if len(lines) > 1:
        i, j = np.triu_indices(len(lines), k=1)
        det = A[i] * B[j] - A[j] * B[i]
        ok = np.abs(det) >= DET_EPS
        i, j, det = i[ok], j[ok], det[ok]
        x = (C[i] * B[j] - C[j] * B[i]) / det
        y = (A[i] * C[j] - A[j] * C[i]) / det
        inside = (x > xl) & (x < xr)
        x, y = x[inside], y[inside]
        inside = (y > bot.y_at(x)) & (y < top.y_at(x))
        events.append(x[inside])
    xs = np.unique(np.concatenate(events))
    # collapse numerically coincident abscissas
    keep = np.concatenate([[True], np.diff(xs) > DET_EPS * scale])
    xs = xs[keep]
    xs[0], xs[-1] = xl, xr
    if len(xs) < 2:
        return [region]

    mids = 0.5 * (xs[:-1] + xs[1:])
    Y = (C[None, :] - A[None, :] * mids[:, None]) / B[None, :]
    yb = bot.y_at(mids)
    yt = top.y_at(mids)

    xs_list = xs.tolist()
    out = []
    open_pieces: dict[tuple[int, int], float] = {}

    def close(pair, start, end):
        out.append(Trapezoid(start, end, by_id[pair[0]], by_id[pair[1]], pair[0], pair[1]))

    for k in range(len(mids)):
        row = Y[k]
        inside = np.nonzero((row > yb[k]) & (row < yt[k]))[0]
        order = inside[np.argsort(row[inside], kind="stable")]
        labels = [region.bottom_id] + ids_arr[order].tolist() + [region.top_id]
        pairs = set(zip(labels[:-1], labels[1:]))
        for pair in [p for p in open_pieces if p not in pairs]:
            close(pair, open_pieces.pop(pair), xs_list[k])
        for pair in pairs:
            if pair not in open_pieces:
                open_pieces[pair] = xs_list[k]
    for pair, start in open_pieces.items():
        close(pair, start, xs_list[-1])
    out.sort(key=lambda t: (t.xl, t.bottom.y_at(t.xl) + t.top.y_at(t.xl)))
    return out


def union_boundary_edges(H: Sequence[Halfplane], box: BoundingBox) -> int:
    """Number of boundary edges of the union of ``H`` inside ``box``.

    The complement of a union of halfplanes is the convex intersection of
    the complementary halfplanes, so the union boundary is the part of that
    polygon's boundary lying on the halfplane lines.
    """
    poly = [(box.xmin, box.ymin), (box.xmax, box.ymin), (box.xmax, box.ymax), (box.xmin, box.ymax)]
    tags = [None] * 4
    for idx, h in enumerate(H):
        comp = Halfplane(-h.a, -h.b, -h.c)
        poly, tags = _clip(poly, tags, comp, idx)
        if not poly:
            return 0
    return sum(1 for t in tags if t is not None)


def _clip(poly, tags, h, idx):
    """Sutherland-Hodgman clip; ``tags[k]`` labels the edge from vertex k to k+1."""
    out, out_tags = [], []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        vp, vq = h.value(*p), h.value(*q)
        if vp <= 0:
            out.append(p)
            if vq <= 0:
                out_tags.append(tags[k])
            else:
                t = vp / (vp - vq)
                out_tags.append(tags[k])
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
                out_tags.append(idx)
        elif vq <= 0:
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
            out_tags.append(tags[k])
    if len(out) < 3:
        return [], []
    return out, out_tags


def write_svg(path, cells: Sequence[Trapezoid], points=None, box: BoundingBox | None = None, size=800):
    """Debug drawing of a decomposition (and optionally points)."""
    cells = list(cells)
    if box is None:
        allc = np.vstack([t.corners for t in cells]) if cells else np.zeros((1, 2))
        box = BoundingBox(allc[:, 0].min(), allc[:, 0].max(), allc[:, 1].min(), allc[:, 1].max())
    sx = size / max(box.xmax - box.xmin, 1e-12)
    sy = size / max(box.ymax - box.ymin, 1e-12)

    def tr(x, y):
        return (x - box.xmin) * sx, size - (y - box.ymin) * sy

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for t in cells:
        pts = " ".join("%.3f,%.3f" % tr(x, y) for x, y in t.corners)
        parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="0.5"/>')
    if points is not None:
        for x, y in np.asarray(points).reshape(-1, 2):
            cx, cy = tr(x, y)
            parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="2" fill="red"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
