from fractions import Fraction

import numpy as np
import pytest

from helpers import random_lines
from multicover.geometry import (
    BoundingBox,
    CellArray,
    Halfplane,
    Trapezoid,
    cell_depth,
    conflict_list,
    line_intersection,
    point_depth,
    rotate_points,
    trapezoidal_decomposition,
    union_boundary_edges,
    write_svg,
)

UNIT = BoundingBox(0.0, 1.0, 0.0, 1.0)


def test_contains_examples():
    h = Halfplane.normalized(1, 0, 0)
    assert h.contains((-1, 5))
    assert not h.contains((1, 0))
    assert h.contains((0, 3))  # closed


def test_contains_matches_rational_evaluation():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a, b, c, x, y = (Fraction(int(v), 8) for v in rng.integers(-40, 40, 5))
        if a == 0 and b == 0:
            continue
        h = Halfplane(float(a), float(b), float(c))  # dyadic inputs are exact in floats
        assert h.contains((float(x), float(y))) == (a * x + b * y <= c)


def test_normalization():
    h = Halfplane.normalized(3, 4, 10)
    assert (h.a, h.b, h.c) == pytest.approx((0.6, 0.8, 2.0))
    assert abs(np.hypot(h.a, h.b) - 1) <= 1e-12
    with pytest.raises(ValueError):
        Halfplane.normalized(0, 0, 1)
    with pytest.raises(ValueError):
        Halfplane.normalized(float("nan"), 1, 1)


def test_point_depth():
    H = [Halfplane.normalized(1, 0, 0), Halfplane.normalized(0, 1, 0), Halfplane.normalized(-1, 0, -5)]
    assert point_depth((10, 10), H[:2]) == 0
    assert point_depth((-1, -1), H, [0.3, 0.5, 1.0]) == pytest.approx(0.8)
    rng = np.random.default_rng(2)
    H = random_lines(30, 2)
    w = rng.random(30)
    for p in rng.random((50, 2)):
        want = sum(wi for h, wi in zip(H, w) if h.a * p[0] + h.b * p[1] <= h.c + 1e-9)
        assert point_depth(p, H, w) == pytest.approx(want)


def test_decomposition_of_nothing_is_the_box():
    cells = trapezoidal_decomposition([], UNIT)
    assert len(cells) == 1
    assert cells[0].area == pytest.approx(1.0)


def test_single_line_gives_two_cells():
    cells = trapezoidal_decomposition([Halfplane.normalized(-0.3, 1, 0.4)], UNIT)
    assert len(cells) == 2
    assert sum(t.area for t in cells) == pytest.approx(1.0)


def test_line_outside_box_ignored():
    assert len(trapezoidal_decomposition([Halfplane.normalized(0.1, 1, 5)], UNIT)) == 1


def test_two_crossing_lines():
    H = [Halfplane.normalized(-1, 1, 0), Halfplane.normalized(1, 1, 1)]
    cells = trapezoidal_decomposition(H, UNIT)
    # the crossing at x = 1/2 adds one wall: 2 cells left of it, 2 right, plus the two wedges
    assert sum(t.area for t in cells) == pytest.approx(1.0)
    assert len(cells) == 6


def test_coincident_lines_merged():
    h = Halfplane.normalized(-0.3, 1, 0.4)
    flipped = Halfplane(-h.a, -h.b, -h.c)
    assert len(trapezoidal_decomposition([h, flipped, h], UNIT)) == 2


def test_vertical_line_rejected():
    with pytest.raises(ValueError):
        trapezoidal_decomposition([Halfplane.normalized(1, 0, 0.5)], UNIT)


@pytest.mark.parametrize("seed", range(10))
def test_random_decomposition_partitions_box(seed):
    rng = np.random.default_rng(seed)
    H = random_lines(int(rng.integers(1, 21)), seed)
    box = BoundingBox.enclosing(np.array([[0, 0], [1, 1]]), H)
    cells = trapezoidal_decomposition(H, box)
    areas = np.array([t.area for t in cells])
    assert (areas >= 0).all()
    assert areas.sum() == pytest.approx(box.area, rel=1e-6)
    for t in cells:
        pts = t.sample_interior(rng, 100)
        for h in H:
            side = pts @ np.array([h.a, h.b]) - h.c
            assert (side < 0).all() or (side > 0).all()
    assert len(cells) <= 3 * (len(H) + 1) ** 2


def test_decomposition_of_a_trapezoid_stays_inside():
    outer = trapezoidal_decomposition([Halfplane.normalized(-0.2, 1, 0.5)], UNIT)[0]
    H = random_lines(8, 5)
    sub = trapezoidal_decomposition(H, outer)
    assert sum(t.area for t in sub) == pytest.approx(outer.area, rel=1e-9)


def test_bounding_box_encloses_points_and_crossings():
    H = random_lines(10, 1)
    pts = np.random.default_rng(1).random((20, 2))
    box = BoundingBox.enclosing(pts, H)
    for p in pts:
        assert box.xmin < p[0] < box.xmax and box.ymin < p[1] < box.ymax
    for i in range(len(H)):
        for j in range(i + 1, len(H)):
            q = line_intersection(H[i], H[j])
            assert q is None or box.contains(q)


def test_line_intersection_parallel_and_exact():
    assert line_intersection(Halfplane(0, 1, 0), Halfplane(0, 1, 1)) is None
    q = line_intersection(Halfplane.normalized(1, 1, 1), Halfplane.normalized(1, -1, 0))
    assert q == pytest.approx((0.5, 0.5))


def test_conflict_list_boundary_cases():
    box = UNIT.as_trapezoid()
    far = Halfplane.normalized(0.1, 1, 5)
    top = Halfplane.horizontal(1.0)
    mid = Halfplane.normalized(-0.1, 1, 0.5)
    assert conflict_list(box, [far, top, mid]) == [2]


def test_conflict_list_matches_sampling_detector():
    rng = np.random.default_rng(9)
    H = random_lines(12, 9)
    cells = trapezoidal_decomposition(H[:4], UNIT)
    others = H[4:]
    for t in cells:
        u, v = rng.random(4000), rng.random(4000)
        x = t.xl + u * (t.xr - t.xl)
        yb, yt = t.bottom.y_at(x), t.top.y_at(x)
        pts = np.column_stack([x, yb + v * (yt - yb)])
        want = set()
        for k, h in enumerate(others):
            side = pts @ np.array([h.a, h.b]) - h.c
            if (side < 0).any() and (side > 0).any():
                want.add(k)
        got = set(conflict_list(t, others))
        # sampling can only miss crossings that clip a thin corner
        assert want <= got
        for k in got - want:
            vals = t.corners @ np.array([others[k].a, others[k].b]) - others[k].c
            assert min(-vals.min(), vals.max()) < 0.05 * np.ptp(t.corners)


def test_cell_depth_examples():
    cell = Trapezoid(0.0, 1.0, Halfplane.horizontal(0.0), Halfplane.horizontal(1.0))
    assert cell_depth(cell, [Halfplane.normalized(1, 0, -5)]) == 0
    H = [Halfplane.normalized(1, 0, 5), Halfplane.normalized(0, 1, 5), Halfplane.normalized(-0.2, 1, 0.5)]
    assert cell_depth(cell, H) == 2


def test_cell_depth_interior_envelope():
    rng = np.random.default_rng(6)
    H = random_lines(25, 6)
    w = rng.random(25)
    cells = trapezoidal_decomposition(H[:6], UNIT)
    for t in cells:
        pts = t.sample_interior(rng, 200)
        dmin = min(point_depth(p, H, w) for p in pts)
        cross = sum(w[k] for k in conflict_list(t, H))
        assert cell_depth(t, H, w) <= dmin + 1e-9
        assert cell_depth(t, H, w) >= dmin - cross - 1e-9


def test_locate_and_relations_vectorized():
    H = random_lines(6, 3)
    cells = trapezoidal_decomposition(H, UNIT)
    arr = CellArray(cells)
    pts = np.random.default_rng(3).random((300, 2))
    loc = arr.locate(pts)
    assert (loc.sum(axis=1) >= 1).all()
    for k, p in enumerate(pts):
        assert loc[k].tolist() == [t.contains_point(p) for t in cells]


def test_rotation_preserves_membership():
    rng = np.random.default_rng(4)
    H = random_lines(10, 4)
    pts = rng.random((30, 2))
    for theta in (0.3, 1.1, 2.5):
        rp = rotate_points(pts, theta)
        for h in H:
            assert (h.contains_many(pts) == h.rotated(theta).contains_many(rp)).all()


def test_union_boundary_edges():
    box = BoundingBox(-1, 1, -1, 1)
    assert union_boundary_edges([Halfplane.normalized(0, 1, 0)], box) == 1
    quad = [Halfplane.normalized(1, 0, -0.5), Halfplane.normalized(-1, 0, -0.5),
            Halfplane.normalized(0, 1, -0.5), Halfplane.normalized(0, -1, -0.5)]
    assert union_boundary_edges(quad, box) == 4
    assert union_boundary_edges([Halfplane.normalized(0, 1, 5)], box) == 0


def test_write_svg(tmp_path):
    cells = trapezoidal_decomposition(random_lines(3, 0), UNIT)
    path = tmp_path / "c.svg"
    write_svg(path, cells, np.array([[0.5, 0.5]]), UNIT)
    text = path.read_text()
    assert text.startswith("<svg") and text.count("<polygon") == len(cells) and "<circle" in text
