import math

import numpy as np
import pytest

from nethil.coord.geometry import OrientedRect, obb_intersect, obb_intersect_matrix, rect_hits_box


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 <= 0 and d3 * d4 <= 0


def _inside(point, rect: OrientedRect) -> bool:
    c, s = math.cos(rect.angle), math.sin(rect.angle)
    dx, dy = point[0] - rect.cx, point[1] - rect.cy
    return abs(dx * c + dy * s) <= rect.half_length and abs(-dx * s + dy * c) <= rect.half_width


def _polygon_oracle(a: OrientedRect, b: OrientedRect) -> bool:
    ca, cb = a.corners(), b.corners()
    if any(_inside(p, b) for p in ca) or any(_inside(p, a) for p in cb):
        return True
    return any(
        _segments_cross(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]) for i in range(4) for j in range(4)
    )


def _random_rect(rng) -> OrientedRect:
    return OrientedRect(
        float(rng.uniform(-4, 4)), float(rng.uniform(-4, 4)),
        float(rng.uniform(0.2, 3)), float(rng.uniform(0.1, 1.5)), float(rng.uniform(-math.pi, math.pi)),
    )


def test_agrees_with_polygon_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        a, b = _random_rect(rng), _random_rect(rng)
        assert obb_intersect(a, b) == _polygon_oracle(a, b)


def test_axis_aligned_reduces_to_interval_overlap():
    a = OrientedRect(0, 0, 1, 1, 0)
    assert obb_intersect(a, OrientedRect(1.9, 0, 1, 1, 0))
    assert not obb_intersect(a, OrientedRect(2.1, 0, 1, 1, 0))


def test_touching_counts():
    a = OrientedRect(0, 0, 1, 0.5, 0)
    assert obb_intersect(a, OrientedRect(2.0, 0, 1, 0.5, 0))


def test_rotated_square_corner():
    a = OrientedRect(0, 0, 1, 1, 0)
    diamond = math.pi / 4
    # the diamond's corner reaches sqrt(2) towards a
    assert not obb_intersect(a, OrientedRect(2.5, 0, 1, 1, diamond))
    assert obb_intersect(a, OrientedRect(2.3, 0, 1, 1, diamond))


def test_matrix_matches_pairwise():
    rng = np.random.default_rng(1)
    ca, cb = rng.uniform(-5, 5, (30, 2)), rng.uniform(-5, 5, (25, 2))
    ang_a, ang_b = rng.uniform(-math.pi, math.pi, 30), rng.uniform(-math.pi, math.pi, 25)
    hits = obb_intersect_matrix(ca, ang_a, 1.0, 0.25, cb, ang_b, 7.4, 1.5)
    for i in range(30):
        for j in range(25):
            expected = obb_intersect(
                OrientedRect(*ca[i], 1.0, 0.25, ang_a[i]), OrientedRect(*cb[j], 7.4, 1.5, ang_b[j])
            )
            assert hits[i, j] == expected


def test_matrix_far_apart_is_all_false():
    hits = obb_intersect_matrix(
        np.zeros((3, 2)), np.zeros(3), 1, 1, np.full((2, 2), 100.0), np.zeros(2), 1, 1
    )
    assert hits.shape == (3, 2)
    assert not hits.any()


@pytest.mark.parametrize("cx,expected", [(5.0, True), (-3.0, False)])
def test_rect_hits_box(cx, expected):
    rect = OrientedRect(cx, 0, 1, 0.5, 0)
    assert rect_hits_box(rect, 3, -1, 6, 1) == expected
