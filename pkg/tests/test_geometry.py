import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inbuilding_rt.geometry import (CONCRETE, GLASS, GeometryError, GridSpec, Material, Surface,
                                    WindowOutOfBounds, WindowSpec, build_box_scene, coplanar,
                                    intersect_segment_surface, mirror_across_plane, vec3)

coord = st.floats(-10, 10, allow_nan=False)
point = st.tuples(coord, coord, coord).map(np.array)


def floor():
    return Surface(vec3((0, 0, 0)), vec3((0, 3, 0)), vec3((3.5, 0, 0)), CONCRETE, "floor")


def test_box_with_window(box_scene):
    assert len(box_scene.surfaces) == 7
    window = box_scene.surfaces[-1]
    assert window.kind == "window"
    np.testing.assert_array_equal(window.normal, [-1, 0, 0])
    assert coplanar(window, box_scene.surfaces[0])
    assert box_scene.holes[0] == (6,)
    assert window.area == pytest.approx(1.75 * 1.5)


def test_normals_point_outward(box_scene):
    center = box_scene.center
    for s in box_scene.surfaces:
        assert float(s.normal @ (s.origin - center)) > 0


def test_unit_cube_without_window():
    scene = build_box_scene((1, 1, 1), None, CONCRETE, None)
    assert len(scene.surfaces) == 6
    assert sum(s.area for s in scene.surfaces) == pytest.approx(6.0)


def test_window_too_large():
    with pytest.raises(WindowOutOfBounds):
        build_box_scene((3, 3, 3), WindowSpec("x0", (1.5, 1.5), 4, 4), CONCRETE, GLASS)


@pytest.mark.parametrize("wall", ["x0", "x1", "y0", "y1"])
def test_window_on_each_wall(wall):
    scene = build_box_scene((3.5, 3, 3), WindowSpec(wall, (1.0, 1.5), 1.0, 1.0), CONCRETE, GLASS)
    win = scene.surfaces[-1]
    host = next(s for s in scene.surfaces if s.name == wall)
    assert coplanar(win, host)
    assert scene.holes[scene.surfaces.index(host)] == (6,)


def test_degenerate_dims():
    with pytest.raises(GeometryError):
        build_box_scene((0, 3, 3), None, CONCRETE, None)


def test_surface_rejects_skewed_edges():
    with pytest.raises(GeometryError):
        Surface(vec3((0, 0, 0)), vec3((1, 0, 0)), vec3((1, 1, 0)), CONCRETE)


def test_material_validation():
    with pytest.raises(ValueError):
        Material("x", eps_r=0.5)
    with pytest.raises(ValueError):
        Material("x", eps_r=2, sigma=-1)
    with pytest.raises(ValueError):
        Material("x", eps_r=2, thickness=0)


def test_intersect_normal_incidence():
    hit = intersect_segment_surface(vec3((1, 1, 1)), vec3((1, 1, -1)), floor())
    np.testing.assert_allclose(hit.point, [1, 1, 0])
    assert hit.incidence_angle == pytest.approx(0.0)
    assert hit.t == pytest.approx(0.5)


def test_intersect_parallel():
    assert intersect_segment_surface(vec3((1, 1, 1)), vec3((2, 1, 1)), floor()) is None


def test_intersect_45_degrees():
    hit = intersect_segment_surface(vec3((0, 0, 1)), vec3((2, 0, -1)), floor())
    np.testing.assert_allclose(hit.point, [1, 0, 0], atol=1e-15)
    assert hit.incidence_angle == pytest.approx(math.pi / 4)


def test_endpoint_on_plane_is_not_a_hit():
    assert intersect_segment_surface(vec3((1, 1, 0)), vec3((1, 1, 1)), floor()) is None
    assert intersect_segment_surface(vec3((1, 1, 1)), vec3((1, 1, 0)), floor()) is None


def test_outside_rectangle():
    assert intersect_segment_surface(vec3((5, 1, 1)), vec3((5, 1, -1)), floor()) is None


def test_mirror_examples():
    f = floor()
    np.testing.assert_array_equal(mirror_across_plane(vec3((1, 1, 1)), f), [1, 1, -1])
    np.testing.assert_array_equal(mirror_across_plane(vec3((2, 0.5, 0)), f), [2, 0.5, 0])


@given(point)
def test_mirror_is_involution(p):
    for s in build_box_scene((3.5, 3, 3), None, CONCRETE, None).surfaces:
        np.testing.assert_allclose(mirror_across_plane(mirror_across_plane(p, s), s), p, atol=1e-12)


@settings(max_examples=200)
@given(point, point)
def test_intersection_is_symmetric(a, b):
    if np.linalg.norm(a - b) < 1e-6:
        return
    f = floor()
    h1 = intersect_segment_surface(a, b, f)
    h2 = intersect_segment_surface(b, a, f)
    assert (h1 is None) == (h2 is None)
    if h1 is not None:
        np.testing.assert_allclose(h1.point, h2.point, atol=1e-12)
        assert abs(h1.incidence_angle - h2.incidence_angle) <= 1e-12
        assert 0 <= h1.incidence_angle <= math.pi / 2


def test_grid_counts():
    g = GridSpec(1.5, (0.0, 3.5), (0.0, 3.0), 0.05)
    assert g.shape == (61, 71)
    pts = g.points()
    assert pts.shape == (61, 71, 3)
    np.testing.assert_allclose(pts[0, -1], [3.5, 0, 1.5])
    np.testing.assert_allclose(pts[-1, 0], [0, 3.0, 1.5])


def test_grid_rejects_bad_resolution():
    with pytest.raises(ValueError):
        GridSpec(1.5, (0, 1), (0, 1), 0.0)
