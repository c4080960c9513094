"""Planar-facet scene model for a single-room building.

Example:
    >>> from inbuilding_rt.geometry import CONCRETE, build_box_scene
    >>> scene = build_box_scene((1.0, 1.0, 1.0), None, CONCRETE, None)
    >>> len(scene.surfaces)
    6
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

Vec3 = NDArray[np.float64]

# t-parameter tolerance: keeps reflection points from re-hitting their own facet
ENDPOINT_TOL = 1e-9
# rectangle membership slack, in units of the normalized edge coordinate
RECT_TOL = 1e-12

SURFACE_KINDS = ("wall", "floor", "ceiling", "window")
WALL_IDS = ("x0", "x1", "y0", "y1")


class GeometryError(ValueError):
    """Base class for scene construction failures."""


class WindowOutOfBounds(GeometryError):
    pass


def vec3(values: Iterable[float]) -> Vec3:
    v = np.asarray(list(values), dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"expected 3 components, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def normalize(v: Vec3) -> Vec3:
    n = math.sqrt(float(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def _dot(a: Vec3, b: Vec3) -> float:
    return float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2])


@dataclass(frozen=True)
class Material:
    """Lossy dielectric slab.

    Conductivity is either constant (``sigma``) or follows the power law
    ``sigma_a * f_GHz ** sigma_b``; when ``sigma_a`` is set it wins.
    """

    name: str
    eps_r: float
    sigma: float = 0.0
    thickness: float = 0.1
    sigma_a: Optional[float] = None
    sigma_b: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.eps_r) or self.eps_r < 1.0:
            raise ValueError(f"{self.name}: eps_r must be >= 1")
        if not math.isfinite(self.sigma) or self.sigma < 0.0:
            raise ValueError(f"{self.name}: sigma must be >= 0")
        if self.sigma_a is not None and (not math.isfinite(self.sigma_a) or self.sigma_a < 0.0):
            raise ValueError(f"{self.name}: sigma_a must be >= 0")
        if not math.isfinite(self.sigma_b):
            raise ValueError(f"{self.name}: sigma_b must be finite")
        if not math.isfinite(self.thickness) or self.thickness <= 0.0:
            raise ValueError(f"{self.name}: thickness must be > 0")

    def conductivity(self, frequency_hz: float) -> float:
        if self.sigma_a is not None:
            return self.sigma_a * (frequency_hz / 1e9) ** self.sigma_b
        return self.sigma


CONCRETE = Material("concrete", eps_r=5.24, sigma_a=0.0462, sigma_b=0.7822, thickness=0.30)
GLASS = Material("glass", eps_r=6.27, sigma_a=0.0043, sigma_b=1.1925, thickness=0.006)
BUILTIN_MATERIALS = {m.name: m for m in (CONCRETE, GLASS)}


@dataclass(frozen=True, eq=False)
class Surface:
    origin: Vec3
    edge_u: Vec3
    edge_v: Vec3
    material: Material
    kind: str = "wall"
    name: str = ""
    normal: Vec3 = field(init=False, repr=False)
    offset: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise GeometryError(f"unknown surface kind {self.kind!r}")
        lu = math.sqrt(_dot(self.edge_u, self.edge_u))
        lv = math.sqrt(_dot(self.edge_v, self.edge_v))
        if lu == 0.0 or lv == 0.0:
            raise GeometryError("surface edges must have non-zero length")
        if abs(_dot(self.edge_u, self.edge_v)) > 1e-9 * lu * lv:
            raise GeometryError("surface edges must be orthogonal")
        n = normalize(np.cross(self.edge_u, self.edge_v))
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", _dot(n, self.origin))

    @property
    def area(self) -> float:
        return float(np.linalg.norm(self.edge_u) * np.linalg.norm(self.edge_v))

    def local_coords(self, p: Vec3) -> tuple[float, float]:
        d = p - self.origin
        return (_dot(d, self.edge_u) / _dot(self.edge_u, self.edge_u),
                _dot(d, self.edge_v) / _dot(self.edge_v, self.edge_v))

    def contains(self, p: Vec3) -> bool:
        """Whether an in-plane point falls inside the rectangle (edges inclusive)."""
        u, v = self.local_coords(p)
        return -RECT_TOL <= u <= 1.0 + RECT_TOL and -RECT_TOL <= v <= 1.0 + RECT_TOL

    def corners(self) -> list[Vec3]:
        o, a, b = self.origin, self.edge_u, self.edge_v
        return [o, o + a, o + a + b, o + b]


@dataclass(frozen=True, eq=False)
class Scene:
    """Ordered facets plus the axis-aligned bounds they live in.

    Window facets overlay a coplanar host facet; ``holes[i]`` lists the
    windows cut out of facet ``i`` so a hit inside a window belongs to the
    window only.
    """

    surfaces: tuple[Surface, ...]
    bounds_min: Vec3
    bounds_max: Vec3
    holes: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        lo, hi = self.bounds_min, self.bounds_max
        for s in self.surfaces:
            for c in s.corners():
                if np.any(c < lo - 1e-9) or np.any(c > hi + 1e-9):
                    raise GeometryError(f"surface {s.name or s.kind} exceeds scene bounds")
        holes = []
        for i, host in enumerate(self.surfaces):
            cut = []
            if host.kind != "window":
                for j, w in enumerate(self.surfaces):
                    if w.kind == "window" and coplanar(host, w):
                        cut.append(j)
            holes.append(tuple(cut))
        object.__setattr__(self, "holes", tuple(holes))

    @property
    def center(self) -> Vec3:
        return 0.5 * (self.bounds_min + self.bounds_max)

    def in_hole(self, index: int, p: Vec3) -> bool:
        return any(self.surfaces[j].contains(p) for j in self.holes[index])

    def owns(self, index: int, p: Vec3) -> bool:
        """Whether an in-plane point interacts with facet ``index`` (nearest-kind rule)."""
        return self.surfaces[index].contains(p) and not self.in_hole(index, p)


def coplanar(a: Surface, b: Surface, tol: float = 1e-9) -> bool:
    return (abs(_dot(a.normal, b.normal) - 1.0) < tol
            and abs(a.offset - b.offset) < tol)


@dataclass(frozen=True)
class WindowSpec:
    wall: str
    center: tuple[float, float]
    width: float
    height: float


@dataclass(frozen=True)
class GridSpec:
    height: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    resolution: float

    def __post_init__(self):
        if not (self.resolution > 0.0 and math.isfinite(self.resolution)):
            raise ValueError("grid resolution must be > 0")
        for lo, hi in (self.x_range, self.y_range):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("grid ranges must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, cols): rows follow y, columns follow x."""
        return (_count(self.y_range, self.resolution), _count(self.x_range, self.resolution))

    def xs(self) -> NDArray[np.float64]:
        return self.x_range[0] + self.resolution * np.arange(self.shape[1], dtype=np.float64)

    def ys(self) -> NDArray[np.float64]:
        return self.y_range[0] + self.resolution * np.arange(self.shape[0], dtype=np.float64)

    def points(self) -> NDArray[np.float64]:
        """Cell centres as a (rows, cols, 3) array."""
        ys, xs = np.meshgrid(self.ys(), self.xs(), indexing="ij")
        zs = np.full_like(xs, self.height)
        return np.stack([xs, ys, zs], axis=-1)


def _count(rng: tuple[float, float], res: float) -> int:
    # nudge absorbs binary representation error, e.g. 3.5 / 0.05 = 69.99999...
    # a reversed range has no cells
    return max(0, int(math.floor((rng[1] - rng[0]) / res + 1e-9)) + 1)


def build_box_scene(dims: Sequence[float], window: Optional[WindowSpec],
                    wall_material: Material, window_material: Optional[Material]) -> Scene:
    """Room with its corner at the origin, outward-facing facets, optional window.

    Facet order: x0, x1, y0, y1 walls, floor, ceiling, then the window.
    Window ``center`` is (y, z) on x-walls and (x, z) on y-walls.
    """
    lx, ly, lz = (float(d) for d in dims)
    if min(lx, ly, lz) <= 0.0:
        raise GeometryError("room dimensions must be positive")
    m = wall_material
    ex, ey, ez = np.eye(3)
    # edge order fixes the outward normal via edge_u x edge_v
    surfaces = [
        Surface(vec3((0, 0, 0)), lz * ez, ly * ey, m, "wall", "x0"),
        Surface(vec3((lx, 0, 0)), ly * ey, lz * ez, m, "wall", "x1"),
        Surface(vec3((0, 0, 0)), lx * ex, lz * ez, m, "wall", "y0"),
        Surface(vec3((0, ly, 0)), lz * ez, lx * ex, m, "wall", "y1"),
        Surface(vec3((0, 0, 0)), ly * ey, lx * ex, m, "floor", "floor"),
        Surface(vec3((0, 0, lz)), lx * ex, ly * ey, m, "ceiling", "ceiling"),
    ]
    if window is not None:
        if window_material is None:
            raise GeometryError("window requires a material")
        surfaces.append(_window_surface((lx, ly, lz), window, window_material))
    return Scene(tuple(surfaces), vec3((0, 0, 0)), vec3((lx, ly, lz)))


def _window_surface(dims, w: WindowSpec, material: Material) -> Surface:
    lx, ly, lz = dims
    if w.wall not in WALL_IDS:
        raise GeometryError(f"unknown wall id {w.wall!r}")
    if w.width <= 0.0 or w.height <= 0.0:
        raise WindowOutOfBounds("window width and height must be positive")
    span = ly if w.wall[0] == "x" else lx
    cu, cv = w.center
    u0, u1 = cu - w.width / 2, cu + w.width / 2
    v0, v1 = cv - w.height / 2, cv + w.height / 2
    if u0 < -1e-12 or u1 > span + 1e-12 or v0 < -1e-12 or v1 > lz + 1e-12:
        raise WindowOutOfBounds(
            f"window {w.width}x{w.height} at {tuple(w.center)} exceeds wall {w.wall}")
    ex, ey, ez = np.eye(3)
    if w.wall == "x0":
        return Surface(vec3((0, u0, v0)), w.height * ez, w.width * ey, material, "window", "window")
    if w.wall == "x1":
        return Surface(vec3((lx, u0, v0)), w.width * ey, w.height * ez, material, "window", "window")
    if w.wall == "y0":
        return Surface(vec3((u0, 0, v0)), w.width * ex, w.height * ez, material, "window", "window")
    return Surface(vec3((u0, ly, v0)), w.height * ez, w.width * ex, material, "window", "window")


@dataclass(frozen=True)
class Hit:
    point: Vec3
    t: float
    incidence_angle: float


def intersect_segment_surface(a: Vec3, b: Vec3, s: Surface) -> Optional[Hit]:
    """Crossing of the open segment (a, b) with the rectangle of ``s``.

    Touching the plane at either endpoint does not count.
    """
    d = b - a
    denom = _dot(s.normal, d)
    if denom == 0.0:
        return None
    t = (s.offset - _dot(s.normal, a)) / denom
    if not (ENDPOINT_TOL < t < 1.0 - ENDPOINT_TOL):
        return None
    p = a + t * d
    if not s.contains(p):
        return None
    length = math.sqrt(_dot(d, d))
    cos_i = min(1.0, abs(denom) / length)
    return Hit(p, t, math.acos(cos_i))


def mirror_across_plane(p: Vec3, s: Surface) -> Vec3:
    return p - 2.0 * (_dot(p, s.normal) - s.offset) * s.normal


def distance_to_plane(p: Vec3, s: Surface) -> float:
    return abs(_dot(p, s.normal) - s.offset)
