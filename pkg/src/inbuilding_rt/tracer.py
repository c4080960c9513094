"""Specular multipath enumeration with the image method.

Surfaces crossed along a path that are not part of its reflection sequence
become transmit interactions rather than blockers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .geometry import (ENDPOINT_TOL, Scene, Surface, Vec3, distance_to_plane,
                       intersect_segment_surface, mirror_across_plane, normalize)

MAX_REFLECTIONS = 3


class DegenerateEndpoints(ValueError):
    pass


@dataclass(frozen=True)
class Interaction:
    surface: Surface
    surface_index: int
    kind: str  # "reflect" | "transmit"
    point: Vec3
    incidence_angle: float


@dataclass(frozen=True)
class RayPath:
    tx: Vec3
    rx: Vec3
    interactions: tuple[Interaction, ...]
    length: float
    departure_dir: Vec3
    arrival_dir: Vec3
    sequence: tuple[int, ...] = ()

    @property
    def reflections(self) -> int:
        return len(self.sequence)

    @property
    def transmissions(self) -> int:
        return sum(1 for i in self.interactions if i.kind == "transmit")

    def vertices(self) -> list[Vec3]:
        return [self.tx] + [i.point for i in self.interactions] + [self.rx]


def surface_sequences(n_surfaces: int, max_reflections: int) -> Iterator[tuple[int, ...]]:
    """Reflection sequences in canonical order: by length, then lexicographic.

    The same facet never appears twice in a row.
    """
    for k in range(max_reflections + 1):
        for seq in itertools.product(range(n_surfaces), repeat=k):
            if all(seq[i] != seq[i + 1] for i in range(k - 1)):
                yield seq


def _check_endpoint(p: Vec3, scene: Scene, label: str) -> None:
    for s in scene.surfaces:
        if distance_to_plane(p, s) <= ENDPOINT_TOL:
            foot = p - (float(np.dot(p, s.normal)) - s.offset) * s.normal
            if s.contains(foot):
                raise DegenerateEndpoints(f"{label} lies on surface {s.name or s.kind}")


def _crossings(a: Vec3, b: Vec3, scene: Scene) -> list[tuple[float, Interaction]]:
    out = []
    for j, s in enumerate(scene.surfaces):
        hit = intersect_segment_surface(a, b, s)
        if hit is None or scene.in_hole(j, hit.point):
            continue
        out.append((hit.t, Interaction(s, j, "transmit", hit.point, hit.incidence_angle)))
    out.sort(key=lambda item: (item[0], item[1].surface_index))
    return out


def trace_sequence(tx: Vec3, rx: Vec3, scene: Scene, seq: tuple[int, ...],
                   max_transmissions: int) -> Optional[RayPath]:
    """Build the path for one reflection sequence, or None if it is invalid."""
    surfaces = scene.surfaces
    images = [tx]
    for j in seq:
        images.append(mirror_across_plane(images[-1], surfaces[j]))
    points: list[tuple[Vec3, float]] = []
    target = rx
    for k in range(len(seq) - 1, -1, -1):
        j = seq[k]
        hit = intersect_segment_surface(images[k + 1], target, surfaces[j])
        if hit is None or scene.in_hole(j, hit.point):
            return None
        points.append((hit.point, hit.incidence_angle))
        target = hit.point
    points.reverse()

    vertices = [tx] + [p for p, _ in points] + [rx]
    interactions: list[Interaction] = []
    n_trans = 0
    length = 0.0
    for k in range(len(vertices) - 1):
        a, b = vertices[k], vertices[k + 1]
        seg = float(np.linalg.norm(b - a))
        if seg <= ENDPOINT_TOL:
            return None
        length += seg
        for _, inter in _crossings(a, b, scene):
            n_trans += 1
            interactions.append(inter)
        if n_trans > max_transmissions:
            return None
        if k < len(seq):
            j = seq[k]
            interactions.append(Interaction(surfaces[j], j, "reflect", points[k][0], points[k][1]))
    return RayPath(tx=tx, rx=rx, interactions=tuple(interactions), length=length,
                   departure_dir=normalize(vertices[1] - vertices[0]),
                   arrival_dir=normalize(vertices[-1] - vertices[-2]),
                   sequence=tuple(seq))


def enumerate_specular_paths(tx: Vec3, rx: Vec3, scene: Scene, max_reflections: int = 2,
                             max_transmissions: int = 2, *,
                             allow_on_surface: bool = False) -> list[RayPath]:
    """All valid specular paths from ``tx`` to ``rx`` in canonical order.

    ``allow_on_surface`` admits endpoints lying on a facet, such as an
    aperture antenna mounted in its window or a probe on a wall; reflections
    off the facet an endpoint sits on then vanish as zero-length legs.
    """
    tx = np.asarray(tx, dtype=np.float64)
    rx = np.asarray(rx, dtype=np.float64)
    if not 0 <= max_reflections <= MAX_REFLECTIONS:
        raise ValueError(f"max_reflections must be in [0, {MAX_REFLECTIONS}]")
    if max_transmissions < 0:
        raise ValueError("max_transmissions must be >= 0")
    if float(np.linalg.norm(rx - tx)) <= ENDPOINT_TOL:
        raise DegenerateEndpoints("tx and rx coincide")
    if not allow_on_surface:
        _check_endpoint(tx, scene, "tx")
        _check_endpoint(rx, scene, "rx")
    paths = []
    for seq in surface_sequences(len(scene.surfaces), max_reflections):
        path = trace_sequence(tx, rx, scene, seq, max_transmissions)
        if path is not None:
            paths.append(path)
    return paths


def line_of_sight(a: Vec3, b: Vec3, scene: Scene) -> bool:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return not any(intersect_segment_surface(a, b, s) is not None for s in scene.surfaces)


def mirror_law_error(path: RayPath) -> float:
    """Largest |angle_in - angle_out| over the reflections of ``path``, radians."""
    verts = path.vertices()
    worst = 0.0
    for k, inter in enumerate(path.interactions):
        if inter.kind != "reflect":
            continue
        n = inter.surface.normal
        d_in = normalize(verts[k + 1] - verts[k])
        d_out = normalize(verts[k + 2] - verts[k + 1])
        a_in = math.acos(min(1.0, abs(float(np.dot(d_in, n)))))
        a_out = math.acos(min(1.0, abs(float(np.dot(d_out, n)))))
        worst = max(worst, abs(a_in - a_out))
    return worst
