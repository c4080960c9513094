"""Scenario documents (JSON) to validated scene, nodes, grid and noise objects."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .em import AntennaPattern
from .geometry import (BUILTIN_MATERIALS, WALL_IDS, GeometryError, GridSpec, Material, Scene,
                       WindowSpec, build_box_scene, distance_to_plane, normalize)
from .link import AntennaNode, NoiseModel, TracerParams
from .metrics import SpecMismatch
from .tracer import MAX_REFLECTIONS

DEFAULT_NOISE = {"bandwidth_hz": 100e6, "noise_figure_db": 9.0}
DEFAULT_TRACER = {"max_reflections": 2, "max_transmissions": 2}
DEFAULT_GRID_HEIGHT = 1.5
DEFAULT_RESOLUTION = 0.05
NODE_KEYS = ("nodes", "name")

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"


class ScenarioError(ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class MissingKey(ScenarioError):
    def __init__(self, path: str):
        super().__init__(path, "missing required key")


class BadValue(ScenarioError):
    pass


class UnknownMaterial(ScenarioError):
    def __init__(self, name: str, path: str = "materials"):
        super().__init__(path, f"unknown material {name!r}")
        self.name = name


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    frequency_hz: float
    scene: Scene
    donor: AntennaNode
    repeater: AntennaNode
    grid: GridSpec
    noise: NoiseModel
    tracer: TracerParams
    document: dict

    @property
    def nodes(self) -> list[AntennaNode]:
        return [self.donor, self.repeater]


def _get(doc: dict, key: str, path: str, default: Any = ...):
    if not isinstance(doc, dict):
        raise BadValue(path, "expected an object")
    if key not in doc:
        if default is ...:
            raise MissingKey(f"{path}.{key}" if path else key)
        return default
    return doc[key]


def _number(value: Any, path: str, *, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadValue(path, "expected a number")
    v = float(value)
    if not math.isfinite(v):
        raise BadValue(path, "non-finite")
    if positive and v <= 0.0:
        raise BadValue(path, "non-positive")
    if nonneg and v < 0.0:
        raise BadValue(path, "negative")
    return v


def _int(value: Any, path: str, lo: int, hi: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadValue(path, "expected an integer")
    if value < lo or (hi is not None and value > hi):
        raise BadValue(path, f"out of range [{lo}, {hi if hi is not None else 'inf'}]")
    return value


def _vector(value: Any, path: str, n: int = 3, **kw) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise BadValue(path, f"expected a list of {n} numbers")
    return [_number(v, f"{path}[{i}]", **kw) for i, v in enumerate(value)]


def _materials(doc: dict) -> dict[str, Material]:
    table = dict(BUILTIN_MATERIALS)
    entries = _get(doc, "materials", "", [])
    if not isinstance(entries, list):
        raise BadValue("materials", "expected a list")
    for i, m in enumerate(entries):
        path = f"materials[{i}]"
        name = _get(m, "name", path)
        if not isinstance(name, str) or not name:
            raise BadValue(f"{path}.name", "expected a non-empty string")
        eps_r = _number(_get(m, "eps_r", path), f"{path}.eps_r")
        if eps_r < 1.0:
            raise BadValue(f"{path}.eps_r", "must be >= 1")
        thickness = _number(_get(m, "thickness", path), f"{path}.thickness", positive=True)
        if "sigma_a" in m:
            sigma_a = _number(m["sigma_a"], f"{path}.sigma_a", nonneg=True)
            sigma_b = _number(_get(m, "sigma_b", path, 0.0), f"{path}.sigma_b")
            table[name] = Material(name, eps_r, thickness=thickness, sigma_a=sigma_a, sigma_b=sigma_b)
        else:
            sigma = _number(_get(m, "sigma", path, 0.0), f"{path}.sigma", nonneg=True)
            table[name] = Material(name, eps_r, sigma=sigma, thickness=thickness)
    return table


def _lookup(table: dict[str, Material], name: Any, path: str) -> Material:
    if not isinstance(name, str):
        raise BadValue(path, "expected a material name")
    if name not in table:
        raise UnknownMaterial(name, path)
    return table[name]


def _pattern(doc: Any, path: str) -> AntennaPattern:
    if doc is None:
        return AntennaPattern()
    d = AntennaPattern()
    vals = {
        "gain_dbi": _number(_get(doc, "gain_dbi", path, d.gain_dbi), f"{path}.gain_dbi"),
        "bw_az": _number(_get(doc, "bw_az_deg", path, d.bw_az), f"{path}.bw_az_deg", positive=True),
        "bw_el": _number(_get(doc, "bw_el_deg", path, d.bw_el), f"{path}.bw_el_deg", positive=True),
        "front_to_back_db": _number(_get(doc, "front_to_back_db", path, d.front_to_back_db),
                                    f"{path}.front_to_back_db", positive=True),
    }
    vals["sidelobe_floor_db"] = _number(
        _get(doc, "sidelobe_floor_db", path, max(d.sidelobe_floor_db, vals["front_to_back_db"])),
        f"{path}.sidelobe_floor_db", positive=True)
    try:
        return AntennaPattern(**vals)
    except ValueError as exc:
        raise BadValue(path, str(exc)) from None


def _node(doc: Any, path: str, scene: Scene, window: Optional[int]) -> AntennaNode:
    role = _get(doc, "role", path)
    if role not in ("donor", "repeater"):
        raise BadValue(f"{path}.role", "expected 'donor' or 'repeater'")
    pos = np.array(_vector(_get(doc, "position_m", path), f"{path}.position_m"))
    if np.any(pos < scene.bounds_min - 1e-9) or np.any(pos > scene.bounds_max + 1e-9):
        raise BadValue(f"{path}.position_m", "outside the room")
    aim = _get(doc, "boresight", path, "window-outward-normal" if role == "donor" else "room-center")
    if aim == "window-outward-normal":
        if window is None:
            raise BadValue(f"{path}.boresight", "scenario has no window")
        bore = scene.surfaces[window].normal.copy()
    elif aim == "room-center":
        if np.linalg.norm(scene.center - pos) <= 1e-9:
            raise BadValue(f"{path}.boresight", "node sits at the room center")
        bore = normalize(scene.center - pos)
    else:
        v = np.array(_vector(aim, f"{path}.boresight"))
        if np.linalg.norm(v) == 0.0:
            raise BadValue(f"{path}.boresight", "zero vector")
        bore = normalize(v)
    if role == "donor" and window is not None:
        if distance_to_plane(pos, scene.surfaces[window]) > 1e-9:
            raise BadValue(f"{path}.position_m", "donor must lie on the window plane")
    power = _number(_get(doc, "tx_power_dbm", path, 20.0), f"{path}.tx_power_dbm")
    return AntennaNode(role, pos, bore, _pattern(_get(doc, "pattern", path, None), f"{path}.pattern"),
                       power)


def parse_scenario(source: Union[str, dict], name: str = "scenario") -> Scenario:
    """Validate a scenario document (JSON text or an already-decoded dict)."""
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise BadValue("<document>", f"invalid JSON: {exc}") from None
    else:
        doc = copy.deepcopy(source)
    if not isinstance(doc, dict):
        raise BadValue("<document>", "expected a JSON object")
    name = doc.get("name", name)

    f = _number(_get(doc, "frequency_hz", ""), "frequency_hz", positive=True)
    room = _get(doc, "room", "")
    dims = _vector(_get(room, "dims", "room"), "room.dims")
    if min(dims) <= 0.0:
        raise BadValue("room.dims", "non-positive")
    table = _materials(doc)
    wall_mat = _lookup(table, _get(room, "material", "room", "concrete"), "room.material")

    wdoc = _get(doc, "window", "", None)
    window = win_mat = None
    if wdoc is not None:
        wall = _get(wdoc, "wall", "window")
        if wall not in WALL_IDS:
            raise BadValue("window.wall", f"expected one of {', '.join(WALL_IDS)}")
        window = WindowSpec(
            wall=wall,
            center=tuple(_vector(_get(wdoc, "center", "window"), "window.center", 2)),
            width=_number(_get(wdoc, "width", "window"), "window.width", positive=True),
            height=_number(_get(wdoc, "height", "window"), "window.height", positive=True),
        )
        win_mat = _lookup(table, _get(wdoc, "material", "window", "glass"), "window.material")
    try:
        scene = build_box_scene(dims, window, wall_mat, win_mat)
    except GeometryError as exc:
        raise BadValue("window" if window else "room", str(exc)) from None
    win_idx = len(scene.surfaces) - 1 if window is not None else None

    nodes = _get(doc, "nodes", "")
    if not isinstance(nodes, list):
        raise BadValue("nodes", "expected a list")
    parsed = [_node(n, f"nodes[{i}]", scene, win_idx) for i, n in enumerate(nodes)]
    donors = [n for n in parsed if n.role == "donor"]
    repeaters = [n for n in parsed if n.role == "repeater"]
    if len(donors) != 1 or len(repeaters) != 1:
        raise BadValue("nodes", "need exactly one donor and one repeater")

    gdoc = _get(doc, "grid", "", {})
    gpath = "grid"
    height = _number(_get(gdoc, "height_m", gpath, DEFAULT_GRID_HEIGHT), "grid.height_m")
    xr = _vector(_get(gdoc, "x_range", gpath, [0.0, dims[0]]), "grid.x_range", 2)
    yr = _vector(_get(gdoc, "y_range", gpath, [0.0, dims[1]]), "grid.y_range", 2)
    res = _number(_get(gdoc, "resolution_m", gpath, DEFAULT_RESOLUTION), "grid.resolution_m",
                  positive=True)
    for key, (lo, hi), top in (("x_range", xr, dims[0]), ("y_range", yr, dims[1])):
        if hi < lo:
            raise BadValue(f"grid.{key}", "min exceeds max")
        if lo < 0.0 or hi > top:
            raise BadValue(f"grid.{key}", "outside the room")
    if not 0.0 <= height <= dims[2]:
        raise BadValue("grid.height_m", "outside the room")
    grid = GridSpec(height, tuple(xr), tuple(yr), res)

    ndoc = _get(doc, "noise", "", DEFAULT_NOISE)
    noise = NoiseModel(
        _number(_get(ndoc, "bandwidth_hz", "noise", DEFAULT_NOISE["bandwidth_hz"]),
                "noise.bandwidth_hz", positive=True),
        _number(_get(ndoc, "noise_figure_db", "noise", DEFAULT_NOISE["noise_figure_db"]),
                "noise.noise_figure_db", nonneg=True),
    )
    tdoc = _get(doc, "tracer", "", DEFAULT_TRACER)
    tracer = TracerParams(
        _int(_get(tdoc, "max_reflections", "tracer", DEFAULT_TRACER["max_reflections"]),
             "tracer.max_reflections", 0, MAX_REFLECTIONS),
        _int(_get(tdoc, "max_transmissions", "tracer", DEFAULT_TRACER["max_transmissions"]),
             "tracer.max_transmissions", 0),
    )
    return Scenario(name, f, scene, donors[0], repeaters[0], grid, noise, tracer, doc)


def load_document(path: Union[str, Path]) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadValue(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise BadValue(str(path), "expected a JSON object")
    return doc


def load_scenario(path: Union[str, Path]) -> Scenario:
    doc = load_document(path)
    doc.setdefault("name", Path(path).stem)
    return parse_scenario(doc)


def golden_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.json"


def apply_overlay(base: dict, overlay: dict, name: str) -> dict:
    """Merge a case overlay into a base document.

    Overlays may only replace ``nodes`` (and ``name``); any other key that
    differs from the base raises ``SpecMismatch``.
    """
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if key in NODE_KEYS:
            merged[key] = copy.deepcopy(value)
        elif base.get(key) != value:
            raise SpecMismatch(f"overlay {name!r} changes {key!r}; overlays may only change nodes")
    merged["name"] = overlay.get("name", name)
    return merged


def apply_overrides(doc: dict, max_reflections: Optional[int] = None,
                    resolution: Optional[float] = None) -> dict:
    out = copy.deepcopy(doc)
    if max_reflections is not None:
        out.setdefault("tracer", dict(DEFAULT_TRACER))
        out["tracer"]["max_reflections"] = max_reflections
    if resolution is not None:
        out.setdefault("grid", {})
        out["grid"]["resolution_m"] = resolution
    return out


def parse_candidates(doc: dict, scene: Scene) -> list[np.ndarray]:
    """Candidate repeater positions from a ``positions``, ``line`` or ``ring`` spec.

    A ring walks the room perimeter, inset from the walls, at a fixed height,
    starting at the (inset, inset) corner and heading along +x.
    """
    if not isinstance(doc, dict):
        raise BadValue("<candidates>", "expected an object")
    kinds = [k for k in ("positions", "line", "ring") if k in doc]
    if len(kinds) != 1:
        raise BadValue("<candidates>", "expected exactly one of positions, line, ring")
    kind = kinds[0]
    if kind == "positions":
        items = doc["positions"]
        if not isinstance(items, list):
            raise BadValue("positions", "expected a list")
        pts = [np.array(_vector(p, f"positions[{i}]")) for i, p in enumerate(items)]
    elif kind == "line":
        d = doc["line"]
        a = np.array(_vector(_get(d, "start", "line"), "line.start"))
        b = np.array(_vector(_get(d, "end", "line"), "line.end"))
        n = _int(_get(d, "count", "line"), "line.count", 1)
        fr = [0.0] if n == 1 else [k / (n - 1) for k in range(n)]
        pts = [a + f * (b - a) for f in fr]
    else:
        d = doc["ring"]
        n = _int(_get(d, "count", "ring"), "ring.count", 1)
        inset = _number(_get(d, "inset_m", "ring", 0.1), "ring.inset_m", positive=True)
        lo, hi = scene.bounds_min, scene.bounds_max
        height = _number(_get(d, "height_m", "ring", float(0.5 * (lo[2] + hi[2]))), "ring.height_m")
        w = float(hi[0] - lo[0]) - 2 * inset
        h = float(hi[1] - lo[1]) - 2 * inset
        if w <= 0 or h <= 0:
            raise BadValue("ring.inset_m", "inset leaves no perimeter")
        x0, y0 = float(lo[0]) + inset, float(lo[1]) + inset
        perimeter = 2 * (w + h)
        pts = []
        for k in range(n):
            s = k * perimeter / n
            if s < w:
                x, y = x0 + s, y0
            elif s < w + h:
                x, y = x0 + w, y0 + (s - w)
            elif s < 2 * w + h:
                x, y = x0 + w - (s - w - h), y0 + h
            else:
                x, y = x0, y0 + h - (s - 2 * w - h)
            pts.append(np.array([x, y, height]))
    if not pts:
        raise BadValue(kind, "no candidate positions")
    return pts
