"""Coverage grids, empirical CDFs, case comparison and repeater placement."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .geometry import GridSpec, Scene, Vec3
from .link import AntennaNode, NoiseModel, TracerParams, noise_power
from .tracer import line_of_sight

log = logging.getLogger(__name__)

LAYERS = ("p_signal_dbm", "p_interf_dbm", "sir_db", "sinr_db", "snr_db")
STAT_METRICS = ("sinr_db", "snr_db", "sir_db")


class EmptyGrid(ValueError):
    pass


class NoData(ValueError):
    pass


class SpecMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoverageGrid:
    spec: GridSpec
    layers: dict[str, np.ndarray]
    los: Optional[bool] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.spec.shape


@dataclass(frozen=True)
class CdfSeries:
    values: np.ndarray
    fractions: np.ndarray

    def __call__(self, x: float) -> float:
        i = int(np.searchsorted(self.values, x, side="right"))
        return 0.0 if i == 0 else float(self.fractions[i - 1])


@dataclass(frozen=True)
class Percentiles:
    p5: float
    median: float
    p95: float


@dataclass(frozen=True)
class CaseReport:
    name: str
    stats: dict[str, Percentiles]
    los: Optional[bool]
    cells: int

    @property
    def median_sinr(self) -> float:
        return self.stats["sinr_db"].median


@dataclass(frozen=True)
class SweepEntry:
    position: Vec3
    median_db: float
    index: int
    error: Optional[str] = None


def resolve_threads(threads: int) -> int:
    return max(1, os.cpu_count() or 1) if threads <= 0 else threads


def node_power_grid(node: AntennaNode, scene: Scene, spec: GridSpec, f: float,
                    params: TracerParams, threads: int = 1, backend: Optional[str] = None) -> np.ndarray:
    """Received power (dBm) of ``node`` over the grid, one kernel call per row.

    Rows are the fixed unit of work, so results do not depend on ``threads``.
    """
    power_at = _kernels.power_at if backend is None else _kernels.BACKENDS[backend]
    prep = _kernels.prepare(node, scene, f, params)
    pts = spec.points()
    rows = [pts[i] for i in range(pts.shape[0])]
    n = resolve_threads(threads)
    if n == 1:
        out = [power_at(prep, r) for r in rows]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            out = list(pool.map(lambda r: power_at(prep, r), rows))
    return np.stack(out).reshape(spec.shape)


def metric_layers(p_signal: np.ndarray, p_interf: np.ndarray, noise: NoiseModel) -> dict[str, np.ndarray]:
    """Elementwise counterpart of :func:`link.link_metrics`."""
    n_dbm = noise_power(noise)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        sir = p_signal - p_interf
        snr = p_signal - n_dbm
        mix = 10.0 * np.log10(10.0 ** (p_interf / 10.0) + 10.0 ** (n_dbm / 10.0))
        sinr = np.where(np.isneginf(p_interf), snr, np.minimum(np.minimum(p_signal - mix, sir), snr))
    sinr = np.where(np.isnan(p_signal) | np.isnan(p_interf), np.nan, sinr)
    return {"p_signal_dbm": p_signal, "p_interf_dbm": p_interf,
            "sir_db": sir, "sinr_db": sinr, "snr_db": snr}


def compute_coverage_grid(scene: Scene, donor: AntennaNode, repeater: AntennaNode, spec: GridSpec,
                          noise: NoiseModel, f: float, params: TracerParams = TracerParams(),
                          threads: int = 1, backend: Optional[str] = None) -> CoverageGrid:
    rows, cols = spec.shape
    if rows <= 0 or cols <= 0:
        raise EmptyGrid("grid has no cells")
    pts = spec.points()
    lo, hi = scene.bounds_min - 1e-9, scene.bounds_max + 1e-9
    if np.any(pts < lo) or np.any(pts > hi):
        raise ValueError("grid cells must lie inside the scene bounds")
    p_sig = node_power_grid(repeater, scene, spec, f, params, threads, backend)
    p_int = node_power_grid(donor, scene, spec, f, params, threads, backend)
    excluded = np.zeros(spec.shape, dtype=bool)
    for node in (donor, repeater):
        d = pts - node.position
        excluded |= np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + d[..., 2] ** 2) <= 1e-9
    p_sig = np.where(excluded, np.nan, p_sig)
    p_int = np.where(excluded, np.nan, p_int)
    layers = metric_layers(p_sig, p_int, noise)
    los = line_of_sight(donor.position, repeater.position, scene)
    return CoverageGrid(spec, layers, los)


def empirical_cdf(values: Sequence[float]) -> CdfSeries:
    v = np.asarray(values, dtype=np.float64).ravel()
    v = v[~np.isnan(v)]
    if v.size == 0:
        raise NoData("no valid samples")
    distinct, counts = np.unique(v, return_counts=True)
    return CdfSeries(distinct, np.cumsum(counts) / v.size)


def percentile(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile of the non-NaN samples."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    v = v[~np.isnan(v)]
    if v.size == 0:
        raise NoData("no valid samples")
    rank = max(1, math.ceil(p / 100.0 * v.size))
    return float(v[rank - 1])


def summarize(name: str, grid: CoverageGrid) -> CaseReport:
    stats = {}
    for m in STAT_METRICS:
        layer = grid.layers[m]
        stats[m] = Percentiles(percentile(layer, 5), percentile(layer, 50), percentile(layer, 95))
    cells = int(np.count_nonzero(~np.isnan(grid.layers["sinr_db"])))
    return CaseReport(name, stats, grid.los, cells)


def compare_cases(cases: Sequence[tuple[str, CoverageGrid]]) -> tuple[list[CaseReport], str]:
    """Per-case percentiles and the winner by median SINR.

    Ties go to the higher 5th percentile, then to the earlier case.
    """
    if len(cases) < 2:
        raise ValueError("need at least two cases")
    first = cases[0][1].spec
    for name, g in cases[1:]:
        if g.spec != first or g.layers["sinr_db"].shape != cases[0][1].layers["sinr_db"].shape:
            raise SpecMismatch(f"case {name!r} uses a different grid")
    reports = [summarize(name, g) for name, g in cases]
    best = 0
    for i, r in enumerate(reports[1:], start=1):
        b = reports[best]
        key = (r.median_sinr, r.stats["sinr_db"].p5)
        if key > (b.median_sinr, b.stats["sinr_db"].p5):
            best = i
    return reports, reports[best].name


def placement_sweep(scene: Scene, donor: AntennaNode, repeater_template: AntennaNode,
                    candidates: Sequence[Vec3], spec: GridSpec, noise: NoiseModel, f: float,
                    params: TracerParams = TracerParams(), threads: int = 1,
                    backend: Optional[str] = None, metric: str = "sinr_db") -> list[SweepEntry]:
    """Rank repeater positions by the median of ``metric`` (descending, stable).

    Each candidate's repeater is re-aimed at the room centre. Candidates that
    fail are listed last with their error instead of aborting the sweep.
    """
    if len(candidates) == 0:
        raise ValueError("no candidate positions")
    ok, failed = [], []
    for i, pos in enumerate(candidates):
        pos = np.asarray(pos, dtype=np.float64)
        try:
            if np.any(pos < scene.bounds_min) or np.any(pos > scene.bounds_max):
                raise ValueError("candidate outside the scene bounds")
            node = repeater_template.moved_to(pos).aimed_at(scene.center)
            grid = compute_coverage_grid(scene, donor, node, spec, noise, f, params, threads, backend)
            ok.append(SweepEntry(pos, percentile(grid.layers[metric], 50), i))
        except (ValueError, ArithmeticError) as exc:
            log.warning("candidate %d failed: %s", i, exc)
            failed.append(SweepEntry(pos, math.nan, i, str(exc)))
    ok.sort(key=lambda e: (-e.median_db, e.index))
    return ok + failed
