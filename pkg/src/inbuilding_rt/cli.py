"""Command-line front end: ``run``, ``cases`` and ``sweep``.

Exit codes: 0 ok, 1 usage or validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, _kernels
from .metrics import (CoverageGrid, SpecMismatch, compare_cases, compute_coverage_grid,
                      empirical_cdf, placement_sweep, summarize)
from .scenario import (Scenario, ScenarioError, apply_overlay, apply_overrides, load_document,
                       parse_candidates, parse_scenario)

LAYER_NAMES = {"sir": "sir_db", "sinr": "sinr_db", "snr": "snr_db"}
# SIR is already summarized by the SINR/SNR pair, so it gets no CDF file
CDF_LAYERS = ("sinr", "snr")
HEATMAP_RANGE = (-20.0, 60.0)


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    return f"{v:.6g}"


def _json_num(v: float):
    if isinstance(v, float) and not math.isfinite(v):
        return fmt(v)
    return float(fmt(v))


def write_layer_csv(path: Path, grid: CoverageGrid, layer: str) -> None:
    xs, ys = grid.spec.xs(), grid.spec.ys()
    data = grid.layers[layer]
    lines = ["x_m,y_m,value_db"]
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            lines.append(f"{fmt(x)},{fmt(y)},{fmt(data[i, j])}")
    path.write_text("\n".join(lines) + "\n")


def write_cdf_csv(path: Path, grid: CoverageGrid, layer: str) -> None:
    cdf = empirical_cdf(grid.layers[layer])
    lines = ["value_db,cdf"]
    lines += [f"{fmt(v)},{fmt(p)}" for v, p in zip(cdf.values, cdf.fractions)]
    path.write_text("\n".join(lines) + "\n")


def heatmap_bytes(data: np.ndarray, lo: float = HEATMAP_RANGE[0], hi: float = HEATMAP_RANGE[1]) -> bytes:
    """8-bit binary PGM, highest y row first; NaN cells map to 0."""
    rows, cols = data.shape
    scaled = (np.clip(data, lo, hi) - lo) / (hi - lo) * 255.0
    levels = np.where(np.isnan(data), 0.0, np.rint(scaled)).astype(np.uint8)
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + levels[::-1].tobytes()


def case_summary(sc: Scenario, grid: CoverageGrid) -> dict:
    report = summarize(sc.name, grid)
    return {
        "case": sc.name,
        "frequency_hz": _json_num(sc.frequency_hz),
        "grid": {"rows": grid.shape[0], "cols": grid.shape[1],
                 "height_m": _json_num(sc.grid.height), "resolution_m": _json_num(sc.grid.resolution)},
        "valid_cells": report.cells,
        "los_donor_repeater": report.los,
        "percentiles": {m: {"p5": _json_num(p.p5), "median": _json_num(p.median),
                            "p95": _json_num(p.p95)} for m, p in report.stats.items()},
    }


def write_case_outputs(out: Path, sc: Scenario, grid: CoverageGrid, layers: Sequence[str],
                       heatmap: bool) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    for short in layers:
        layer = LAYER_NAMES[short]
        write_layer_csv(out / f"{short}.csv", grid, layer)
        if short in CDF_LAYERS:
            write_cdf_csv(out / f"cdf_{short}.csv", grid, layer)
        if heatmap:
            (out / f"{short}.pgm").write_bytes(heatmap_bytes(grid.layers[layer]))
    summary = case_summary(sc, grid)
    _write_json(out / "summary.json", summary)
    return summary


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _grid_for(sc: Scenario, threads: int) -> CoverageGrid:
    return compute_coverage_grid(sc.scene, sc.donor, sc.repeater, sc.grid, sc.noise,
                                 sc.frequency_hz, sc.tracer, threads=threads)


def _load(path: str, args) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"scenario file not found: {path}")
    doc = load_document(p)
    doc.setdefault("name", p.stem)
    return apply_overrides(doc, args.max_reflections, args.resolution)


def _layers(spec: str) -> list[str]:
    layers = [s.strip() for s in spec.split(",") if s.strip()]
    bad = [s for s in layers if s not in LAYER_NAMES]
    if bad or not layers:
        raise UsageError(f"unknown layer(s) {bad or spec!r}; choose from {', '.join(LAYER_NAMES)}")
    return layers


def cmd_run(args) -> None:
    layers = _layers(args.layers)
    sc = parse_scenario(_load(args.scenario, args))
    grid = _grid_for(sc, args.threads)
    summary = write_case_outputs(Path(args.out), sc, grid, layers, args.heatmap)
    med = summary["percentiles"]["sinr_db"]["median"]
    print(f"{sc.name}: median SINR {med} dB over {summary['valid_cells']} cells -> {args.out}")


def cmd_cases(args) -> None:
    if len(args.overlays) < 2:
        raise UsageError("need >=2 cases")
    layers = _layers(args.layers)
    base = _load(args.scenario, args)
    scenarios = []
    for path in args.overlays:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"overlay file not found: {path}")
        doc = apply_overlay(base, load_document(p), p.stem)
        scenarios.append(parse_scenario(doc))
    names = [sc.name for sc in scenarios]
    if len(set(names)) != len(names):
        raise UsageError(f"case names must be unique, got {names}")
    grids = [(sc.name, _grid_for(sc, args.threads)) for sc in scenarios]
    reports, winner = compare_cases(grids)
    out = Path(args.out)
    for sc, (_, grid) in zip(scenarios, grids):
        write_case_outputs(out / sc.name, sc, grid, layers, args.heatmap)
    ranked = sorted(reports, key=lambda r: -r.median_sinr)
    comparison = {
        "winner": winner,
        "metric": "median_sinr_db",
        "margin_db": _json_num(ranked[0].median_sinr - ranked[1].median_sinr),
        "cases": [{"name": r.name, "los_donor_repeater": r.los,
                   "median_sinr_db": _json_num(r.median_sinr),
                   "p5_sinr_db": _json_num(r.stats["sinr_db"].p5),
                   "p95_sinr_db": _json_num(r.stats["sinr_db"].p95),
                   "median_snr_db": _json_num(r.stats["snr_db"].median),
                   "median_sir_db": _json_num(r.stats["sir_db"].median)} for r in reports],
    }
    _write_json(out / "comparison.json", comparison)
    for r in reports:
        print(f"{r.name}: median SINR {fmt(r.median_sinr)} dB, LoS={r.los}")
    print(f"winner: {winner}")


def cmd_sweep(args) -> None:
    sc = parse_scenario(_load(args.scenario, args))
    cpath = Path(args.candidates)
    if not cpath.is_file():
        raise UsageError(f"candidate file not found: {args.candidates}")
    candidates = parse_candidates(load_document(cpath), sc.scene)
    metric = LAYER_NAMES[args.metric]
    ranked = placement_sweep(sc.scene, sc.donor, sc.repeater, candidates, sc.grid, sc.noise,
                             sc.frequency_hz, sc.tracer, threads=args.threads, metric=metric)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"rank,candidate,x_m,y_m,z_m,median_{args.metric}_db,status"]
    for rank, e in enumerate(ranked, start=1):
        x, y, z = e.position
        status = "ok" if e.error is None else "failed"
        lines.append(f"{rank},{e.index},{fmt(x)},{fmt(y)},{fmt(z)},{fmt(e.median_db)},{status}")
    (out / "ranked.csv").write_text("\n".join(lines) + "\n")
    best = ranked[0]
    _write_json(out / "best.json", {
        "metric": f"median_{args.metric}_db",
        "candidates": len(ranked),
        "failed": sum(1 for e in ranked if e.error is not None),
        "best": {"candidate": best.index, "position_m": [_json_num(float(v)) for v in best.position],
                 "value_db": _json_num(best.median_db)},
    })
    where = ", ".join(fmt(float(v)) for v in best.position)
    print(f"best candidate #{best.index} at ({where}): "
          f"median {args.metric.upper()} {fmt(best.median_db)} dB")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inbuilding-rt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--max-reflections", type=int, default=None)
        p.add_argument("--resolution", type=float, default=None, help="grid resolution in metres")
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")

    run = sub.add_parser("run", help="coverage grid for one scenario")
    common(run)
    run.add_argument("--layers", default="sir,sinr,snr")
    run.add_argument("--heatmap", action="store_true", help="also write PGM heatmaps")
    run.set_defaults(func=cmd_run)

    cases = sub.add_parser("cases", help="compare repeater placements given as overlays")
    common(cases)
    cases.add_argument("overlays", nargs="*", help="case overlay JSON files (>=2)")
    cases.add_argument("--layers", default="sir,sinr,snr")
    cases.add_argument("--heatmap", action="store_true")
    cases.set_defaults(func=cmd_cases)

    sweep = sub.add_parser("sweep", help="rank candidate repeater positions")
    common(sweep)
    sweep.add_argument("--candidates", required=True, help="candidate spec JSON (positions/line/ring)")
    sweep.add_argument("--metric", choices=sorted(LAYER_NAMES), default="sinr")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def _write_manifest(args, argv, started: float, error: Optional[str]) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overrides = {k: getattr(args, k) for k in ("max_reflections", "resolution", "threads")
                 if getattr(args, k, None) is not None}
    _write_json(out / "manifest.json", {
        "tool": "inbuilding-rt",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "scenario": args.scenario,
        "out": args.out,
        "overrides": overrides,
        "backend": _kernels.BACKEND,
        "duration_s": round(time.perf_counter() - started, 3),
        "status": "ok" if error is None else "error",
        "error": error,
    })


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    code, error = 0, None
    try:
        args.func(args)
    except (UsageError, ScenarioError, SpecMismatch, ValueError) as exc:
        code, error = 1, f"{type(exc).__name__}: {exc}"
    except OSError as exc:
        code, error = 2, f"{type(exc).__name__}: {exc}"
    if error:
        print(f"error: {error}", file=sys.stderr)
    try:
        _write_manifest(args, argv, started, error)
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        code = code or 2
    return code


if __name__ == "__main__":
    sys.exit(main())
