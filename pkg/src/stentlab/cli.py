"""Command line front end.

Usage errors exit with code 2 (argparse), runtime failures print a
diagnostic line to stderr and exit 1.  Every command writes its artifacts
plus a manifest.json with sha256 checksums into --out.
"""
import argparse
from dataclasses import dataclass, replace
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import StentLabError
from .fatigue import constant_life_data, polar_projection, region_report
from .geometry import build_stent, save_design
from .loading import SheathBC
from .pipeline import (FRENCH_MM, ScenarioConfig, emit_energy_csv,
                       emit_fatigue_csv, emit_radial_force_csv,
                       emit_region_report_csv, emit_tracking_csv,
                       load_scenario, resolve_design, run_pipeline)
from .scenarios import crimp, radial_force_curve
from .solver import SolverConfig, initial_state
from .svgplot import emit_svg
from .sweep import rank_designs, run_sweep, sweep_rows, width_variants
from . import runio

log = logging.getLogger("stentlab")


@dataclass
class RunConfig:
    out_dir: str
    seed: int = 0          # reserved for fixture generation, physics is seed-free
    log_level: str = "info"


def _setup_logging(level_name):
    level = getattr(logging, level_name.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def parse_diameters(text):
    """'26:6:21' -> 21 values from 26 down to 6 inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if count < 2 or not start > stop:
        raise argparse.ArgumentTypeError(
            "need count >= 2 and start > stop (crimping goes downward)")
    return np.linspace(start, stop, count)


def _ensure_out(path):
    os.makedirs(path, exist_ok=True)
    return path


def _scenario_from_args(args) -> ScenarioConfig:
    if getattr(args, "scenario", None):
        scn = load_scenario(args.scenario)
    else:
        scn = ScenarioConfig(design=resolve_design(args.design))
    if getattr(args, "target_diameter", None):
        scn = replace(scn, sheath=replace(scn.sheath,
                                          target_diameter=args.target_diameter))
    if getattr(args, "cycles", None):
        scn = replace(scn, n_cycles=args.cycles)
    if getattr(args, "settle_cycles", None) is not None:
        scn = replace(scn, settle_cycles=args.settle_cycles)
    return scn


# ------------------------------------------------------------- subcommands
def cmd_build(args):
    out = _ensure_out(args.out)
    design = resolve_design(args.design)
    frame = build_stent(design, args.elements_per_strut)
    nodes_csv = os.path.join(out, "nodes.csv")
    runio.write_csv(nodes_csv, ["node [-]", "x [mm]", "y [mm]", "z [mm]",
                                "ring [-]"],
                    ((i, *frame.nodes[i], frame.node_ring[i])
                     for i in range(len(frame.nodes))))
    elems_csv = os.path.join(out, "elements.csv")
    runio.write_csv(elems_csv,
                    ["element [-]", "node_a [-]", "node_b [-]", "strut [-]",
                     "region [-]", "width [mm]", "thickness [mm]",
                     "length [mm]"],
                    ((e, *frame.elements[e], frame.strut_id[e],
                      frame.region_names[frame.region[e]],
                      frame.sections[frame.section_id[e]].width,
                      frame.sections[frame.section_id[e]].thickness,
                      frame.element_lengths()[e])
                     for e in range(len(frame.elements))))
    summary = os.path.join(out, "frame_summary.json")
    lengths = frame.element_lengths()
    runio.write_json(summary, {
        "design": design.name, "n_nodes": int(len(frame.nodes)),
        "n_elements": int(len(frame.elements)),
        "n_struts": int(frame.strut_id.max() + 1),
        "height_mm": float(frame.nodes[:, 2].max() - frame.nodes[:, 2].min()),
        "strut_length_mm": float(lengths.sum() / (frame.strut_id.max() + 1)),
        "min_crimp_diameter_mm": 2 * design.n_cells * design.strut_width / np.pi,
    })
    runio.write_manifest(out, [nodes_csv, elems_csv, summary])
    log.info("wrote frame with %d elements to %s", len(frame.elements), out)
    return 0


def cmd_crimp(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    result = run_pipeline(scn, stop_after="crimp")
    state = result.crimped
    energy_csv = os.path.join(out, "energy.csv")
    emit_energy_csv(energy_csv, state.energy_trace)
    radii = np.linalg.norm(state.pos[:, :2], axis=1)
    summary = os.path.join(out, "crimp_summary.json")
    runio.write_json(summary, {**result.metrics,
                               "max_node_diameter_mm": float(2 * radii.max()),
                               "target_diameter_mm": scn.sheath.target_diameter})
    runio.write_manifest(out, [energy_csv, summary])
    log.info("crimped %s to %.3f mm", scn.design.name, 2 * radii.max())
    return 0


def cmd_radialforce(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    curve = radial_force_curve(build_stent(scn.design, scn.elements_per_strut,
                                           scn.solver.fiber_grid),
                               scn.material, args.diameters, scn.solver,
                               scn.sheath)
    csv_path = os.path.join(out, "radial_force.csv")
    emit_radial_force_csv(csv_path, curve)
    svg_path = os.path.join(out, "radial_force.svg")
    emit_svg({"title": f"{scn.design.name}: outward force vs sheath diameter",
              "xlabel": "diameter [mm]", "ylabel": "radial force [N]",
              "series": [{"label": scn.design.name,
                          "x": list(curve.diameters)[::-1],
                          "y": list(curve.forces)[::-1]}]},
             "curve", svg_path)
    runio.write_manifest(out, [csv_path, svg_path])
    log.info("radial force over %d diameters written to %s",
             len(curve.diameters), out)
    return 0


def cmd_deploy(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    result = run_pipeline(scn, stop_after="deploy")
    energy_csv = os.path.join(out, "energy.csv")
    emit_energy_csv(energy_csv, result.deployed.energy_trace)
    summary = os.path.join(out, "deploy_summary.json")
    runio.write_json(summary, result.metrics)
    runio.write_manifest(out, [energy_csv, summary])
    log.info("deployed %s, anchorage %.3f N", scn.design.name,
             result.metrics["anchorage_N"])
    return 0


def cmd_beat(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    result = run_pipeline(scn)
    paths = _emit_beat_artifacts(out, result)
    runio.write_manifest(out, paths)
    log.info("%d cycles done, peak compression %.3f mm", scn.n_cycles,
             result.metrics["peak_compression_mm"])
    return 0


def _emit_beat_artifacts(out, result, svgs=True):
    paths = []
    tracking_csv = os.path.join(out, "tracking.csv")
    emit_tracking_csv(tracking_csv, result.tracking)
    paths.append(tracking_csv)
    strains_npz = os.path.join(out, "strains.npz")
    result.beat.store.save_npz(strains_npz)
    paths.append(strains_npz)
    energy_csv = os.path.join(out, "energy.csv")
    emit_energy_csv(energy_csv, result.beat.state.energy_trace)
    paths.append(energy_csv)
    summary = os.path.join(out, "beat_summary.json")
    runio.write_json(summary, result.metrics)
    paths.append(summary)
    if svgs:
        svg = os.path.join(out, "tracking.svg")
        emit_svg({"title": f"{result.scenario.design.name}: lumen-driven deformation",
                  "xlabel": "time [s]", "ylabel": "compression [mm]",
                  "series": [{"label": "diametric compression",
                              "x": list(result.tracking.times),
                              "y": list(result.tracking.compression)}]},
                 "curve", svg)
        paths.append(svg)
    return paths


def cmd_fatigue(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    result = run_pipeline(scn)
    paths = _emit_beat_artifacts(out, result, svgs=False)
    fatigue_csv = os.path.join(out, "fatigue.csv")
    emit_fatigue_csv(fatigue_csv, result.records)
    paths.append(fatigue_csv)
    report_csv = os.path.join(out, "region_report.csv")
    emit_region_report_csv(report_csv, region_report(result.records))
    paths.append(report_csv)
    life_svg = os.path.join(out, "constant_life.svg")
    emit_svg(constant_life_data(result.records, scn.limits,
                                title=f"{scn.design.name}: strain mean vs amplitude"),
             "scatter", life_svg)
    paths.append(life_svg)
    polar_svg = os.path.join(out, "polar_amplitude.svg")
    emit_svg(polar_projection(result.records,
                              title=f"{scn.design.name}: cyclic strain by site"),
             "heat", polar_svg)
    paths.append(polar_svg)
    runio.write_manifest(out, paths)
    log.info("fatigue: %d/%d points flagged", result.metrics["n_failed"],
             result.metrics["n_points"])
    return 0


def cmd_sweep(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    designs = width_variants(scn.design, deltas=tuple(args.deltas))
    results = run_sweep(designs, scn, jobs=args.jobs)
    header, rows = sweep_rows(results)
    csv_path = os.path.join(out, "sweep.csv")
    runio.write_csv(csv_path, header, rows)
    ranked = rank_designs([r for r in results if r.ok],
                          key="failed_fraction")
    summary = os.path.join(out, "sweep_summary.json")
    runio.write_json(summary, {
        "n_designs": len(results),
        "n_ok": sum(r.ok for r in results),
        "ranking_by_failed_fraction": [r.design_name for r in ranked],
    })
    runio.write_manifest(out, [csv_path, summary])
    for r in results:
        log.info("sweep %-18s %s", r.design_name, r.status)
    return 0


def cmd_demo(args):
    out = _ensure_out(args.out)
    scn = _scenario_from_args(args)
    result = run_pipeline(scn)
    paths = _emit_beat_artifacts(out, result)
    fatigue_csv = os.path.join(out, "fatigue.csv")
    emit_fatigue_csv(fatigue_csv, result.records)
    paths.append(fatigue_csv)
    life_svg = os.path.join(out, "constant_life.svg")
    emit_svg(constant_life_data(result.records, scn.limits,
                                title=f"{scn.design.name}: strain mean vs amplitude"),
             "scatter", life_svg)
    paths.append(life_svg)
    runio.write_manifest(out, paths)
    print(f"demo: {scn.design.name} "
          f"compression {result.metrics['peak_compression_mm']:.2f} mm, "
          f"{result.metrics['n_failed']}/{result.metrics['n_points']} points flagged")
    return 0


# ------------------------------------------------------------------ parser
def build_parser():
    p = argparse.ArgumentParser(prog="stentlab",
                                description="self-expanding stent frame simulation toolkit")
    p.add_argument("--version", action="version", version=f"stentlab {__version__}")
    p.add_argument("--log", default=os.environ.get("STENTLAB_LOG", "info"),
                   help="log level (also via STENTLAB_LOG)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", default=os.path.join("stentlab_out", name),
                        help="output directory (default %(default)s)")
        return sp

    sp = add("build", cmd_build, help="mesh a design and dump geometry tables")
    sp.add_argument("--design", required=True, help="design json path or shipped name")
    sp.add_argument("--elements-per-strut", type=int, default=4)

    sp = add("crimp", cmd_crimp, help="crimp into a delivery sheath")
    _scenario_args(sp)
    sp.add_argument("--target-diameter", type=float,
                    help="sheath inner diameter [mm] (default from scenario)")

    sp = add("radialforce", cmd_radialforce,
             help="chronic outward force vs sheath diameter")
    _scenario_args(sp)
    sp.add_argument("--diameters", type=parse_diameters, default="26:6:11",
                    help="start:stop:count in mm, descending (default %(default)s)")

    sp = add("deploy", cmd_deploy, help="release into the vessel surrogate")
    _scenario_args(sp)

    sp = add("beat", cmd_beat, help="cyclic lumen motion with tracking")
    _scenario_args(sp)
    sp.add_argument("--cycles", type=int, help="override cycle count")
    sp.add_argument("--settle-cycles", type=int, dest="settle_cycles",
                    help="override unrecorded settling cycle count")

    sp = add("fatigue", cmd_fatigue, help="cyclic run plus fatigue classification")
    _scenario_args(sp)
    sp.add_argument("--cycles", type=int, help="override cycle count")
    sp.add_argument("--settle-cycles", type=int, dest="settle_cycles",
                    help="override unrecorded settling cycle count")

    sp = add("sweep", cmd_sweep, help="strut width sweep over one protocol")
    _scenario_args(sp)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--deltas", type=float, nargs="+", default=[0.2],
                    help="relative width changes (default %(default)s)")

    sp = add("demo", cmd_demo, help="full pipeline on the shipped demo device")
    sp.set_defaults(design="corevalve26-like", scenario=None)
    return p


def _scenario_args(sp):
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--scenario", help="scenario json")
    group.add_argument("--design", help="design json path or shipped name")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log)
    if isinstance(getattr(args, "diameters", None), str):
        args.diameters = parse_diameters(args.diameters)
    try:
        return args.fn(args)
    except StentLabError as exc:
        print(f"stentlab: error: {exc}", file=sys.stderr)
        diag = {"command": args.command, "error_type": type(exc).__name__,
                "message": str(exc)}
        out = getattr(args, "out", None)
        if out and os.path.isdir(out):
            runio.write_json(os.path.join(out, "diagnostics.json"), diag)
        return 1


if __name__ == "__main__":
    sys.exit(main())
