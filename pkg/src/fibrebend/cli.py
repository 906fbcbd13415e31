"""Command-line front end.

Every subcommand validates its inputs first, then runs and drops its outputs
plus a manifest.json into the output directory.  Exit codes: 0 on success,
2 for usage/validation problems, 1 for runtime failures.  Reruns with the
same inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ConfigError, load_config, write_manifest
from .femdeck import DeckError, build_deck, serialize_deck
from .fiberpath import FiberPath, WindingError, WindingSpec, generate_helix, mirror_path, path_metrics
from .geometry import GeometryError, chamber_metrics
from .materials import MaterialLibrary, default_library
from .mechanics import (
    DeviceSpec,
    ModelError,
    UnstableSolveError,
    calibrate,
    compose_device,
    solve_quasi_static,
    workspace,
)
from .postprocess import (
    PostprocessError,
    PressureSchedule,
    bending_angle,
    hysteresis_ratio,
    parse_bench_log,
    parse_histories,
    radial_expansion,
    select_radial_pairs,
    time_to_pressure,
)
from .plots import PlotError, render_plot

DEFAULT_SWEEP_TURNS = (9, 18, 30, 50, 100)

_VALIDATION_ERRORS = (ConfigError, GeometryError, WindingError, ModelError,
                      PostprocessError, DeckError, PlotError,
                      FileNotFoundError, ValueError)


class _Run:
    """Collects inputs/outputs for the manifest of one invocation."""

    def __init__(self, args, command: str):
        out = args.out or os.environ.get("FIBREBEND_OUT") or "fibrebend-out"
        self.out_dir = Path(out)
        self.command = command
        self.inputs: dict[str, Path] = {}
        self.outputs: list[str] = []
        if getattr(args, "config", None):
            self.inputs["config"] = Path(args.config)

    def write(self, name: str, text: str) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / name).write_text(text)
        self.outputs.append(name)

    def finish(self, status: str = "ok", extra: dict | None = None) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        write_manifest(self.out_dir, self.command, self.inputs, self.outputs,
                       status=status, extra=extra)


def _load(args) -> dict:
    if getattr(args, "config", None):
        return load_config(args.config)
    return {}


def _materials(args, cfg: dict) -> MaterialLibrary:
    if getattr(args, "materials", None):
        lib = MaterialLibrary.from_json(Path(args.materials).read_text())
    else:
        lib = default_library()
    section = cfg.get("materials", {})
    if "halved_fibre_radius" in section:
        halved = cfgmod._cast(section["halved_fibre_radius"], "bool")
        lib = dataclasses.replace(lib, halved_fibre_radius=halved)
    return lib


def _winding(cfg: dict, **overrides) -> WindingSpec:
    return cfgmod.winding_from_config(cfg, **overrides)


def _paths_for(spec, winding: WindingSpec) -> list[FiberPath]:
    path = generate_helix(spec, winding)
    if spec.kind == "B":
        return [path, mirror_path(path)]
    return [path]


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_design(args) -> int:
    run = _Run(args, "design")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    metrics = chamber_metrics(spec)
    run.write("spec.json", spec.to_json())
    run.write("section.csv", spec.section_csv())
    run.write("design_metrics.json", _json_text(metrics.to_dict()))
    run.finish(extra={"kind": spec.kind})
    return 0


def _cmd_wind(args) -> int:
    run = _Run(args, "wind")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    winding = _winding(cfg)
    paths = _paths_for(spec, winding)
    names = ["path.csv"] if len(paths) == 1 else ["path_0.csv", "path_1.csv"]
    for name, path in zip(names, paths):
        run.write(name, path.to_csv())
    run.write("path_metrics.json", _json_text(path_metrics(paths[0])))
    run.finish(extra={"style": winding.style, "turns": winding.turns})
    return 0


def _report_figures(run: _Run, res, label: str) -> None:
    p = res.pressures_kpa
    run.write("angle_pressure.svg",
              render_plot([(label, p, res.theta_deg)], "angle_pressure"))
    run.write("expansion_pressure.svg",
              render_plot([(label, p, res.expansion_mm)], "expansion_pressure"))
    run.write("trajectory.svg", render_plot([(label, res.tip_xyz)], "trajectory"))


def _cmd_simulate(args) -> int:
    run = _Run(args, "simulate")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    winding = _winding(cfg)
    materials = _materials(args, cfg)
    schedule = cfgmod.schedule_from_config(cfg) if "schedule" in cfg else None
    seg = cfgmod.segment_model_from_config(cfg)
    if args.device or args.payload:
        device = cfgmod.device_from_config(cfg) if "device" in cfg else DeviceSpec()
        spec = compose_device(spec, device, payload=args.payload,
                              constants=seg.constants)
    label = f"{winding.style}{winding.turns}"
    try:
        res = solve_quasi_static(spec, winding, materials, schedule, seg)
    except UnstableSolveError as exc:
        run.write("result.csv", exc.partial.to_csv())
        run.finish(status="unstable",
                   extra={"label": label, "aborted_at_kpa": exc.pressure_kpa,
                          "expansion_mm": exc.expansion_mm,
                          "limit_mm": exc.limit_mm})
        print(f"unstable: ballooning at {exc.pressure_kpa:.2f} kPa "
              f"(expansion {exc.expansion_mm:.2f} mm > {exc.limit_mm:.2f} mm)",
              file=sys.stderr)
        return 1
    run.write("result.csv", res.to_csv())
    _report_figures(run, res, label)
    run.finish(extra={"label": label,
                      "theta_final_deg": float(res.theta_deg[-1]),
                      "capped": bool(res.capped.any())})
    print(f"{label}: theta {res.theta_deg[-1]:.2f} deg at "
          f"{res.pressures_kpa[-1]:.0f} kPa")
    return 0


def _sweep_one(spec, style, turns, materials, schedule, seg, template):
    winding = dataclasses.replace(template, style=style, turns=turns)
    winding.validate()
    try:
        res = solve_quasi_static(spec, winding, materials, schedule, seg)
        return style, turns, res, None
    except UnstableSolveError as exc:
        return style, turns, exc.partial, exc


def _cmd_sweep(args) -> int:
    run = _Run(args, "sweep")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    materials = _materials(args, cfg)
    schedule = cfgmod.schedule_from_config(cfg) if "schedule" in cfg else None
    seg = cfgmod.segment_model_from_config(cfg)
    template = _winding(cfg) if "winding" in cfg else WindingSpec()
    styles = [s.strip().upper() for s in args.styles.split(",") if s.strip()]
    turns = [int(t) for t in args.turns.split(",")] if args.turns else list(DEFAULT_SWEEP_TURNS)
    for style in styles:
        if style not in ("SH", "DH"):
            raise ConfigError(f"unknown style {style!r} in --styles")
    if not styles or not turns:
        raise ConfigError("sweep needs at least one style and one turn count")

    grid = [(style, n) for style in styles for n in turns]
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        futures = [pool.submit(_sweep_one, spec, style, n, materials,
                               schedule, seg, template)
                   for style, n in grid]
        results = [f.result() for f in futures]  # submission order: deterministic

    lines = ["label,style,turns,pressure_kPa,theta_deg,status,abort_kPa"]
    curves = []
    for style, n, res, exc in results:
        label = f"{style}{n:03d}"
        run.write(f"sweep_{label}.csv", res.to_csv())
        if len(res.pressures_kpa):
            curves.append((label, res.pressures_kpa, res.theta_deg))
        if exc is None:
            lines.append(f"{label},{style},{n},{float(res.pressures_kpa[-1])!r},"
                         f"{float(res.theta_deg[-1])!r},ok,")
        else:
            theta = float(res.theta_deg[-1]) if len(res.theta_deg) else 0.0
            p_last = float(res.pressures_kpa[-1]) if len(res.pressures_kpa) else 0.0
            lines.append(f"{label},{style},{n},{p_last!r},{theta!r},unstable,"
                         f"{float(exc.pressure_kpa)!r}")
    run.write("summary.csv", "\n".join(lines) + "\n")
    if curves:
        run.write("angle_pressure.svg", render_plot(curves, "angle_pressure"))
    n_fail = sum(1 for *_, exc in results if exc is not None)
    run.finish(extra={"configs": len(results), "unstable": n_fail})
    print("\n".join(lines))
    return 0


def _cmd_analyze(args) -> int:
    run = _Run(args, "analyze")
    cfg = _load(args)
    if args.bench:
        run.inputs["bench"] = Path(args.bench)
        forward, backward = parse_bench_log(Path(args.bench).read_text())
        lines = ["leg,pressure_kPa,theta_deg"]
        for leg, series in (("forward", forward), ("backward", backward)):
            if series is None:
                continue
            for p, th in zip(series.pressures_kpa, series.theta_deg):
                lines.append(f"{leg},{float(p)!r},{float(th)!r}")
        run.write("analysis.csv", "\n".join(lines) + "\n")
        summary: dict = {"legs": 1 if backward is None else 2}
        if backward is not None:
            hys = hysteresis_ratio(forward, backward)
            summary.update(ratio_pct=hys.ratio_pct,
                           loop_area_ratio_pct=hys.loop_area_ratio_pct)
            run.write("hysteresis.svg", render_plot((forward, backward), "hysteresis"))
        else:
            run.write("angle_pressure.svg",
                      render_plot([("forward", forward.pressures_kpa,
                                    forward.theta_deg)], "angle_pressure"))
        run.write("analysis.json", _json_text(summary))
        run.finish(extra=summary)
        return 0

    if not (args.histories and args.sidecar):
        raise ConfigError("analyze needs either --bench or --histories with --sidecar")
    run.inputs["histories"] = Path(args.histories)
    run.inputs["sidecar"] = Path(args.sidecar)
    spec = cfgmod.geometry_from_config(cfg)
    histories = parse_histories(Path(args.histories).read_text(),
                                Path(args.sidecar).read_text())
    if args.tip_node is not None:
        if args.tip_node not in histories:
            raise ConfigError(f"no history for tip node {args.tip_node}")
        tip_id = args.tip_node
    else:
        tip_id = max(histories, key=lambda nid: (histories[nid].initial_xyz[2], -nid))
    tip = histories[tip_id]
    ref = np.array([float(v) for v in args.ref.split(",")])
    if ref.shape != (3,):
        raise ConfigError(f"--ref needs x,y,z; got {args.ref!r}")
    if "schedule" in cfg:
        schedule = cfgmod.schedule_from_config(cfg)
    else:  # default: proportional ramp to 100 kPa over the record span
        t_end = float(tip.times[-1]) if float(tip.times[-1]) > 0 else 1.0
        schedule = PressureSchedule.proportional(t_end=t_end)
    nodes = [(nid, h.initial_xyz) for nid, h in sorted(histories.items())]
    pairs = select_radial_pairs(nodes, spec)
    lines = ["t,pressure_kPa,theta_deg,expansion_mm"]
    angles, press = [], []
    for t in tip.times:
        theta = bending_angle(ref, tip, float(t))
        exp = radial_expansion(pairs, histories, float(t)).mean_mm
        p = time_to_pressure(schedule, float(t))
        lines.append(f"{float(t)!r},{float(p)!r},{float(theta)!r},{float(exp)!r}")
        angles.append(theta)
        press.append(p)
    run.write("analysis.csv", "\n".join(lines) + "\n")
    run.write("angle_pressure.svg",
              render_plot([(f"node {tip_id}", press, angles)], "angle_pressure"))
    run.finish(extra={"tip_node": tip_id, "rows": len(tip.times),
                      "theta_final_deg": float(angles[-1])})
    return 0


def _cmd_export_deck(args) -> int:
    run = _Run(args, "export-deck")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    winding = _winding(cfg)
    materials = _materials(args, cfg)
    schedule = cfgmod.schedule_from_config(cfg) if "schedule" in cfg else None
    p_max = float(np.max(schedule.pressures_kpa())) if schedule is not None else 100.0
    deck = build_deck(spec, _paths_for(spec, winding), materials, p_max_kpa=p_max)
    run.write("actuator.deck", serialize_deck(deck))
    run.finish(extra={"solids": len(deck.solids), "fibres": len(deck.fibres),
                      "p_max_kpa": p_max})
    return 0


def _parse_anchor(text: str, with_value: bool, what: str):
    parts = text.split(":")
    want = 4 if with_value else 3
    if len(parts) != want:
        raise ConfigError(f"bad {what} {text!r}; expected "
                          + ("STYLE:TURNS:P_KPA:VALUE" if with_value else "STYLE:TURNS:P_KPA"))
    style, turns = parts[0].strip().upper(), int(parts[1])
    rest = [float(v) for v in parts[2:]]
    return style, turns, rest


def _cmd_calibrate(args) -> int:
    run = _Run(args, "calibrate")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    materials = _materials(args, cfg)
    seg = cfgmod.segment_model_from_config(cfg)
    template = _winding(cfg) if "winding" in cfg else WindingSpec()

    def make(style: str, turns: int) -> WindingSpec:
        w = dataclasses.replace(template, style=style, turns=turns)
        w.validate()
        return w

    anchors = []
    for text in args.anchor:
        style, turns, (p, theta) = _parse_anchor(text, True, "--anchor")
        anchors.append((make(style, turns), p, theta))
    twist_anchor = None
    if args.twist_anchor:
        style, turns, (p, pct) = _parse_anchor(args.twist_anchor, True, "--twist-anchor")
        twist_anchor = (make(style, turns), p, pct)
    abort_anchor = None
    if args.abort_anchor:
        style, turns, (p,) = _parse_anchor(args.abort_anchor, False, "--abort-anchor")
        abort_anchor = (make(style, turns), p)

    fit = calibrate(spec, anchors, materials, seg,
                    twist_anchor=twist_anchor, abort_anchor=abort_anchor)
    payload = {"constants": dataclasses.asdict(fit.constants),
               "residuals": fit.residuals, "evaluations": fit.evaluations}
    run.write("calibration.json", _json_text(payload))
    run.finish(extra={"anchors": len(anchors), "evaluations": fit.evaluations})
    print(f"calibrated n0 = {fit.constants.n0!r} in {fit.evaluations} evaluations")
    return 0


def _cmd_workspace(args) -> int:
    run = _Run(args, "workspace")
    cfg = _load(args)
    spec = cfgmod.geometry_from_config(cfg)
    winding = _winding(cfg)
    materials = _materials(args, cfg)
    schedule = cfgmod.schedule_from_config(cfg) if "schedule" in cfg else None
    seg = cfgmod.segment_model_from_config(cfg)
    corridor = None
    if args.corridor or "device" in cfg:
        corridor = cfgmod.device_from_config(cfg) if "device" in cfg else DeviceSpec()
    ws = workspace(spec, winding, materials, schedule, seg, corridor=corridor)
    lines = ["pressure_kPa,tip_x,tip_y,tip_z"]
    for p, tip in zip(ws.pressures_kpa, ws.tips):
        lines.append(f"{float(p)!r},{float(tip[0])!r},{float(tip[1])!r},{float(tip[2])!r}")
    run.write("workspace.csv", "\n".join(lines) + "\n")
    payload = {"max_reach_mm": ws.max_reach_mm, "swept_area_mm2": ws.swept_area_mm2,
               "fits_corridor": ws.fits_corridor}
    run.write("workspace.json", _json_text(payload))
    run.write("trajectory.svg",
              render_plot([(f"{winding.style}{winding.turns}", ws.tips)], "trajectory"))
    run.finish(extra=payload)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibrebend",
        description="Design, winding and reduced-order simulation of "
                    "fibre-reinforced soft bending actuators.")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--out", help="output directory (default: $FIBREBEND_OUT or ./fibrebend-out)")
        p.add_argument("--materials", help="material library JSON")

    p = sub.add_parser("design", help="emit the section geometry")
    common(p)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("wind", help="generate the fibre path")
    common(p)
    p.set_defaults(func=_cmd_wind)

    p = sub.add_parser("simulate", help="quasi-static solve with report figures")
    common(p)
    p.add_argument("--device", action="store_true", help="embed in the device body")
    p.add_argument("--payload", action="store_true", help="device body with payload")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="batch solves over styles and turn counts")
    common(p)
    p.add_argument("--styles", default="SH,DH")
    p.add_argument("--turns", default="", help="comma list (default 9,18,30,50,100)")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("analyze", help="reduce node histories or a bench log")
    common(p)
    p.add_argument("--histories", help="node displacement CSV")
    p.add_argument("--sidecar", help="initial node position CSV")
    p.add_argument("--bench", help="bench angle log CSV")
    p.add_argument("--tip-node", type=int, default=None)
    p.add_argument("--ref", default="0,0,0", help="reference point x,y,z [mm]")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("export-deck", help="write the solver input deck")
    common(p)
    p.set_defaults(func=_cmd_export_deck)

    p = sub.add_parser("calibrate", help="fit model constants to anchors")
    common(p)
    p.add_argument("--anchor", action="append", default=[],
                   metavar="STYLE:TURNS:P_KPA:THETA_DEG", required=True)
    p.add_argument("--twist-anchor", metavar="STYLE:TURNS:P_KPA:PCT")
    p.add_argument("--abort-anchor", metavar="STYLE:TURNS:P_KPA")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("workspace", help="tip coverage over the schedule")
    common(p)
    p.add_argument("--corridor", action="store_true",
                   help="check the trajectory against the device body")
    p.set_defaults(func=_cmd_workspace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnstableSolveError as exc:
        print(f"error: unstable at {exc.pressure_kpa:.2f} kPa", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
