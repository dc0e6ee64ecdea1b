"""Command-line interface: scene generation, simulation, replay, metrics, pattern dumps."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ReconConfig, load_config
from .errors import Ac3diError, SizeError
from .forward import downsample_scene, read_log, write_log
from .hadamard import MaskedSensingPlan, pattern_row
from .imageio import read_map, read_scene_bundle, write_pfm, write_pgm, write_scene_bundle
from .metrics import QualityReport, psnr
from .pipeline import LogSource, SimulatorSource, run
from .scenes import KINDS, scene_gen


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _config(path) -> ReconConfig:
    return load_config(path) if path else ReconConfig()


def _write_image(path, img) -> None:
    if str(path).lower().endswith(".pgm"):
        write_pgm(path, img)
    else:
        write_pfm(path, img)


def cmd_scene_gen(args) -> None:
    scene, meta = scene_gen(args.kind, args.side, dict(args.param), args.seed)
    write_scene_bundle(args.out, scene, meta)
    print(f"wrote {args.kind} scene ({args.side}x{args.side}) to {args.out}")


def _emit(args, intensity, depth, stats, cfg) -> None:
    if args.out_intensity:
        _write_image(args.out_intensity, intensity)
    if args.out_depth:
        _write_image(args.out_depth, depth)
    report = QualityReport.from_stats(stats, cfg.sim.range_gate_m)
    if getattr(args, "report", None):
        report.write(args.report)
    print(report.to_json())


def cmd_simulate(args) -> None:
    cfg = _config(args.config)
    scene, _ = read_scene_bundle(args.scene)
    if scene.side < cfg.final_side:
        raise SizeError(f"scene side {scene.side} is smaller than final_side {cfg.final_side}")
    source = SimulatorSource(scene, cfg.sim, keep_records=bool(args.out_log))
    intensity, depth, stats = run(cfg, source, truth=scene)
    if args.out_log:
        write_log(args.out_log, source.records)
    _emit(args, intensity, depth, stats, cfg)


def cmd_reconstruct(args) -> None:
    cfg = _config(args.config)
    source = LogSource(read_log(args.log))
    truth = read_scene_bundle(args.ref_scene)[0] if args.ref_scene else None
    intensity, depth, stats = run(cfg, source, truth=truth)
    _emit(args, intensity, depth, stats, cfg)


def cmd_metrics(args) -> None:
    scene, _ = read_scene_bundle(args.ref_scene)
    report = QualityReport(depth_peak_m=args.range_gate)
    if args.intensity:
        img = read_map(args.intensity)
        ref = downsample_scene(scene, img.shape[0]).intensity
        report.psnr_intensity_db = psnr(img, ref, float(ref.max()))
    if args.depth:
        img = read_map(args.depth)
        ref = downsample_scene(scene, img.shape[0]).depth
        report.psnr_depth_db = psnr(img, ref, args.range_gate)
    if args.report:
        report.write(args.report)
    print(report.to_json())


def _read_mark(path, side: int) -> np.ndarray:
    p = str(path).lower()
    if p.endswith((".pfm", ".pgm")):
        mark = read_map(path) != 0
    else:
        mark = np.loadtxt(path, ndmin=2) != 0
    if mark.shape != (side, side):
        raise SizeError(f"mark file is {mark.shape}, expected ({side}, {side})")
    return mark


def cmd_patterns_export(args) -> None:
    side = args.side
    mark = _read_mark(args.mark_file, side) if args.mark_file else np.ones((side, side), bool)
    plan = MaskedSensingPlan(mark)
    n = plan.order if args.rows is None else min(args.rows, plan.order)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for m in range(n):
        write_pgm(out / f"pattern_{m:05d}.pgm", pattern_row(plan, m).reshape(side, side), vmax=1)
    print(f"wrote {n} of {plan.order} patterns (M={plan.n_marked}) to {out}")


def cmd_config_show(args) -> None:
    print(_config(args.config).model_dump_json(indent=2))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ac3di", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    scene = sub.add_parser("scene", help="synthetic scenes").add_subparsers(dest="action", required=True)
    gen = scene.add_parser("gen", help="generate a scene bundle")
    gen.add_argument("--kind", required=True, choices=KINDS)
    gen.add_argument("--side", type=int, default=512)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--param", type=_param, action="append", default=[],
                     help="generator parameter key=value (value parsed as JSON when possible)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_scene_gen)

    sim = sub.add_parser("simulate", help="simulate acquisition and reconstruct")
    sim.add_argument("--scene", required=True, help="scene bundle directory")
    sim.add_argument("--config", help="JSON ReconConfig (defaults if omitted)")
    sim.add_argument("--out-log", help="JSON-lines measurement log")
    sim.add_argument("--out-intensity")
    sim.add_argument("--out-depth")
    sim.add_argument("--report", help="JSON quality report")
    sim.set_defaults(func=cmd_simulate)

    rec = sub.add_parser("reconstruct", help="reconstruct from a measurement log")
    rec.add_argument("--log", required=True)
    rec.add_argument("--config")
    rec.add_argument("--out-intensity")
    rec.add_argument("--out-depth")
    rec.add_argument("--ref-scene", help="optional ground truth for PSNR")
    rec.add_argument("--report")
    rec.set_defaults(func=cmd_reconstruct)

    met = sub.add_parser("metrics", help="PSNR of images against a scene bundle")
    met.add_argument("--ref-scene", required=True)
    met.add_argument("--intensity")
    met.add_argument("--depth")
    met.add_argument("--range-gate", type=float, default=7.5, help="depth PSNR peak in meters")
    met.add_argument("--report")
    met.set_defaults(func=cmd_metrics)

    pat = sub.add_parser("patterns", help="pattern debugging").add_subparsers(dest="action", required=True)
    exp = pat.add_parser("export", help="write pattern rows as PGM images")
    exp.add_argument("--side", type=int, required=True)
    exp.add_argument("--mark-file", help="PGM/PFM (nonzero = marked) or 0/1 text grid")
    exp.add_argument("--rows", type=int, help="export only the first ROWS patterns")
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_patterns_export)

    cfg = sub.add_parser("config", help="configuration helpers").add_subparsers(dest="action", required=True)
    show = cfg.add_parser("show", help="print the effective configuration")
    show.add_argument("--config")
    show.set_defaults(func=cmd_config_show)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (Ac3diError, OSError, ValueError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"ac3di: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
