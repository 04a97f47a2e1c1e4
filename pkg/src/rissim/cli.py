"""Command-line front end.

Subcommands map to the standard experiments: ``beam-pattern`` dumps
far-field cuts of the coded surface, ``single-ue`` runs one connected
UE with the surface beamformed at it or absent, ``schedule`` runs the
two-UE alternating-surface scenario, and ``sweep-alpha`` produces the
throughput-vs-EWMA-weight table with genie and no-surface reference
rows.  Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import engine, presets
from .array_model import beam_metrics, design_phase_offsets, pattern_gains, upa_profile
from .config import ConfigError, ExperimentConfig, parse_text, serialize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rissim", description=__doc__)
    p.add_argument("--config", type=Path, help="flat key=value config file")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--duration-s", type=float, help="run duration override")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="config override, repeatable",
    )
    sub = p.add_subparsers(dest="command", required=True)

    bp = sub.add_parser("beam-pattern", help="far-field pattern of steered one-bit profiles")
    bp.add_argument("--steer-deg", type=float, nargs="+", default=[30.0])
    bp.add_argument("--grid-step-deg", type=float, default=0.05)
    bp.add_argument("--csv-step-deg", type=float, default=0.1)

    su = sub.add_parser("single-ue", help="one connected UE, surface on or off")
    su.add_argument("--ue", type=int, choices=(1, 2), required=True)
    su.add_argument("--ris", choices=("on", "off"), default="on")

    sc = sub.add_parser("schedule", help="two-UE alternating-surface run")
    sc.add_argument("--alpha", type=float, default=presets.BASE_ALPHA)
    sc.add_argument("--mode", choices=("periodic", "iid", "genie", "off"), default="periodic")

    sw = sub.add_parser("sweep-alpha", help="throughput vs EWMA weight table")
    sw.add_argument("--alphas", type=float, nargs="+", default=list(presets.SWEEP_ALPHAS))
    return p


def _apply_globals(cfg: ExperimentConfig, args) -> ExperimentConfig:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    if overrides:
        cfg = cfg.with_overrides(overrides)
    if args.seed is not None:
        cfg = replace(cfg, sim=replace(cfg.sim, seed=args.seed))
    if args.duration_s is not None:
        cfg = replace(cfg, sim=replace(cfg.sim, duration_s=args.duration_s))
    return cfg


def _base_config(args, preset_builder) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_text(args.config.read_text())
    else:
        cfg = preset_builder()
    return _apply_globals(cfg, args)


def cmd_beam_pattern(args) -> int:
    g = presets.GEOMETRY
    offsets = design_phase_offsets(g.n_h, g.n_v) if g.dither else None
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for steer in args.steer_deg:
        profile = upa_profile(steer, 0.0, g.n_h, g.n_v, g.spacing_ratio, offsets)
        m = beam_metrics(
            profile.code, 0.0, g.n_h, g.n_v, g.spacing_ratio,
            grid_step_deg=args.grid_step_deg, phase_offsets=offsets,
        )
        angles = np.arange(0.0, 90.0 + args.csv_step_deg / 2, args.csv_step_deg)
        gains = np.abs(
            pattern_gains(profile.code, 0.0, angles, g.n_h, g.n_v, g.spacing_ratio, offsets)
        )
        n = g.n_h * g.n_v
        path = out_dir / f"pattern_{steer:g}deg.csv"
        with open(path, "w") as f:
            f.write("angle_deg,gain_db\n")
            for a, v in zip(angles, gains):
                db = 20.0 * np.log10(max(v, 1e-12) / n)
                f.write(f"{a:.4f},{db:.4f}\n")
        print(
            f"steer={steer:g} peak={m.peak_angle_deg:.2f} deg "
            f"peak_gain={m.peak_gain_db:.2f} dB hpbw={m.hpbw_deg:.2f} deg "
            f"sll={m.sll_db:.2f} dB -> {path}"
        )
    return EXIT_OK


def _emit_run(cfg: ExperimentConfig, out_dir: Path, tag: str, histogram: bool = False) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    trace, summary = engine.run(cfg)
    trace_path = out_dir / f"{tag}_trace.csv"
    engine.write_trace_csv(trace, trace_path, n_ues=len(cfg.ues))
    summary_path = out_dir / f"{tag}_summary.txt"
    summary_path.write_text(summary.as_kv_text())
    (out_dir / f"{tag}_config.txt").write_text(serialize(cfg))
    print(f"trace -> {trace_path}")
    print(f"summary -> {summary_path}")
    print(summary.as_kv_text(), end="")
    if histogram:
        hist = engine.scheduling_histogram(
            trace, len(cfg.ues), start_slot=round(cfg.sim.warmup_s * 2000)
        )
        hist_path = out_dir / f"{tag}_histogram.csv"
        with open(hist_path, "w") as f:
            f.write(
                "ue,aligned_fraction,misaligned_fraction,"
                "aligned_fraction_total,misaligned_fraction_total\n"
            )
            for k, row in enumerate(hist):
                f.write(
                    f"{k},{row['aligned_fraction']:.6f},{row['misaligned_fraction']:.6f},"
                    f"{row['aligned_fraction_total']:.6f},{row['misaligned_fraction_total']:.6f}\n"
                )
        print(f"histogram -> {hist_path}")


def cmd_single_ue(args) -> int:
    ris_on = args.ris == "on"
    cfg = _apply_globals(presets.single_ue_config(args.ue - 1, ris_on=ris_on), args)
    _emit_run(cfg, args.out_dir, f"single_ue{args.ue}_{args.ris}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    def builder():
        return presets.schedule_config(alpha=args.alpha, mode=args.mode)

    cfg = _base_config(args, builder)
    _emit_run(cfg, args.out_dir, f"schedule_{args.mode}", histogram=True)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _base_config(args, presets.sweep_config)
    rows = engine.sweep_alpha(cfg, list(args.alphas))
    _, genie_summary = engine.run(replace(cfg, ris=replace(cfg.ris, mode="genie"),
                                          sched=replace(cfg.sched, kind="rr")))
    _, off_summary = engine.run(replace(cfg, ris=replace(cfg.ris, mode="off")))
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "sweep_alpha.csv"
    cols = ["mode", "alpha", "inv_alpha", "aggregate_mbps"] + [
        f"throughput{k}_mbps" for k in range(len(cfg.ues))
    ] + [f"served_share{k}" for k in range(len(cfg.ues))]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for row in rows:
            f.write(
                "random,"
                + ",".join(f"{row[c]:.6f}" for c in cols[1:])
                + "\n"
            )
        for name, s in (("genie", genie_summary), ("no_ris", off_summary)):
            vals = [float("nan"), float("nan"), s.aggregate_mbps] + list(s.throughput_mbps) + list(s.served_share)
            f.write(name + "," + ",".join(f"{v:.6f}" for v in vals) + "\n")
    for row in rows:
        print(f"alpha={row['alpha']:g} aggregate={row['aggregate_mbps']:.2f} Mbit/s")
    print(f"genie aggregate={genie_summary.aggregate_mbps:.2f} Mbit/s")
    print(f"no-ris aggregate={off_summary.aggregate_mbps:.2f} Mbit/s")
    print(f"table -> {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "beam-pattern": cmd_beam_pattern,
        "single-ue": cmd_single_ue,
        "schedule": cmd_schedule,
        "sweep-alpha": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures keep a stable exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
