"""Command-line entry point: load configuration, run campaigns, export
per-sample CSVs plus a JSON summary with medians, 5%-tiles and be/ax ratios.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__, engine
from .config import ConfigError, load_config


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="wlansim",
        description="Enterprise WLAN system-level throughput simulator")
    ap.add_argument("--config", help="YAML config file merged over the preset")
    ap.add_argument("--preset", action="append", default=[],
                    choices=["11ax", "11be"],
                    help="canonical preset; may be given twice to compare")
    ap.add_argument("--drops", type=int, help="number of random drops")
    ap.add_argument("--duration-s", type=float, help="simulated seconds per drop")
    ap.add_argument("--seed", type=int, help="base seed (drop i uses seed+i)")
    ap.add_argument("--warmup-s", type=float, help="seconds excluded from counters")
    ap.add_argument("--out-dir", default="results", help="output directory")
    ap.add_argument("--jobs", type=int, help="parallel drop workers")
    ap.add_argument("--trace", action="store_true", help="write per-event trace logs")
    ap.add_argument("--dump-deployment", action="store_true",
                    help="write the drop-0 deployment as JSON")
    ap.add_argument("--set", action="append", default=[], metavar="GROUP.KEY=VAL",
                    help="override any config key")
    return ap.parse_args(argv)


def _engine_overrides(args) -> dict:
    out = {}
    for key, val in (("engine.drops", args.drops), ("engine.duration_s", args.duration_s),
                     ("engine.seed", args.seed), ("engine.warmup_s", args.warmup_s),
                     ("engine.jobs", args.jobs), ("engine.trace", args.trace or None)):
        if val is not None:
            out[key] = val
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects GROUP.KEY=VALUE, got '{item}'")
        key, val = item.split("=", 1)
        out[key] = val
    return out


def main(argv=None) -> int:
    args = _parse_args(argv if argv is not None else sys.argv[1:])
    presets = args.preset or [None]
    try:
        overrides = _engine_overrides(args)
        configs = {}
        for name in presets:
            cfg = load_config(args.config, name, overrides)
            configs[cfg.label] = cfg
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    os.makedirs(args.out_dir, exist_ok=True)
    campaigns = {}
    try:
        for label, cfg in configs.items():
            print(f"[{label}] running {cfg.engine.drops} drops x "
                  f"{cfg.engine.duration_s:g} s (jobs={cfg.engine.jobs}) ...")
            camp = engine.run_campaign(cfg)
            campaigns[label] = camp
            csv_path = os.path.join(args.out_dir, f"samples_{label}.csv")
            engine.write_samples_csv(camp, csv_path)
            s = camp.summary()
            print(f"[{label}] median DL/UL = {s['median_dl_mbps']:.1f}/"
                  f"{s['median_ul_mbps']:.1f} Mbps, 5%-tile DL/UL = "
                  f"{s['p5_dl_mbps']:.1f}/{s['p5_ul_mbps']:.1f} Mbps -> {csv_path}")
            if cfg.engine.trace:
                for d in camp.drops:
                    tp = os.path.join(args.out_dir, f"trace_{label}_{d.drop_index}.log")
                    with open(tp, "w") as fh:
                        fh.write("\n".join(d.trace) + "\n")
            if args.dump_deployment:
                runner = engine.DropRunner(cfg, 0)
                dep_path = os.path.join(args.out_dir, f"deployment_{label}.json")
                with open(dep_path, "w") as fh:
                    fh.write(runner.dep.to_json())
    except engine.EngineInvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    summary = engine.build_summary(campaigns, configs, __version__)
    summary_path = os.path.join(args.out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    if summary["ratios"]:
        r = summary["ratios"]
        print("gains be/ax: median DL {:.2f}x UL {:.2f}x | 5%-tile DL {:.2f}x UL {:.2f}x"
              .format(r["median_dl"], r["median_ul"], r["p5_dl"], r["p5_ul"]))
    print(f"summary -> {summary_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
